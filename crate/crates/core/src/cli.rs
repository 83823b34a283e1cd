//! The `palpate` command line.
//!
//! Every subcommand reads and writes the library's file formats only, so
//! stages can be chained through files. Each run writes a TOML manifest
//! holding the command line and the fully resolved configuration; outputs
//! contain no timestamps, so a repeated run with the same seed reproduces
//! them byte for byte.
//!
//! Exit codes: 0 on success, 1 for invalid input or I/O problems, 2 when a
//! numerical method fails.

use std::ffi::OsString;
use std::ops::Range;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::contact::{settling_time_check, ComplianceWindows, DisplacementMode, EstimateReport, MaterialParams};
use crate::error::{Error, Result};
use crate::grid::{read_grid, write_grid, PayloadEncoding, Point, ScalarGrid};
use crate::mesh::export_mesh;
use crate::metrics::{convergence_study, write_convergence_csv, ConvergenceConfig};
use crate::pipeline::{
    estimate_curvature, estimate_modulus, reconstruct_pseudo, site_records, CurvatureChoice, GridSpec, PipelineConfig,
};
use crate::recon::{read_probe_file, write_probe_file};
use crate::reinit::{reinitialize, ReinitConfig};
use crate::sim::{campaign_entries, simulate_campaign, CampaignConfig, ShapeSpec, RNG_ALGORITHM};

#[derive(Debug, Parser)]
#[command(name = "palpate", version, about = "Shape and stiffness reconstruction from surface probes")]
struct Cli {
    /// More log output (repeatable); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a probe campaign on an analytic shape.
    Simulate(SimulateArgs),
    /// Reconstruct the undeformed signed distance field from a probe file.
    Reconstruct(ReconstructArgs),
    /// Pooled two-point Young's modulus estimate.
    EstimateModulus(EstimateModulusArgs),
    /// Young's modulus and curvature from compliance changes across forces.
    EstimateKappa(EstimateKappaArgs),
    /// Reinitialize a grid into a signed distance field.
    Reinit(ReinitArgs),
    /// Hausdorff convergence study over campaign sizes.
    Convergence(ConvergenceArgs),
    /// Triangulate the zero level set of a grid as OBJ.
    ExportMesh(ExportMeshArgs),
    /// Compare the contact time with the elastic settling time.
    CheckSteadyState(SteadyStateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ShapeKind {
    Sphere,
    Plane,
    Ellipsoid,
}

#[derive(Debug, Args)]
struct ShapeArgs {
    #[arg(long, value_enum, default_value = "sphere")]
    shape: ShapeKind,
    /// Sphere or ellipsoid center, or a point on the plane (x,y,z), m.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0,0,0")]
    center: Vec<f64>,
    /// Sphere radius, m.
    #[arg(long, default_value_t = 0.1)]
    radius: f64,
    /// Ellipsoid semi-axes (a,b,c), m.
    #[arg(long, value_delimiter = ',')]
    semi_axes: Option<Vec<f64>>,
    /// Plane outward normal (x,y,z).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    normal: Option<Vec<f64>>,
    /// Half-width of the sampled plane patch, m.
    #[arg(long, default_value_t = 0.1)]
    half_extent: f64,
}

#[derive(Debug, Args)]
struct MaterialArgs {
    /// Young's modulus, Pa.
    #[arg(long = "E", default_value_t = 8000.0)]
    youngs: f64,
    /// Poisson's ratio.
    #[arg(long, default_value_t = 0.45)]
    nu: f64,
}

#[derive(Debug, Args)]
struct CampaignArgs {
    /// Forces applied at every site, N.
    #[arg(long, value_delimiter = ',', default_value = "3,4.5")]
    forces: Vec<f64>,
    /// Punch radius, m.
    #[arg(long, default_value_t = 0.01)]
    punch_radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    material: MaterialArgs,
    #[command(flatten)]
    campaign: CampaignArgs,
    /// Number of probe sites.
    #[arg(long, default_value_t = 500)]
    samples: usize,
    /// Noise standard deviation (m on positions, unitless on normals).
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Probe file to write.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArgs,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Nodes per axis of the cube grid.
    #[arg(long, default_value_t = 96)]
    grid_n: usize,
    /// Cube side, m; omitted sizes the grid around the probes.
    #[arg(long)]
    grid_side: Option<f64>,
    /// Cube center (x,y,z), m; used with --grid-side.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0,0,0")]
    grid_center: Vec<f64>,
}

#[derive(Debug, Args)]
struct ReinitFlags {
    /// Eikonal residual target.
    #[arg(long, default_value_t = 1e-2)]
    epsilon: f64,
    /// Pseudo-time step, m (default h/2).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    /// Restrict updates to |phi| below this width, m.
    #[arg(long)]
    band_width: Option<f64>,
}

impl ReinitFlags {
    fn config(&self) -> ReinitConfig {
        ReinitConfig {
            epsilon: self.epsilon,
            dt: self.dt,
            max_iterations: self.max_iterations,
            band_width: self.band_width,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Encoding {
    /// Raw doubles in a sibling `.bin` file.
    File,
    /// Base64 inside the header.
    Base64,
}

impl From<Encoding> for PayloadEncoding {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::File => PayloadEncoding::SiblingFile,
            Encoding::Base64 => PayloadEncoding::Base64,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Displacement {
    Norm,
    Projected,
}

impl From<Displacement> for DisplacementMode {
    fn from(d: Displacement) -> Self {
        match d {
            Displacement::Norm => DisplacementMode::Norm,
            Displacement::Projected => DisplacementMode::Projected,
        }
    }
}

#[derive(Debug, Args)]
struct ManifestArgs {
    /// Manifest path (default: the output path with `.manifest.toml` appended).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long)]
    probes: PathBuf,
    /// Grid file for the reconstructed field.
    #[arg(long)]
    out: PathBuf,
    /// Report file (default: the output path with `.report.json` appended).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the field before reinitialization.
    #[arg(long)]
    pseudo_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.45)]
    nu: f64,
    /// Curvature used to undeform the probes, 1/m.
    #[arg(long, conflicts_with = "estimate_kappa")]
    kappa: Option<f64>,
    /// Estimate the curvature with the compliance method.
    #[arg(long)]
    estimate_kappa: bool,
    #[arg(long, value_enum, default_value = "norm")]
    displacement: Displacement,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    reinit: ReinitFlags,
    #[arg(long, default_value_t = 1e-8)]
    poisson_tolerance: f64,
    #[arg(long, value_enum, default_value = "file")]
    encoding: Encoding,
    #[command(flatten)]
    manifest: ManifestArgs,
}

#[derive(Debug, Args)]
struct EstimateModulusArgs {
    #[arg(long)]
    probes: PathBuf,
    #[arg(long, default_value_t = 0.45)]
    nu: f64,
    #[arg(long, value_enum, default_value = "norm")]
    displacement: Displacement,
    /// Report file (JSON).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArgs,
}

fn parse_range(s: &str) -> std::result::Result<Range<usize>, String> {
    let (a, b) = s.split_once("..").ok_or("expected START..END")?;
    let a: usize = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(a..b)
}

#[derive(Debug, Args)]
struct EstimateKappaArgs {
    #[arg(long)]
    probes: PathBuf,
    #[arg(long, default_value_t = 0.45)]
    nu: f64,
    /// Low-force window as interval indices START..END (default: first interval).
    #[arg(long, value_parser = parse_range)]
    low: Option<Range<usize>>,
    /// High-force window as interval indices START..END (default: last interval).
    #[arg(long, value_parser = parse_range)]
    high: Option<Range<usize>>,
    /// Report file (JSON).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArgs,
}

#[derive(Debug, Args)]
struct ReinitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    reinit: ReinitFlags,
    #[arg(long, value_enum, default_value = "file")]
    encoding: Encoding,
    #[command(flatten)]
    manifest: ManifestArgs,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    material: MaterialArgs,
    #[command(flatten)]
    campaign: CampaignArgs,
    /// Campaign sizes, increasing.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200,400")]
    counts: Vec<usize>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    reinit: ReinitFlags,
    /// Fill the runtime column (makes the CSV run-dependent).
    #[arg(long)]
    with_runtime: bool,
    /// CSV file to write.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArgs,
}

#[derive(Debug, Args)]
struct ExportMeshArgs {
    #[arg(long)]
    input: PathBuf,
    /// OBJ file to write.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArgs,
}

#[derive(Debug, Args)]
struct SteadyStateArgs {
    /// Young's modulus, Pa.
    #[arg(long = "E")]
    youngs: f64,
    /// Density, kg/m^3.
    #[arg(long)]
    rho: f64,
    /// Characteristic length, m.
    #[arg(long)]
    ell: f64,
    /// Contact time, s.
    #[arg(long = "Tc")]
    contact_time: f64,
    #[arg(long, default_value_t = 0.45)]
    nu: f64,
    /// Manifest path; nothing is written when omitted.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    argv: Vec<String>,
    outputs: Vec<String>,
    config: &'a T,
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

struct Run {
    argv: Vec<String>,
}

impl Run {
    fn write_manifest<T: Serialize>(
        &self,
        command: &'static str,
        path: &Path,
        outputs: &[&Path],
        config: &T,
    ) -> Result<()> {
        let manifest = Manifest {
            tool: "palpate",
            version: env!("CARGO_PKG_VERSION"),
            command,
            argv: self.argv.clone(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            config,
        };
        let text = toml::to_string(&manifest).map_err(|e| Error::format(path, e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn manifest_path(args: &ManifestArgs, out: &Path) -> PathBuf {
    args.manifest.clone().unwrap_or_else(|| with_suffix(out, ".manifest.toml"))
}

fn point(v: &[f64], what: &str) -> Result<Point> {
    match v {
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(Error::invalid(format!("{what} needs three comma-separated values"))),
    }
}

impl ShapeArgs {
    fn spec(&self) -> Result<ShapeSpec> {
        let center = point(&self.center, "--center")?;
        let shape = match self.shape {
            ShapeKind::Sphere => ShapeSpec::Sphere {
                center,
                radius: self.radius,
            },
            ShapeKind::Ellipsoid => ShapeSpec::Ellipsoid {
                center,
                semi_axes: point(
                    self.semi_axes
                        .as_deref()
                        .ok_or_else(|| Error::invalid("ellipsoid needs --semi-axes"))?,
                    "--semi-axes",
                )?,
            },
            ShapeKind::Plane => ShapeSpec::Plane {
                point: center,
                normal: point(
                    self.normal.as_deref().ok_or_else(|| Error::invalid("plane needs --normal"))?,
                    "--normal",
                )?,
                half_extent: self.half_extent,
            },
        };
        shape.validate()?;
        Ok(shape)
    }
}

impl MaterialArgs {
    fn params(&self) -> Result<MaterialParams> {
        MaterialParams::new(self.youngs, self.nu)
    }
}

impl GridArgs {
    fn spec(&self) -> Result<Option<GridSpec>> {
        Ok(match self.grid_side {
            Some(side) => Some(GridSpec {
                n: self.grid_n,
                center: point(&self.grid_center, "--grid-center")?,
                side,
            }),
            None => None,
        })
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn print_estimate(report: &EstimateReport) {
    println!(
        "E = {:.1} Pa (std {:.1} Pa over {} samples)",
        report.youngs, report.std, report.sample_count
    );
    if let Some(k) = report.kappa {
        println!("kappa = {k:.4} 1/m");
    }
    for note in &report.notes {
        println!("note: {note}");
    }
}

#[derive(Serialize)]
struct SimulateConfig {
    shape: ShapeSpec,
    material: MaterialParams,
    campaign: CampaignConfig,
    rng: &'static str,
}

fn simulate(run: &Run, a: &SimulateArgs) -> Result<()> {
    let config = SimulateConfig {
        shape: a.shape.spec()?,
        material: a.material.params()?,
        campaign: CampaignConfig {
            n_samples: a.samples,
            forces: a.campaign.forces.clone(),
            punch_radius: a.campaign.punch_radius,
            noise_sigma: a.sigma,
            rng_seed: a.campaign.seed,
        },
        rng: RNG_ALGORITHM,
    };
    let sites = simulate_campaign(&config.shape, &config.material, &config.campaign)?;
    let entries = campaign_entries(&sites);
    write_probe_file(&a.out, &entries)?;
    run.write_manifest("simulate", &manifest_path(&a.manifest, &a.out), &[&a.out], &config)?;
    println!("{} probes at {} sites written to {}", entries.len(), sites.len(), a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct ReinitSummary {
    converged: bool,
    iterations: usize,
    residual: f64,
}

#[derive(Serialize)]
struct ReconstructReport {
    estimate: EstimateReport,
    grid: GridSpec,
    reinit: ReinitSummary,
}

#[derive(Serialize)]
struct ReconstructConfig {
    probes: String,
    pipeline: PipelineConfig,
}

fn write_field(path: &Path, field: &ScalarGrid, encoding: Encoding) -> Result<()> {
    write_grid(path, field, encoding.into())
}

fn reconstruct(run: &Run, a: &ReconstructArgs) -> Result<()> {
    let curvature = match (a.kappa, a.estimate_kappa) {
        (_, true) => CurvatureChoice::Estimate,
        (Some(k), false) => CurvatureChoice::Constant(k),
        (None, false) => CurvatureChoice::default(),
    };
    let pipeline = PipelineConfig {
        grid: a.grid.spec()?,
        auto_grid_nodes: a.grid.grid_n,
        poisson: crate::recon::PoissonConfig {
            tolerance: a.poisson_tolerance,
            ..Default::default()
        },
        reinit: a.reinit.config(),
        poisson_ratio: a.nu,
        curvature,
        displacement: a.displacement.into(),
        ..Default::default()
    };
    let entries = read_probe_file(&a.probes)?;
    let config = ReconstructConfig {
        probes: a.probes.display().to_string(),
        pipeline,
    };
    let report_path = a.report.clone().unwrap_or_else(|| with_suffix(&a.out, ".report.json"));
    let mut outputs: Vec<&Path> = vec![&a.out, &report_path];
    if let Some(p) = &a.pseudo_out {
        outputs.push(p);
    }
    run.write_manifest("reconstruct", &manifest_path(&a.manifest, &a.out), &outputs, &config)?;

    let pre = reconstruct_pseudo(&entries, &config.pipeline)?;
    if let Some(p) = &a.pseudo_out {
        write_field(p, &pre.pseudo, a.encoding)?;
    }
    // a stalled run still writes its best iterate before reporting failure
    let (outcome, failure) = match reinitialize(&pre.pseudo, &config.pipeline.reinit) {
        Ok(out) => (out, None),
        Err(Error::ReinitStalled(best)) => {
            let e = Error::ReinitStalled(best.clone()).in_stage("reinit");
            (*best, Some(e))
        }
        Err(e) => return Err(e.in_stage("reinit")),
    };
    write_field(&a.out, &outcome.field, a.encoding)?;
    let report = ReconstructReport {
        estimate: pre.report,
        grid: pre.grid,
        reinit: ReinitSummary {
            converged: failure.is_none(),
            iterations: outcome.iterations,
            residual: outcome.final_residual,
        },
    };
    write_json(&report_path, &report)?;
    print_estimate(&report.estimate);
    println!(
        "reinit: {} iterations, residual {:.3e}",
        report.reinit.iterations, report.reinit.residual
    );
    match failure {
        None => Ok(()),
        Some(e) => Err(e),
    }
}

fn estimate_modulus_cmd(run: &Run, a: &EstimateModulusArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config {
        probes: String,
        poisson_ratio: f64,
        displacement: DisplacementMode,
    }
    let config = Config {
        probes: a.probes.display().to_string(),
        poisson_ratio: a.nu,
        displacement: a.displacement.into(),
    };
    run.write_manifest("estimate-modulus", &manifest_path(&a.manifest, &a.out), &[&a.out], &config)?;
    let sites = site_records(&read_probe_file(&a.probes)?)?;
    let report = estimate_modulus(&sites, a.nu, config.displacement)?;
    write_json(&a.out, &report)?;
    print_estimate(&report);
    Ok(())
}

fn estimate_kappa_cmd(run: &Run, a: &EstimateKappaArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config {
        probes: String,
        poisson_ratio: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        low_window: Option<[usize; 2]>,
        #[serde(skip_serializing_if = "Option::is_none")]
        high_window: Option<[usize; 2]>,
    }
    let config = Config {
        probes: a.probes.display().to_string(),
        poisson_ratio: a.nu,
        low_window: a.low.as_ref().map(|r| [r.start, r.end]),
        high_window: a.high.as_ref().map(|r| [r.start, r.end]),
    };
    run.write_manifest("estimate-kappa", &manifest_path(&a.manifest, &a.out), &[&a.out], &config)?;
    let sites = site_records(&read_probe_file(&a.probes)?)?;
    let windows = ComplianceWindows {
        low: a.low.clone(),
        high: a.high.clone(),
    };
    let report = estimate_curvature(&sites, a.nu, &windows)?;
    write_json(&a.out, &report)?;
    print_estimate(&report);
    Ok(())
}

fn reinit_cmd(run: &Run, a: &ReinitArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config {
        input: String,
        reinit: ReinitConfig,
    }
    let config = Config {
        input: a.input.display().to_string(),
        reinit: a.reinit.config(),
    };
    run.write_manifest("reinit", &manifest_path(&a.manifest, &a.out), &[&a.out], &config)?;
    let phi = read_grid(&a.input)?;
    match reinitialize(&phi, &config.reinit) {
        Ok(out) => {
            write_field(&a.out, &out.field, a.encoding)?;
            println!("converged in {} iterations, residual {:.3e}", out.iterations, out.final_residual);
            Ok(())
        }
        Err(Error::ReinitStalled(best)) => {
            write_field(&a.out, &best.field, a.encoding)?;
            Err(Error::ReinitStalled(best).in_stage("reinit"))
        }
        Err(e) => Err(e.in_stage("reinit")),
    }
}

fn convergence_cmd(run: &Run, a: &ConvergenceArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config {
        shape: ShapeSpec,
        material: MaterialParams,
        study: ConvergenceConfig,
        with_runtime: bool,
        rng: &'static str,
    }
    let grid = a
        .grid
        .spec()?
        .ok_or_else(|| Error::invalid("convergence needs --grid-side"))?;
    let config = Config {
        shape: a.shape.spec()?,
        material: a.material.params()?,
        study: ConvergenceConfig {
            sample_counts: a.counts.clone(),
            campaign: CampaignConfig {
                n_samples: a.counts.last().copied().unwrap_or(0),
                forces: a.campaign.forces.clone(),
                punch_radius: a.campaign.punch_radius,
                noise_sigma: 0.0,
                rng_seed: a.campaign.seed,
            },
            pipeline: PipelineConfig {
                grid: Some(grid),
                reinit: a.reinit.config(),
                poisson_ratio: a.material.nu,
                ..Default::default()
            },
        },
        with_runtime: a.with_runtime,
        rng: RNG_ALGORITHM,
    };
    run.write_manifest("convergence", &manifest_path(&a.manifest, &a.out), &[&a.out], &config)?;
    let rows = convergence_study(&config.shape, &config.material, &config.study)?;
    write_convergence_csv(&a.out, &rows, a.with_runtime)?;
    for r in &rows {
        println!("N = {:4}  d_N = {:.4e} m  eikonal max {:.3e}", r.n, r.d_n, r.eikonal_max);
    }
    Ok(())
}

fn export_mesh_cmd(run: &Run, a: &ExportMeshArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config {
        input: String,
    }
    let config = Config {
        input: a.input.display().to_string(),
    };
    run.write_manifest("export-mesh", &manifest_path(&a.manifest, &a.out), &[&a.out], &config)?;
    let mesh = export_mesh(&read_grid(&a.input)?, &a.out)?;
    println!(
        "{} vertices, {} triangles written to {}",
        mesh.vertices.len(),
        mesh.triangles.len(),
        a.out.display()
    );
    Ok(())
}

fn steady_state_cmd(run: &Run, a: &SteadyStateArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config {
        material: MaterialParams,
        ell: f64,
        contact_time: f64,
    }
    let config = Config {
        material: MaterialParams::new(a.youngs, a.nu)?.with_density(a.rho)?,
        ell: a.ell,
        contact_time: a.contact_time,
    };
    if let Some(path) = &a.manifest {
        run.write_manifest("check-steady-state", path, &[], &config)?;
    }
    let check = settling_time_check(&config.material, config.ell, config.contact_time)?;
    println!("T_e = {:.4} ms", 1e3 * check.settling_time);
    println!("T_c = {:.4} ms", 1e3 * check.contact_time);
    println!("verdict: {}", if check.steady { "ok" } else { "too short" });
    Ok(())
}

fn dispatch(run: &Run, command: &Command) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(run, a),
        Command::Reconstruct(a) => reconstruct(run, a),
        Command::EstimateModulus(a) => estimate_modulus_cmd(run, a),
        Command::EstimateKappa(a) => estimate_kappa_cmd(run, a),
        Command::Reinit(a) => reinit_cmd(run, a),
        Command::Convergence(a) => convergence_cmd(run, a),
        Command::ExportMesh(a) => export_mesh_cmd(run, a),
        Command::CheckSteadyState(a) => steady_state_cmd(run, a),
    }
}

/// Exit code for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let run = Run {
        // the program name is fixed so manifests do not depend on the
        // install location
        argv: std::iter::once("palpate".to_string())
            .chain(argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()))
            .collect(),
    };
    match dispatch(&run, &cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
