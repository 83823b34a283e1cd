//! End-to-end reconstruction of the undeformed shape from a probe campaign.
//!
//! 1. Per site, Young's modulus from the two highest forces; pooled by mean.
//! 2. Per probe, the undeformed distance value at the contact point from the
//!    pooled modulus and the curvature model.
//! 3. Constrained Poisson solve for a pseudo distance field.
//! 4. Reinitialization to a signed distance field.

use serde::{Deserialize, Serialize};

use crate::contact::{
    estimate_e_kappa_compliance, estimate_youngs_two_point, mean_std, plane_strain_modulus, undeformed_sdf_value,
    ComplianceWindows, CurvatureModel, DisplacementMode, EstimateReport, ProbeRecord,
};
use crate::error::{Error, Result};
use crate::grid::{GridGeometry, Point, ScalarGrid};
use crate::recon::{group_sites, reconstruct_pseudo_sdf, Pose, PoseSet, PoissonConfig, ProbeEntry};
use crate::reinit::{reinitialize, ReinitConfig};

/// Cube grid of `n` nodes per axis and side `side` meters around `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub center: Point,
    pub side: f64,
}

impl GridSpec {
    pub fn geometry(&self) -> Result<GridGeometry> {
        if !(self.side > 0.0 && self.side.is_finite()) {
            return Err(Error::invalid("grid side must be positive"));
        }
        GridGeometry::cube(3, self.n, self.center, self.side)
    }

    /// Cube of side `scale` times the largest extent of the bounding box of
    /// `points`, centered on the box.
    pub fn around(points: &[Point], n: usize, scale: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("no points to size the grid"));
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let extent = (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        Ok(GridSpec {
            n,
            center: std::array::from_fn(|a| 0.5 * (lo[a] + hi[a])),
            side: scale * extent,
        })
    }
}

/// Curvature used when converting indentations into distance values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "kebab-case")]
pub enum CurvatureChoice {
    /// A fixed mean curvature, 1/m.
    Constant(f64),
    /// Mean of the per-site compliance-method estimates.
    Estimate,
}

impl Default for CurvatureChoice {
    fn default() -> Self {
        CurvatureChoice::Constant(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Explicit grid; `None` sizes a cube around the probes.
    pub grid: Option<GridSpec>,
    pub auto_grid_nodes: usize,
    /// Side of the automatic grid relative to the probe bounding box.
    pub auto_grid_scale: f64,
    pub poisson: PoissonConfig,
    pub reinit: ReinitConfig,
    /// Known Poisson's ratio of the material.
    pub poisson_ratio: f64,
    pub curvature: CurvatureChoice,
    pub displacement: DisplacementMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            grid: None,
            auto_grid_nodes: 96,
            auto_grid_scale: 1.75,
            poisson: PoissonConfig::default(),
            reinit: ReinitConfig::default(),
            poisson_ratio: 0.45,
            curvature: CurvatureChoice::default(),
            displacement: DisplacementMode::Norm,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.poisson.validate()?;
        plane_strain_modulus(1.0, self.poisson_ratio)?;
        if let CurvatureChoice::Constant(k) = self.curvature {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::invalid("curvature must be >= 0"));
            }
        }
        if !(self.auto_grid_scale > 1.0) {
            return Err(Error::invalid("automatic grid scale must exceed 1"));
        }
        Ok(())
    }
}

/// Probe records grouped by site, each site sorted as given.
pub fn site_records(entries: &[ProbeEntry]) -> Result<Vec<Vec<ProbeRecord>>> {
    group_sites(entries)
        .into_iter()
        .map(|idx| idx.iter().map(|&i| entries[i].record()).collect())
        .collect()
}

/// Per-site two-point modulus from the two highest forces of each site,
/// pooled by mean with an n - 1 standard deviation.
pub fn estimate_modulus(sites: &[Vec<ProbeRecord>], poisson: f64, mode: DisplacementMode) -> Result<EstimateReport> {
    if sites.is_empty() {
        return Err(Error::invalid("no probe sites"));
    }
    let per_site = sites
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if s.len() < 2 {
                return Err(Error::invalid(format!("site {i} has {} force level(s), need 2", s.len())));
            }
            estimate_youngs_two_point(&s[s.len() - 2], &s[s.len() - 1], poisson, mode)
        })
        .collect::<Result<Vec<f64>>>()?;
    EstimateReport::from_samples(per_site)
}

/// Per-site compliance-method estimates pooled by mean. Sites without a
/// regime transition are skipped.
pub fn estimate_curvature(sites: &[Vec<ProbeRecord>], poisson: f64, windows: &ComplianceWindows) -> Result<EstimateReport> {
    let mut kappas = Vec::new();
    let mut youngs = Vec::new();
    let mut skipped = 0usize;
    for s in sites {
        let r = estimate_e_kappa_compliance(s, poisson, windows)?;
        match r.kappa {
            Some(k) => {
                kappas.push(k);
                youngs.push(r.youngs);
            }
            None => skipped += 1,
        }
    }
    if kappas.is_empty() {
        return Err(Error::invalid("no site shows a regime transition; curvature not estimable"));
    }
    let mut report = EstimateReport::from_samples(youngs)?;
    report.kappa = Some(mean_std(&kappas).0);
    if skipped > 0 {
        report.notes.push(format!("{skipped} site(s) without a regime transition skipped"));
    }
    Ok(report)
}

/// Output of the stages before reinitialization.
#[derive(Debug, Clone)]
pub struct PseudoReconstruction {
    /// Field after the Poisson stage.
    pub pseudo: ScalarGrid,
    pub report: EstimateReport,
    pub grid: GridSpec,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Reinitialized signed distance field of the undeformed shape.
    pub field: ScalarGrid,
    /// Field after the Poisson stage, before reinitialization.
    pub pseudo: ScalarGrid,
    pub report: EstimateReport,
    pub grid: GridSpec,
    pub reinit_iterations: usize,
    pub reinit_residual: f64,
}

/// Runs estimation, undeformation and the Poisson solve.
pub fn reconstruct_pseudo(entries: &[ProbeEntry], config: &PipelineConfig) -> Result<PseudoReconstruction> {
    config.validate()?;
    let sites = site_records(entries).map_err(|e| e.in_stage("estimate"))?;
    let mut report =
        estimate_modulus(&sites, config.poisson_ratio, config.displacement).map_err(|e| e.in_stage("estimate"))?;
    let estar = plane_strain_modulus(report.youngs, config.poisson_ratio).map_err(|e| e.in_stage("estimate"))?;
    let kappa = match config.curvature {
        CurvatureChoice::Constant(k) => k,
        CurvatureChoice::Estimate => estimate_curvature(&sites, config.poisson_ratio, &ComplianceWindows::default())
            .map_err(|e| e.in_stage("estimate"))?
            .kappa
            .expect("estimate_curvature reports a curvature"),
    };
    if kappa != 0.0 {
        report.kappa = Some(kappa);
    }
    let model = CurvatureModel::Constant(kappa);

    let records: Vec<ProbeRecord> = sites.into_iter().flatten().collect();
    let values = records
        .iter()
        .map(|r| undeformed_sdf_value(r.force, estar, r.punch_radius, &model))
        .collect::<Result<Vec<f64>>>()
        .map_err(|e| e.in_stage("undeform"))?;
    let poses = records
        .iter()
        .map(|r| Pose::new(r.p, r.q))
        .collect::<Result<Vec<_>>>()
        .and_then(PoseSet::new)
        .map_err(|e| e.in_stage("poisson"))?;

    let grid = match &config.grid {
        Some(g) => g.clone(),
        None => GridSpec::around(&poses.positions(), config.auto_grid_nodes, config.auto_grid_scale)?,
    };
    let pseudo = reconstruct_pseudo_sdf(&poses, Some(&values), &grid.geometry()?, &config.poisson)
        .map_err(|e| e.in_stage("poisson"))?;
    Ok(PseudoReconstruction { pseudo, report, grid })
}

/// Runs the full pipeline on a probe campaign. A stalled reinitialization
/// is an error; [`Error::best_iterate`] recovers the best field from it.
pub fn reconstruct_undeformed(entries: &[ProbeEntry], config: &PipelineConfig) -> Result<Reconstruction> {
    let pre = reconstruct_pseudo(entries, config)?;
    let out = reinitialize(&pre.pseudo, &config.reinit).map_err(|e| e.in_stage("reinit"))?;
    Ok(Reconstruction {
        field: out.field,
        pseudo: pre.pseudo,
        report: pre.report,
        grid: pre.grid,
        reinit_iterations: out.iterations,
        reinit_residual: out.final_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(p: Point, force: f64, site: usize) -> ProbeEntry {
        ProbeEntry {
            p,
            q: [0.0, 0.0, -1.0],
            force: Some(force),
            punch_radius: Some(0.01),
            value: None,
            site: Some(site),
        }
    }

    #[test]
    fn single_force_level_is_rejected() {
        let entries = [entry([0.0; 3], 3.0, 0), entry([0.1, 0.0, 0.0], 3.0, 1)];
        let err = reconstruct_undeformed(&entries, &PipelineConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "estimate", .. }));
        assert!(!err.is_numerical());
    }

    #[test]
    fn modulus_uses_last_two_forces() {
        let es = 8000.0 / (1.0 - 0.45f64 * 0.45);
        let d = |f: f64| f / (2.0 * es * 0.01);
        let site = vec![
            entry([0.0, 0.0, 5.0], 0.5, 0).record().unwrap(),
            entry([0.0, 0.0, -d(3.0)], 3.0, 0).record().unwrap(),
            entry([0.0, 0.0, -d(4.5)], 4.5, 0).record().unwrap(),
        ];
        let r = estimate_modulus(&[site.clone(), site], 0.45, DisplacementMode::Norm).unwrap();
        assert!((r.youngs - 8000.0).abs() < 1e-9);
        assert_eq!(r.std, 0.0);
        assert_eq!(r.sample_count, 2);
    }

    #[test]
    fn automatic_grid_is_centered() {
        let g = GridSpec::around(&[[0.0, 0.0, 0.0], [0.2, 0.1, 0.0]], 20, 1.75).unwrap();
        assert_eq!(g.center, [0.1, 0.05, 0.0]);
        assert!((g.side - 0.35).abs() < 1e-15);
    }
}
