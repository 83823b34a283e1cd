//! Level-set comparison: zero-crossing clouds, Hausdorff distance, eikonal
//! residual and convergence studies over the number of probe sites.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contact::MaterialParams;
use crate::error::{Error, Result};
use crate::grid::{dist2, Point, ScalarGrid};
use crate::pipeline::{reconstruct_undeformed, GridSpec, PipelineConfig};
use crate::reinit::residual_stats;
use crate::sim::{campaign_entries, simulate_campaign, CampaignConfig, ShapeSpec};

/// Zero crossings of a grid field.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetPointCloud {
    points: Vec<Point>,
}

impl LevelSetPointCloud {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("empty point cloud"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point cloud has non-finite coordinates"));
        }
        Ok(LevelSetPointCloud { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Nodes where the field is exactly zero, then the linear root on every
/// grid edge whose endpoint values have strictly opposite signs.
pub fn extract_zero_crossings(f: &ScalarGrid) -> Result<LevelSetPointCloud> {
    let geom = f.geometry();
    let v = f.values();
    let nd = geom.ndim();
    let strides = geom.strides();
    let h = geom.spacing();
    let per_node: Vec<Vec<Point>> = (0..geom.len())
        .into_par_iter()
        .map(|i| {
            let ijk = geom.coords(i);
            let x = geom.position(ijk);
            let mut out = Vec::new();
            if v[i] == 0.0 {
                out.push(x);
            }
            for a in 0..nd {
                if ijk[a] + 1 >= geom.dims()[a] {
                    continue;
                }
                let (fa, fb) = (v[i], v[i + strides[a]]);
                if fa * fb < 0.0 {
                    let mut p = x;
                    p[a] += h * fa / (fa - fb);
                    out.push(p);
                }
            }
            out
        })
        .collect();
    let points: Vec<Point> = per_node.into_iter().flatten().collect();
    if points.is_empty() {
        return Err(Error::NoZeroCrossing);
    }
    LevelSetPointCloud::new(points)
}

/// Uniform bucket grid over a point set for exact nearest-neighbour search.
struct BucketIndex<'a> {
    points: &'a [Point],
    lo: Point,
    cell: f64,
    dims: [usize; 3],
    start: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> BucketIndex<'a> {
    fn new(points: &'a [Point]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let extent = (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        let per_axis = (points.len() as f64).cbrt().ceil().max(1.0);
        let cell = if extent > 0.0 { extent / per_axis } else { 1.0 };
        let mut dims = [1usize; 3];
        for a in 0..3 {
            dims[a] = ((hi[a] - lo[a]) / cell).floor() as usize + 1;
        }
        let mut index = BucketIndex {
            points,
            lo,
            cell,
            dims,
            start: Vec::new(),
            order: Vec::new(),
        };
        let ncells = dims[0] * dims[1] * dims[2];
        let cells: Vec<usize> = points.iter().map(|p| index.flat(index.cell_of(p))).collect();
        let mut start = vec![0usize; ncells + 1];
        for &c in &cells {
            start[c + 1] += 1;
        }
        for c in 0..ncells {
            start[c + 1] += start[c];
        }
        let mut fill = start.clone();
        let mut order = vec![0usize; points.len()];
        for (i, &c) in cells.iter().enumerate() {
            order[fill[c]] = i;
            fill[c] += 1;
        }
        index.start = start;
        index.order = order;
        index
    }

    fn cell_of(&self, p: &Point) -> [usize; 3] {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let t = ((p[a] - self.lo[a]) / self.cell).floor();
            c[a] = t.clamp(0.0, (self.dims[a] - 1) as f64) as usize;
        }
        c
    }

    fn flat(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    /// Squared distance from `x` to the nearest indexed point.
    fn nearest2(&self, x: &Point) -> f64 {
        let c = self.cell_of(x);
        let max_ring = self.dims.iter().copied().max().unwrap_or(1);
        let mut best = f64::INFINITY;
        for r in 0..=max_ring {
            let lo: [usize; 3] = std::array::from_fn(|a| c[a].saturating_sub(r));
            let hi: [usize; 3] = std::array::from_fn(|a| (c[a] + r).min(self.dims[a] - 1));
            for i in lo[0]..=hi[0] {
                for j in lo[1]..=hi[1] {
                    for k in lo[2]..=hi[2] {
                        let ring = [i.abs_diff(c[0]), j.abs_diff(c[1]), k.abs_diff(c[2])];
                        if ring.into_iter().max() != Some(r) {
                            continue;
                        }
                        let cell = self.flat([i, j, k]);
                        for &p in &self.order[self.start[cell]..self.start[cell + 1]] {
                            best = best.min(dist2(x, &self.points[p]));
                        }
                    }
                }
            }
            // every point in ring r + 1 or beyond is at least r cells away
            let reach = r as f64 * self.cell;
            if best <= reach * reach {
                break;
            }
        }
        best
    }
}

fn directed2(from: &[Point], to: &BucketIndex<'_>) -> f64 {
    let per_point: Vec<f64> = from.par_iter().map(|x| to.nearest2(x)).collect();
    per_point.into_iter().fold(0.0, f64::max)
}

/// Two-sided Hausdorff distance between point clouds.
pub fn hausdorff(a: &LevelSetPointCloud, b: &LevelSetPointCloud) -> f64 {
    let ia = BucketIndex::new(a.points());
    let ib = BucketIndex::new(b.points());
    directed2(a.points(), &ib).max(directed2(b.points(), &ia)).sqrt()
}

/// Reference O(n m) Hausdorff distance.
pub fn hausdorff_brute_force(a: &LevelSetPointCloud, b: &LevelSetPointCloud) -> f64 {
    let directed = |from: &[Point], to: &[Point]| {
        from.iter()
            .map(|x| to.iter().map(|y| dist2(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a.points(), b.points())
        .max(directed(b.points(), a.points()))
        .sqrt()
}

/// Max and mean of `|G(f) - 1|` over interior nodes outside the skeleton
/// band, with the Godunov norm upwinded by the sign of `f`.
pub fn eikonal_residual(f: &ScalarGrid) -> (f64, f64) {
    residual_stats(f, f.values(), None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub d_n: f64,
    pub eikonal_max: f64,
    pub eikonal_mean: f64,
    pub runtime_s: f64,
}

/// Settings for [`convergence_study`]. The campaign template supplies forces,
/// punch radius and seed; its sample count and noise are overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub sample_counts: Vec<usize>,
    pub campaign: CampaignConfig,
    pub pipeline: PipelineConfig,
}

/// Reconstructs the shape from noiseless campaigns of increasing size and
/// reports the Hausdorff distance between reconstructed and true zero sets.
///
/// Every row uses the same seed, so each campaign extends the previous one
/// (site streams depend only on the seed and the site index). When
/// reinitialization stalls, the row is computed from its best iterate.
pub fn convergence_study(
    shape: &ShapeSpec,
    material: &MaterialParams,
    config: &ConvergenceConfig,
) -> Result<Vec<ConvergenceRow>> {
    let counts = &config.sample_counts;
    if counts.is_empty() || counts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("sample counts must be strictly increasing"));
    }
    let grid = config
        .pipeline
        .grid
        .clone()
        .ok_or_else(|| Error::invalid("convergence study needs an explicit grid"))?;
    let geometry = GridSpec::geometry(&grid)?;
    let truth = extract_zero_crossings(&geometry.sample(|x| shape.sdf(x)))?;
    let mut rows = Vec::with_capacity(counts.len());
    for &n in counts {
        let started = Instant::now();
        let campaign = CampaignConfig {
            n_samples: n,
            noise_sigma: 0.0,
            ..config.campaign.clone()
        };
        let entries = campaign_entries(&simulate_campaign(shape, material, &campaign)?);
        // a stalled reinitialization still yields a usable zero set; its
        // residual shows up in the eikonal columns
        let field = match reconstruct_undeformed(&entries, &config.pipeline) {
            Ok(out) => out.field,
            Err(e) => match e.best_iterate() {
                Some(best) => {
                    log::warn!("N = {n}: {e}; using the best iterate");
                    best.field.clone()
                }
                None => return Err(e),
            },
        };
        let d_n = hausdorff(&extract_zero_crossings(&field)?, &truth);
        let (eikonal_max, eikonal_mean) = eikonal_residual(&field);
        let row = ConvergenceRow {
            n,
            d_n,
            eikonal_max,
            eikonal_mean,
            runtime_s: started.elapsed().as_secs_f64(),
        };
        log::info!("N = {n}: d_N = {d_n:.4e} m, eikonal max {eikonal_max:.3e}");
        rows.push(row);
    }
    Ok(rows)
}

/// CSV with columns `N,d_N_m,eikonal_max,eikonal_mean,runtime_s`. The
/// runtime column is left empty unless `with_runtime` is set, so repeated
/// runs produce identical files.
pub fn convergence_csv(rows: &[ConvergenceRow], with_runtime: bool) -> String {
    let mut out = String::from("N,d_N_m,eikonal_max,eikonal_mean,runtime_s\n");
    for r in rows {
        let runtime = if with_runtime { format!("{}", r.runtime_s) } else { String::new() };
        writeln!(out, "{},{},{},{},{}", r.n, r.d_n, r.eikonal_max, r.eikonal_mean, runtime).expect("write to String");
    }
    out
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow], with_runtime: bool) -> Result<()> {
    std::fs::write(path, convergence_csv(rows, with_runtime)).map_err(|e| Error::io(path, e))
}
