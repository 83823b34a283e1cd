//! Pseudo distance field from oriented surface samples.
//!
//! Poses carry inward normals `q`. Internally the outward normal `n = -q` is
//! interpolated to every node and a field `phi` with `grad phi ~ n` is found
//! by solving `lap phi = div n` with point constraints `phi(p_i) = v_i`
//! enforced by a quadratic penalty on the nearest node. The outer boundary is
//! held at an enclosing sphere's distance field, so the result is negative
//! inside the sampled surface.

mod cg;
mod hull;
pub mod io;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{dist, dist2, divergence, norm, sample_trilinear, GridGeometry, Point, ScalarGrid, VectorGrid};

pub use io::{group_sites, read_probe_file, write_probe_file, ProbeEntry};

/// Minimum clearance between the pose bounding box and the grid boundary,
/// as a fraction of the pose extent along each axis.
pub const DOMAIN_MARGIN: f64 = 0.15;

/// Minimum distance between two pose positions, m.
pub const MIN_SEPARATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub p: Point,
    /// Inward unit normal.
    pub q: Point,
}

impl Pose {
    pub fn new(p: Point, q: Point) -> Result<Self> {
        if p.iter().chain(&q).any(|v| !v.is_finite()) {
            return Err(Error::invalid("pose has non-finite components"));
        }
        if (norm(&q) - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("pose normal has length {}", norm(&q))));
        }
        Ok(Pose { p, q })
    }

    pub fn outward(&self) -> Point {
        [-self.q[0], -self.q[1], -self.q[2]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseSet {
    poses: Vec<Pose>,
}

impl PoseSet {
    pub fn new(poses: Vec<Pose>) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::invalid("empty pose set"));
        }
        let min2 = MIN_SEPARATION * MIN_SEPARATION;
        for (i, a) in poses.iter().enumerate() {
            if let Some(j) = poses[i + 1..].iter().position(|b| dist2(&a.p, &b.p) < min2) {
                return Err(Error::invalid(format!(
                    "poses {i} and {} are closer than {MIN_SEPARATION} m",
                    i + 1 + j
                )));
            }
        }
        Ok(PoseSet { poses })
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.poses.iter().map(|p| p.p).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletConstraint {
    pub point: Point,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PoissonConfig {
    /// Relative residual at which the linear solve stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Penalty weight for point constraints, relative to the Laplacian
    /// diagonal scale.
    pub constraint_weight: f64,
    pub idw_power: f64,
}

impl Default for PoissonConfig {
    fn default() -> Self {
        PoissonConfig {
            tolerance: 1e-8,
            max_iterations: 10_000,
            constraint_weight: 1e4,
            idw_power: 2.0,
        }
    }
}

impl PoissonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("Poisson tolerance must be positive"));
        }
        if !(self.constraint_weight > 0.0) {
            return Err(Error::invalid("constraint weight must be positive"));
        }
        if !(self.idw_power > 0.0) {
            return Err(Error::invalid("IDW power must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        Ok(())
    }
}

/// Center and radius of the sphere centered at the centroid of the convex
/// hull vertices with diameter equal to the point set's diameter.
pub fn enclosing_sphere(points: &[Point]) -> Result<(Point, f64)> {
    if points.is_empty() {
        return Err(Error::invalid("no points"));
    }
    let verts = hull::hull_vertices(points);
    let diam = hull::diameter(points, &verts);
    if !(diam > 0.0) {
        return Err(Error::invalid("all points coincide"));
    }
    let mut c = [0.0; 3];
    for &i in &verts {
        for a in 0..3 {
            c[a] += points[i][a];
        }
    }
    let n = verts.len() as f64;
    Ok(([c[0] / n, c[1] / n, c[2] / n], 0.5 * diam))
}

/// `|x - center| - diam / 2` for the enclosing sphere of `points`.
pub fn initial_sphere_guess(points: &[Point], geometry: &GridGeometry) -> Result<ScalarGrid> {
    let (mut center, radius) = enclosing_sphere(points)?;
    for c in center.iter_mut().skip(geometry.ndim()) {
        *c = 0.0;
    }
    Ok(geometry.sample(|x| dist(x, &center) - radius))
}

/// Shepard interpolant of the outward normals at `x`, normalized. Within
/// `snap` of a pose the pose normal is returned exactly; if the weighted sum
/// cancels, the nearest pose normal is used.
pub fn idw_normal(poses: &PoseSet, x: &Point, power: f64, snap: f64) -> Point {
    let mut nearest = (f64::INFINITY, 0usize);
    let mut acc = [0.0; 3];
    let mut wsum = 0.0;
    for (i, pose) in poses.poses().iter().enumerate() {
        let d2 = dist2(x, &pose.p);
        if d2 < nearest.0 {
            nearest = (d2, i);
        }
        let w = if power == 2.0 { 1.0 / d2 } else { d2.powf(-0.5 * power) };
        let n = pose.outward();
        for a in 0..3 {
            acc[a] += w * n[a];
        }
        wsum += w;
    }
    let closest = poses.poses()[nearest.1].outward();
    if nearest.0.sqrt() <= snap || !wsum.is_finite() {
        return closest;
    }
    let len = norm(&acc);
    if len <= 1e-12 * wsum {
        return closest;
    }
    [acc[0] / len, acc[1] / len, acc[2] / len]
}

/// Interpolated outward unit normal field on `geometry`.
pub fn interpolate_normal_field(poses: &PoseSet, geometry: &GridGeometry, config: &PoissonConfig) -> Result<VectorGrid> {
    config.validate()?;
    for pose in poses.poses() {
        if !geometry.contains(&pose.p) {
            return Err(Error::OutOfBounds { point: pose.p });
        }
    }
    let snap = 0.1 * geometry.spacing();
    let nd = geometry.ndim();
    let vectors: Vec<Point> = (0..geometry.len())
        .into_par_iter()
        .map(|idx| idw_normal(poses, &geometry.node_position(idx), config.idw_power, snap))
        .collect();
    let components = (0..nd).map(|a| vectors.iter().map(|v| v[a]).collect()).collect();
    Ok(VectorGrid::from_raw(geometry.clone(), components))
}

/// Checks that the pose bounding box sits at least [`DOMAIN_MARGIN`] of its
/// extent inside the grid on every side.
pub fn check_domain_margin(poses: &PoseSet, geometry: &GridGeometry) -> Result<()> {
    let lo_grid = geometry.origin();
    let hi_grid = geometry.max_corner();
    for a in 0..geometry.ndim() {
        let (lo, hi) = poses
            .poses()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.p[a]), h.max(p.p[a])));
        let margin = DOMAIN_MARGIN * (hi - lo);
        if lo - lo_grid[a] < margin || hi_grid[a] - hi < margin {
            return Err(Error::invalid(format!(
                "grid leaves less than {:.0}% margin around the poses along axis {a}",
                100.0 * DOMAIN_MARGIN
            )));
        }
    }
    Ok(())
}

/// Solves `lap phi = div qhat` on the interior nodes with boundary values
/// taken from `guess`. Each constraint adds the penalty
/// `w (phi(p) - v)^2`, where `phi(p)` is the multilinear interpolant at the
/// constraint point, so the system stays symmetric positive definite.
pub fn solve_poisson(
    qhat: &VectorGrid,
    constraints: &[DirichletConstraint],
    guess: &ScalarGrid,
    config: &PoissonConfig,
) -> Result<ScalarGrid> {
    config.validate()?;
    let geom = qhat.geometry();
    if guess.geometry() != geom {
        return Err(Error::GeometryMismatch);
    }
    if constraints.is_empty() {
        return Err(Error::invalid("at least one point constraint is required"));
    }
    let h = geom.spacing();
    let nd = geom.ndim();
    let strides = geom.strides();
    let n = geom.len();
    let w = config.constraint_weight;

    let interior: Vec<bool> = (0..n).map(|i| geom.is_interior(geom.coords(i))).collect();
    let mut stencils = Vec::with_capacity(constraints.len());
    for c in constraints {
        let stencil = match geom.trilinear_stencil(&c.point) {
            Some(st) if c.value.is_finite() => st,
            _ => return Err(Error::OutOfBounds { point: c.point }),
        };
        if stencil.iter().any(|&(i, w)| w != 0.0 && !interior[i]) {
            return Err(Error::invalid(format!(
                "constraint at {:?} touches the grid boundary",
                c.point
            )));
        }
        stencils.push(stencil);
    }

    let lap_diag = 2.0 * nd as f64;
    let mut diag: Vec<f64> = interior.iter().map(|&inside| if inside { lap_diag } else { 1.0 }).collect();
    let mut penalty_rhs = vec![0.0f64; n];
    for (st, c) in stencils.iter().zip(constraints) {
        for &(i, t) in st {
            diag[i] += w * t * t;
            penalty_rhs[i] += w * t * c.value;
        }
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let div = divergence(qhat);
    let g = guess.values();
    let b: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            if !interior[i] {
                return 0.0;
            }
            let mut rhs = -h * h * div.values()[i] + penalty_rhs[i];
            for &s in &strides[..nd] {
                for j in [i - s, i + s] {
                    if !interior[j] {
                        rhs += g[j];
                    }
                }
            }
            rhs
        })
        .collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        y.par_iter_mut().enumerate().for_each(|(i, y)| {
            if !interior[i] {
                *y = 0.0;
                return;
            }
            let mut acc = lap_diag * x[i];
            for &s in &strides[..nd] {
                if interior[i - s] {
                    acc -= x[i - s];
                }
                if interior[i + s] {
                    acc -= x[i + s];
                }
            }
            *y = acc;
        });
        for st in &stencils {
            let at_point: f64 = st.iter().map(|&(i, t)| t * x[i]).sum();
            for &(i, t) in st {
                y[i] += w * t * at_point;
            }
        }
    };
    let mut x: Vec<f64> = (0..n).map(|i| if interior[i] { g[i] } else { 0.0 }).collect();
    let solved = cg::solve(apply, &inv_diag, &b, &mut x, config.tolerance, config.max_iterations);
    log::debug!(
        "poisson: {} iterations, relative residual {:.3e}",
        solved.iterations,
        solved.relative_residual
    );
    if !solved.converged {
        return Err(Error::NotConverged {
            stage: "poisson",
            iterations: solved.iterations,
            residual: solved.relative_residual,
        });
    }
    for i in 0..n {
        if !interior[i] {
            x[i] = g[i];
        }
    }
    let phi = ScalarGrid::from_raw(geom.clone(), x);
    for c in constraints {
        let miss = (sample_trilinear(&phi, &c.point)? - c.value).abs();
        if miss > h {
            return Err(Error::ConstraintViolated {
                point: c.point,
                miss,
                allowed: h,
            });
        }
    }
    Ok(phi)
}

/// Sphere guess, normal interpolation and the constrained Poisson solve.
/// `values` gives the target field value at each pose (zero when omitted).
pub fn reconstruct_pseudo_sdf(
    poses: &PoseSet,
    values: Option<&[f64]>,
    geometry: &GridGeometry,
    config: &PoissonConfig,
) -> Result<ScalarGrid> {
    let min_poses = geometry.ndim() + 1;
    if poses.len() < min_poses {
        return Err(Error::invalid(format!(
            "{}D reconstruction needs at least {min_poses} poses, got {}",
            geometry.ndim(),
            poses.len()
        )));
    }
    if let Some(v) = values {
        if v.len() != poses.len() {
            return Err(Error::invalid(format!(
                "{} target values for {} poses",
                v.len(),
                poses.len()
            )));
        }
    }
    check_domain_margin(poses, geometry)?;
    let guess = initial_sphere_guess(&poses.positions(), geometry)?;
    let qhat = interpolate_normal_field(poses, geometry, config)?;
    let constraints: Vec<DirichletConstraint> = poses
        .poses()
        .iter()
        .enumerate()
        .map(|(i, pose)| DirichletConstraint {
            point: pose.p,
            value: values.map_or(0.0, |v| v[i]),
        })
        .collect();
    solve_poisson(&qhat, &constraints, &guess, config)
}
