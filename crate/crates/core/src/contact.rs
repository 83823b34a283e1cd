//! Contact mechanics of a rigid flat punch pressed into a linear elastic body.
//!
//! Two regimes are modelled. Below the transition force the contact patch is
//! smaller than the punch and the response follows Hertz, `delta = C F^(2/3)`
//! with `C = (9 kappa / (16 E*^2))^(1/3)`. Above it the whole punch face is in
//! contact and the indentation is the flat-punch compliance plus the mean
//! geometric gap over the punch face,
//! `delta = F / (2 E* R) + <kappa rho^2 / 2>`.
//!
//! Curvatures are mean curvatures in 1/m (the reciprocal radius for a sphere).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dist, dot, norm, sub, Point};

/// Quadrature resolution used when a varying curvature enters
/// [`undeformed_sdf_value`].
pub const DEFAULT_QUADRATURE: usize = 64;

/// Factor by which the contact time must exceed the elastic settling time.
pub const SETTLING_SEPARATION: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Young's modulus, Pa.
    pub youngs: f64,
    /// Poisson's ratio.
    pub poisson: f64,
    /// Density, kg/m^3.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    /// Viscous damping, Pa·s/m^2. Recorded only; no dynamics are simulated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
}

impl MaterialParams {
    pub fn new(youngs: f64, poisson: f64) -> Result<Self> {
        let m = MaterialParams {
            youngs,
            poisson,
            density: None,
            damping: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_density(mut self, density: f64) -> Result<Self> {
        self.density = Some(density);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.youngs > 0.0 && self.youngs.is_finite()) {
            return Err(Error::invalid(format!("Young's modulus must be positive, got {}", self.youngs)));
        }
        if !(0.0..0.5).contains(&self.poisson) {
            return Err(Error::invalid(format!(
                "Poisson's ratio must lie in [0, 0.5), got {}",
                self.poisson
            )));
        }
        if let Some(rho) = self.density {
            if !(rho > 0.0) {
                return Err(Error::invalid(format!("density must be positive, got {rho}")));
            }
        }
        Ok(())
    }

    pub fn plane_strain_modulus(&self) -> f64 {
        self.youngs / (1.0 - self.poisson * self.poisson)
    }
}

/// One palpation sample: the probe tip rests at `p` with inward unit normal
/// `q` under total normal force `force` (N) through a punch of radius
/// `punch_radius` (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRecord {
    pub p: Point,
    pub q: Point,
    pub force: f64,
    pub punch_radius: f64,
}

impl ProbeRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.force >= 0.0 && self.force.is_finite()) {
            return Err(Error::invalid(format!("probe force must be >= 0, got {}", self.force)));
        }
        if !(self.punch_radius > 0.0) {
            return Err(Error::invalid(format!(
                "punch radius must be positive, got {}",
                self.punch_radius
            )));
        }
        if (norm(&self.q) - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("probe normal is not unit length"));
        }
        Ok(())
    }
}

/// Local curvature over the contact disk.
#[derive(Clone)]
pub enum CurvatureModel {
    Constant(f64),
    /// `kappa(rho, theta)` in polar coordinates on the tangent plane.
    Varying(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for CurvatureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvatureModel::Constant(k) => f.debug_tuple("Constant").field(k).finish(),
            CurvatureModel::Varying(_) => f.write_str("Varying(..)"),
        }
    }
}

impl CurvatureModel {
    pub fn varying(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        CurvatureModel::Varying(Arc::new(f))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

pub fn plane_strain_modulus(youngs: f64, poisson: f64) -> Result<f64> {
    check_positive("Young's modulus", youngs)?;
    if !(poisson > -1.0 && poisson < 0.5) {
        return Err(Error::invalid(format!(
            "Poisson's ratio must lie in (-1, 0.5), got {poisson}"
        )));
    }
    Ok(youngs / (1.0 - poisson * poisson))
}

/// Flat-punch indentation `F / (2 E* R)`.
pub fn flat_indentation(force: f64, estar: f64, radius: f64) -> Result<f64> {
    check_positive("plane strain modulus", estar)?;
    check_positive("punch radius", radius)?;
    if !(force >= 0.0) {
        return Err(Error::invalid(format!("force must be >= 0, got {force}")));
    }
    Ok(force / (2.0 * estar * radius))
}

/// Mean gap `kappa R^2 / 4` between the tangent plane and a surface of
/// constant curvature over a disk of radius `radius`.
pub fn geometric_indentation_constant(kappa: f64, radius: f64) -> f64 {
    0.25 * kappa * radius * radius
}

/// Mean of `kappa(rho, theta) rho^2 / 2` over the disk of radius `radius`.
///
/// Midpoint tensor rule in `(rho^2, theta)`: rings of equal area, so the
/// rule is exact for constant curvature.
pub fn geometric_indentation_varying(
    model: &CurvatureModel,
    radius: f64,
    n_rho: usize,
    n_theta: usize,
) -> Result<f64> {
    check_positive("punch radius", radius)?;
    if n_rho < 4 || n_theta < 4 {
        return Err(Error::invalid("quadrature resolution must be at least 4"));
    }
    let kappa = match model {
        CurvatureModel::Constant(k) => return Ok(geometric_indentation_constant(*k, radius)),
        CurvatureModel::Varying(f) => f,
    };
    // (1/(pi R^2)) int_0^{2pi} int_0^{R^2} kappa s / 2 * ds/2 dtheta, s = rho^2
    let r2 = radius * radius;
    let ds = r2 / n_rho as f64;
    let dtheta = 2.0 * PI / n_theta as f64;
    let mut acc = 0.0;
    for i in 0..n_rho {
        let s = (i as f64 + 0.5) * ds;
        let rho = s.sqrt();
        let mut ring = 0.0;
        for j in 0..n_theta {
            let theta = (j as f64 + 0.5) * dtheta;
            ring += kappa(rho, theta);
        }
        acc += ring * s;
    }
    Ok(acc * 0.25 * ds * dtheta / (PI * r2))
}

fn geometric_term(model: &CurvatureModel, radius: f64) -> Result<f64> {
    geometric_indentation_varying(model, radius, DEFAULT_QUADRATURE, DEFAULT_QUADRATURE)
}

/// Value of the undeformed distance field at the loaded contact point,
/// `-(F / (2 E* R) + geometric gap)`.
pub fn undeformed_sdf_value(
    force: f64,
    estar: f64,
    radius: f64,
    model: &CurvatureModel,
) -> Result<f64> {
    Ok(-(flat_indentation(force, estar, radius)? + geometric_term(model, radius)?))
}

/// How the indentation increment between two probes is measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisplacementMode {
    /// `|p_b - p_a|`: the probe is assumed to move purely along the normal.
    #[default]
    Norm,
    /// `|<p_b - p_a, n>|` with `n` the mean of the two normals.
    Projected,
}

fn indentation_increment(a: &ProbeRecord, b: &ProbeRecord, mode: DisplacementMode) -> f64 {
    let dp = sub(&b.p, &a.p);
    match mode {
        DisplacementMode::Norm => norm(&dp),
        DisplacementMode::Projected => {
            let n = [a.q[0] + b.q[0], a.q[1] + b.q[1], a.q[2] + b.q[2]];
            let len = norm(&n);
            if len == 0.0 {
                norm(&dp)
            } else {
                (dot(&dp, &n) / len).abs()
            }
        }
    }
}

fn same_radius(a: &ProbeRecord, b: &ProbeRecord) -> Result<()> {
    if (a.punch_radius - b.punch_radius).abs() > 1e-12 * a.punch_radius.max(b.punch_radius) {
        return Err(Error::invalid(format!(
            "probes use different punch radii ({} vs {})",
            a.punch_radius, b.punch_radius
        )));
    }
    Ok(())
}

/// Young's modulus from two probes at one site:
/// `E = (F_b - F_a)(1 - nu^2) / (2 R delta_increment)`.
/// The curvature gap is the same in both probes and cancels.
pub fn estimate_youngs_two_point(
    a: &ProbeRecord,
    b: &ProbeRecord,
    poisson: f64,
    mode: DisplacementMode,
) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    if !(b.force > a.force) {
        return Err(Error::invalid(format!(
            "second probe force {} must exceed first {}",
            b.force, a.force
        )));
    }
    same_radius(a, b)?;
    if dist(&a.p, &b.p) == 0.0 {
        return Err(Error::invalid("probe positions coincide"));
    }
    let cos = dot(&a.q, &b.q).clamp(-1.0, 1.0);
    if cos < 5f64.to_radians().cos() {
        log::warn!(
            "probe normals differ by {:.1} degrees; two-point modulus assumes a common normal",
            cos.acos().to_degrees()
        );
    }
    let delta = indentation_increment(a, b, mode);
    if !(delta > 0.0) {
        return Err(Error::invalid("zero indentation increment"));
    }
    Ok((b.force - a.force) * (1.0 - poisson * poisson) / (2.0 * a.punch_radius * delta))
}

/// Hertz compliance constant `C = (9 kappa / (16 E*^2))^(1/3)`, m/N^(2/3).
pub fn hertz_constant(kappa: f64, estar: f64) -> Result<f64> {
    check_positive("curvature", kappa)?;
    check_positive("plane strain modulus", estar)?;
    Ok((9.0 * kappa / (16.0 * estar * estar)).cbrt())
}

/// `C F^(2/3)`.
pub fn hertz_indentation(force: f64, c: f64) -> f64 {
    c * force.max(0.0).powf(2.0 / 3.0)
}

/// Load at which the Hertz contact radius reaches the punch radius,
/// `(4/3) E* R^3 kappa`. Zero for flat surfaces.
pub fn transition_force(estar: f64, radius: f64, kappa: f64) -> Result<f64> {
    check_positive("plane strain modulus", estar)?;
    check_positive("punch radius", radius)?;
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("curvature must be >= 0, got {kappa}")));
    }
    Ok(4.0 / 3.0 * estar * radius.powi(3) * kappa)
}

/// Forward indentation under `force`: Hertz below the transition force,
/// flat punch plus geometric gap at or above it. The two branches are not
/// blended; at the switch the punch branch sits `kappa R^2 / 12` below the
/// Hertz branch.
pub fn total_indentation(force: f64, estar: f64, radius: f64, kappa: f64) -> Result<f64> {
    let f_trans = transition_force(estar, radius, kappa)?;
    if force < f_trans {
        Ok(hertz_indentation(force, hertz_constant(kappa, estar)?))
    } else {
        Ok(flat_indentation(force, estar, radius)? + geometric_indentation_constant(kappa, radius))
    }
}

/// Summary of a stiffness estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// Young's modulus estimate, Pa.
    pub youngs: f64,
    /// Curvature estimate, 1/m, when the data admits one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Per-sample Young's modulus values, Pa.
    pub per_sample_youngs: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator; zero for one sample).
    pub std: f64,
    pub sample_count: usize,
    /// Incremental compliances m_j = delta_increment / force_increment, m/N.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compliances: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl EstimateReport {
    /// Report whose headline modulus is the mean of `samples`.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("no modulus samples"));
        }
        let (mean, std) = mean_std(&samples);
        Ok(EstimateReport {
            youngs: mean,
            kappa: None,
            sample_count: samples.len(),
            per_sample_youngs: samples,
            mean,
            std,
            compliances: Vec::new(),
            notes: Vec::new(),
        })
    }
}

/// Interval windows (indices into the list of consecutive probe pairs) used
/// by [`estimate_e_kappa_compliance`]. `None` selects the first interval for
/// the low window and the last one for the high window.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComplianceWindows {
    pub low: Option<std::ops::Range<usize>>,
    pub high: Option<std::ops::Range<usize>>,
}

/// Relative margin by which the low-force compliance must exceed the
/// high-force one before a curvature is reported.
const REGIME_MARGIN: f64 = 0.01;

/// Young's modulus and curvature from how the incremental compliance of a
/// force series at one site changes between the Hertz and punch regimes.
///
/// `E* = 1 / (2 R m_high)`, `C = (3/2) m_low F_low^(1/3)` and
/// `kappa = (3/2) F_low m_low^3 / (R^2 m_high^2)`, where `F_low` is the
/// midpoint force of the low window. When the compliance does not drop by
/// more than 1 % no curvature is reported.
pub fn estimate_e_kappa_compliance(
    probes: &[ProbeRecord],
    poisson: f64,
    windows: &ComplianceWindows,
) -> Result<EstimateReport> {
    if probes.len() < 3 {
        return Err(Error::invalid(format!(
            "compliance method needs at least 3 probes, got {}",
            probes.len()
        )));
    }
    for p in probes {
        p.validate()?;
    }
    for w in probes.windows(2) {
        if !(w[1].force > w[0].force) {
            return Err(Error::invalid("probe forces must be strictly increasing"));
        }
        same_radius(&w[0], &w[1])?;
    }
    plane_strain_modulus(1.0, poisson)?;
    let radius = probes[0].punch_radius;
    let compliances: Vec<f64> = probes
        .windows(2)
        .map(|w| {
            let d = dist(&w[0].p, &w[1].p);
            if d > 0.0 {
                Ok(d / (w[1].force - w[0].force))
            } else {
                Err(Error::invalid("zero indentation increment between probes"))
            }
        })
        .collect::<Result<_>>()?;
    let n_int = compliances.len();
    let low = windows.low.clone().unwrap_or(0..1);
    let high = windows.high.clone().unwrap_or(n_int - 1..n_int);
    for (name, w) in [("low", &low), ("high", &high)] {
        if w.is_empty() || w.end > n_int {
            return Err(Error::invalid(format!(
                "{name} window {w:?} outside the {n_int} force intervals"
            )));
        }
    }
    let window_mean = |w: &std::ops::Range<usize>| compliances[w.clone()].iter().sum::<f64>() / w.len() as f64;
    let m_low = window_mean(&low);
    let m_high = window_mean(&high);
    let estar = 1.0 / (2.0 * radius * m_high);
    let youngs = estar * (1.0 - poisson * poisson);

    let per_sample: Vec<f64> = compliances[high.clone()]
        .iter()
        .map(|m| (1.0 - poisson * poisson) / (2.0 * radius * m))
        .collect();
    let (mean, std) = mean_std(&per_sample);
    let mut report = EstimateReport {
        youngs,
        kappa: None,
        sample_count: per_sample.len(),
        per_sample_youngs: per_sample,
        mean,
        std,
        compliances,
        notes: Vec::new(),
    };
    if m_low > m_high * (1.0 + REGIME_MARGIN) {
        let f_low = 0.5 * (probes[low.start].force + probes[low.end].force);
        report.kappa = Some(1.5 * f_low * m_low.powi(3) / (radius * radius * m_high * m_high));
    } else {
        report
            .notes
            .push("no regime transition observed; curvature not estimable".into());
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettlingCheck {
    /// Elastic settling time `ell sqrt(rho / E)`, s.
    pub settling_time: f64,
    pub contact_time: f64,
    /// True when the contact time is at least [`SETTLING_SEPARATION`] times
    /// the settling time.
    pub steady: bool,
}

/// Compares the contact time with the time an elastic wave needs to cross
/// the characteristic length `ell`.
pub fn settling_time_check(
    material: &MaterialParams,
    ell: f64,
    contact_time: f64,
) -> Result<SettlingCheck> {
    material.validate()?;
    let rho = material
        .density
        .ok_or_else(|| Error::invalid("settling check needs the material density"))?;
    check_positive("characteristic length", ell)?;
    check_positive("contact time", contact_time)?;
    let settling_time = ell * (rho / material.youngs).sqrt();
    Ok(SettlingCheck {
        settling_time,
        contact_time,
        steady: contact_time >= SETTLING_SEPARATION * settling_time,
    })
}
