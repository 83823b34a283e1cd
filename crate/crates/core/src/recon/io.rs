//! Probe files: one JSON object per line.
//!
//! Required keys are `px, py, pz` (contact position, m) and `qx, qy, qz`
//! (inward unit normal). Optional keys are `force_N`, `punch_radius_m`,
//! `value_m` (target distance value at the contact point) and `site`
//! (probe site index).

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contact::ProbeRecord;
use crate::error::{Error, Result};
use crate::grid::{norm, Point};

/// Normals further than this from unit length are rejected on read.
pub const NORMAL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeEntry {
    pub p: Point,
    /// Inward unit normal.
    pub q: Point,
    pub force: Option<f64>,
    pub punch_radius: Option<f64>,
    pub value: Option<f64>,
    pub site: Option<usize>,
}

impl ProbeEntry {
    pub fn from_record(r: &ProbeRecord, site: Option<usize>) -> Self {
        ProbeEntry {
            p: r.p,
            q: r.q,
            force: Some(r.force),
            punch_radius: Some(r.punch_radius),
            value: None,
            site,
        }
    }

    /// The contact record, when force and punch radius are present.
    pub fn record(&self) -> Result<ProbeRecord> {
        match (self.force, self.punch_radius) {
            (Some(force), Some(punch_radius)) => Ok(ProbeRecord {
                p: self.p,
                q: self.q,
                force,
                punch_radius,
            }),
            _ => Err(Error::invalid("probe entry lacks force_N or punch_radius_m")),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    px: f64,
    py: f64,
    pz: f64,
    qx: f64,
    qy: f64,
    qz: f64,
    #[serde(rename = "force_N", default, skip_serializing_if = "Option::is_none")]
    force: Option<f64>,
    #[serde(rename = "punch_radius_m", default, skip_serializing_if = "Option::is_none")]
    punch_radius: Option<f64>,
    #[serde(rename = "value_m", default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    site: Option<usize>,
}

pub fn write_probe_file(path: &Path, entries: &[ProbeEntry]) -> Result<()> {
    let mut out = Vec::new();
    for e in entries {
        let line = Line {
            px: e.p[0],
            py: e.p[1],
            pz: e.p[2],
            qx: e.q[0],
            qy: e.q[1],
            qz: e.q[2],
            force: e.force,
            punch_radius: e.punch_radius,
            value: e.value,
            site: e.site,
        };
        serde_json::to_writer(&mut out, &line).map_err(|e| Error::format(path, e.to_string()))?;
        out.write_all(b"\n").expect("write to Vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_probe_file(path: &Path) -> Result<Vec<ProbeEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let at = |msg: String| Error::format(path, format!("line {}: {msg}", lineno + 1));
        let l: Line = serde_json::from_str(raw).map_err(|e| at(e.to_string()))?;
        let p = [l.px, l.py, l.pz];
        let q = [l.qx, l.qy, l.qz];
        if p.iter().chain(&q).any(|v| !v.is_finite()) {
            return Err(at("non-finite coordinate".into()));
        }
        let len = norm(&q);
        if (len - 1.0).abs() > NORMAL_TOLERANCE {
            return Err(at(format!("normal has length {len}")));
        }
        for (name, v) in [("force_N", l.force), ("punch_radius_m", l.punch_radius), ("value_m", l.value)] {
            if v.is_some_and(|v| !v.is_finite()) {
                return Err(at(format!("{name} is not finite")));
            }
        }
        entries.push(ProbeEntry {
            p,
            q: [q[0] / len, q[1] / len, q[2] / len],
            force: l.force,
            punch_radius: l.punch_radius,
            value: l.value,
            site: l.site,
        });
    }
    Ok(entries)
}

/// Groups consecutive entries into probe sites. Entries with a `site` key are
/// grouped by it; without one, a new site starts whenever the force does not
/// increase.
pub fn group_sites(entries: &[ProbeEntry]) -> Vec<Vec<usize>> {
    let mut sites: Vec<Vec<usize>> = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        let new_site = match (i.checked_sub(1).map(|j| &entries[j]), e.site) {
            (None, _) => true,
            (Some(prev), Some(s)) => prev.site != Some(s),
            (Some(prev), None) => prev.site.is_some() || !matches!((prev.force, e.force), (Some(a), Some(b)) if b > a),
        };
        if new_site {
            sites.push(vec![i]);
        } else {
            sites.last_mut().expect("a site is open").push(i);
        }
    }
    sites
}
