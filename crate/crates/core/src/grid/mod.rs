//! Uniform isotropic grids in two or three dimensions.
//!
//! Values are stored flat with the last axis varying fastest. A 2D grid is
//! stored as a 3D grid whose third axis has a single node; points are always
//! `[f64; 3]` and the third component is ignored in 2D.

mod io;
mod ops;

pub use io::{read_grid, write_grid, PayloadEncoding};
pub(crate) use ops::godunov_at;
pub use ops::{
    divergence, gradient_central, gradient_norm_godunov, laplacian, sample_trilinear,
    skeleton_band, SKELETON_BAND_CELLS,
};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Minimum nodes per axis; stencils need two interior layers.
pub const MIN_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    ndim: usize,
    dims: [usize; 3],
    origin: Point,
    spacing: f64,
}

impl GridGeometry {
    /// `dims` and `origin` must both have two or three entries.
    pub fn new(dims: &[usize], origin: &[f64], spacing: f64) -> Result<Self> {
        let ndim = dims.len();
        if !(2..=3).contains(&ndim) {
            return Err(Error::invalid(format!("grid must have 2 or 3 axes, got {ndim}")));
        }
        if origin.len() != ndim {
            return Err(Error::invalid(format!(
                "origin has {} components for a {ndim}-axis grid",
                origin.len()
            )));
        }
        if let Some(d) = dims.iter().find(|&&d| d < MIN_DIM) {
            return Err(Error::invalid(format!("grid dimension {d} < {MIN_DIM}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid(format!("grid spacing must be positive, got {spacing}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::invalid("grid origin must be finite"));
        }
        let mut d = [1usize; 3];
        let mut o = [0.0; 3];
        d[..ndim].copy_from_slice(dims);
        o[..ndim].copy_from_slice(origin);
        Ok(GridGeometry {
            ndim,
            dims: d,
            origin: o,
            spacing,
        })
    }

    /// A cube (or square) of `n` nodes per axis spanning `side` meters,
    /// centered at `center`.
    pub fn cube(ndim: usize, n: usize, center: Point, side: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("cube grid needs at least 2 nodes per axis"));
        }
        let h = side / (n - 1) as f64;
        let origin: Vec<f64> = center[..ndim.min(3)].iter().map(|c| c - 0.5 * side).collect();
        Self::new(&vec![n; ndim], &origin, h)
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.ndim]
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.ndim]
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat-index strides; `strides()[a]` is the step between neighbours along axis `a`.
    #[inline]
    pub fn strides(&self) -> [usize; 3] {
        [self.dims[1] * self.dims[2], self.dims[2], 1]
    }

    #[inline]
    pub fn index(&self, ijk: [usize; 3]) -> usize {
        (ijk[0] * self.dims[1] + ijk[1]) * self.dims[2] + ijk[2]
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.dims[2];
        let rest = idx / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], k]
    }

    #[inline]
    pub fn position(&self, ijk: [usize; 3]) -> Point {
        let mut p = [0.0; 3];
        for a in 0..self.ndim {
            p[a] = self.origin[a] + ijk[a] as f64 * self.spacing;
        }
        p
    }

    #[inline]
    pub fn node_position(&self, idx: usize) -> Point {
        self.position(self.coords(idx))
    }

    /// Upper corner of the bounding box.
    pub fn max_corner(&self) -> Point {
        let mut p = [0.0; 3];
        for a in 0..self.ndim {
            p[a] = self.origin[a] + (self.dims[a] - 1) as f64 * self.spacing;
        }
        p
    }

    pub fn contains(&self, x: &Point) -> bool {
        let hi = self.max_corner();
        let tol = 1e-9 * self.spacing;
        (0..self.ndim).all(|a| x[a] >= self.origin[a] - tol && x[a] <= hi[a] + tol)
    }

    /// True when no active coordinate sits on the first or last layer.
    #[inline]
    pub fn is_interior(&self, ijk: [usize; 3]) -> bool {
        (0..self.ndim).all(|a| ijk[a] > 0 && ijk[a] + 1 < self.dims[a])
    }

    /// Index of the node closest to `x`, clamped to the grid.
    pub fn nearest_node(&self, x: &Point) -> [usize; 3] {
        let mut ijk = [0usize; 3];
        for a in 0..self.ndim {
            let t = ((x[a] - self.origin[a]) / self.spacing).round();
            ijk[a] = t.clamp(0.0, (self.dims[a] - 1) as f64) as usize;
        }
        ijk
    }

    /// Corner nodes of the cell holding `x` with their multilinear weights;
    /// `None` outside the grid. Zero-weight corners are kept.
    pub fn trilinear_stencil(&self, x: &Point) -> Option<Vec<(usize, f64)>> {
        if !self.contains(x) {
            return None;
        }
        let mut base = [0usize; 3];
        let mut t = [0.0; 3];
        for a in 0..self.ndim {
            let u = (x[a] - self.origin[a]) / self.spacing;
            let cell = (u.floor().max(0.0) as usize).min(self.dims[a] - 2);
            base[a] = cell;
            t[a] = (u - cell as f64).clamp(0.0, 1.0);
        }
        let strides = self.strides();
        let base_idx = self.index(base);
        let stencil = (0..1usize << self.ndim)
            .map(|c| {
                let mut w = 1.0;
                let mut idx = base_idx;
                for a in 0..self.ndim {
                    if c >> a & 1 == 1 {
                        w *= t[a];
                        idx += strides[a];
                    } else {
                        w *= 1.0 - t[a];
                    }
                }
                (idx, w)
            })
            .collect();
        Some(stencil)
    }

    /// Samples `f` at every node.
    pub fn sample<F>(&self, f: F) -> ScalarGrid
    where
        F: Fn(&Point) -> f64 + Sync,
    {
        use rayon::prelude::*;
        let values = (0..self.len())
            .into_par_iter()
            .map(|idx| f(&self.node_position(idx)))
            .collect();
        ScalarGrid {
            geometry: self.clone(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                geometry.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid values must be finite"));
        }
        Ok(ScalarGrid { geometry, values })
    }

    pub fn filled(geometry: GridGeometry, value: f64) -> Self {
        let n = geometry.len();
        ScalarGrid {
            geometry,
            values: vec![value; n],
        }
    }

    pub(crate) fn from_raw(geometry: GridGeometry, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), geometry.len());
        ScalarGrid { geometry, values }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, ijk: [usize; 3]) -> f64 {
        self.values[self.geometry.index(ijk)]
    }

    /// Applies `f` to every value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarGrid {
        ScalarGrid {
            geometry: self.geometry.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &ScalarGrid) -> Result<f64> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorGrid {
    geometry: GridGeometry,
    components: Vec<Vec<f64>>,
}

impl VectorGrid {
    pub fn new(geometry: GridGeometry, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != geometry.ndim() {
            return Err(Error::invalid(format!(
                "{} components for a {}-axis grid",
                components.len(),
                geometry.ndim()
            )));
        }
        for c in &components {
            if c.len() != geometry.len() {
                return Err(Error::invalid("vector component length does not match grid"));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("vector components must be finite"));
            }
        }
        Ok(VectorGrid {
            geometry,
            components,
        })
    }

    pub(crate) fn from_raw(geometry: GridGeometry, components: Vec<Vec<f64>>) -> Self {
        VectorGrid {
            geometry,
            components,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    /// Vector at flat index `idx`; inactive components are zero.
    pub fn at(&self, idx: usize) -> Point {
        let mut v = [0.0; 3];
        for (a, c) in self.components.iter().enumerate() {
            v[a] = c[idx];
        }
        v
    }
}

#[inline]
pub(crate) fn dist(a: &Point, b: &Point) -> f64 {
    dist2(a, b).sqrt()
}

#[inline]
pub(crate) fn dist2(a: &Point, b: &Point) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

#[inline]
pub(crate) fn norm(v: &Point) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
