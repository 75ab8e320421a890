//! Uniform rectilinear grids and the scalar/vector fields sampled on them.
//!
//! Points are stored x-fastest: `index = i + nx * (j + ny * k)`. Every field
//! carries a boolean mask; masked points are excluded from derivatives,
//! integrals and residual statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Smallest number of points per axis; the one-sided boundary stencils need
/// three points and at least one interior point.
pub const MIN_EXTENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: [f64; 3],
    pub extents: [usize; 3],
    pub spacing: [f64; 3],
}

impl GridSpec {
    pub fn new(origin: [f64; 3], extents: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        let grid = Self {
            origin,
            extents,
            spacing,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid whose nodes span `[lo, hi]` on every axis with `extents` points.
    pub fn spanning(lo: [f64; 3], hi: [f64; 3], extents: [usize; 3]) -> Result<Self> {
        let mut spacing = [0.0; 3];
        for ax in 0..3 {
            if extents[ax] < 2 {
                return Err(Error::InvalidGrid(format!("axis {ax} needs at least two points")));
            }
            spacing[ax] = (hi[ax] - lo[ax]) / (extents[ax] - 1) as f64;
        }
        Self::new(lo, extents, spacing)
    }

    pub fn validate(&self) -> Result<()> {
        for ax in 0..3 {
            if self.extents[ax] < MIN_EXTENT {
                return Err(Error::InvalidGrid(format!(
                    "axis {ax} has {} points, finite-difference stencils need at least {MIN_EXTENT}",
                    self.extents[ax]
                )));
            }
            if !(self.spacing[ax] > 0.0 && self.spacing[ax].is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "axis {ax} spacing must be positive, got {}",
                    self.spacing[ax]
                )));
            }
            if !self.origin[ax].is_finite() {
                return Err(Error::InvalidGrid(format!("axis {ax} origin is not finite")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.extents[0] * (j + self.extents[1] * k)
    }

    #[inline]
    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let nx = self.extents[0];
        let ny = self.extents[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    /// Position of node `(i, j, k)`.
    #[inline]
    pub fn point(&self, ijk: [usize; 3]) -> [f64; 3] {
        [
            self.origin[0] + ijk[0] as f64 * self.spacing[0],
            self.origin[1] + ijk[1] as f64 * self.spacing[1],
            self.origin[2] + ijk[2] as f64 * self.spacing[2],
        ]
    }

    #[inline]
    pub fn point_of(&self, idx: usize) -> [f64; 3] {
        self.point(self.ijk(idx))
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Periodic box lengths `n_i * h_i` used by the spectral solver.
    pub fn box_lengths(&self) -> [f64; 3] {
        [
            self.extents[0] as f64 * self.spacing[0],
            self.extents[1] as f64 * self.spacing[1],
            self.extents[2] as f64 * self.spacing[2],
        ]
    }

    /// Stride between neighbours along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.extents[0],
            _ => self.extents[0] * self.extents[1],
        }
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Scalar samples (phase field, displacement, curvature, ...) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3 {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// `true` marks a point excluded from integrals and residuals.
    pub mask: Vec<bool>,
}

impl ScalarField3 {
    pub fn new(grid: GridSpec, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        grid.validate()?;
        let n = grid.len();
        if values.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: values.len(),
            });
        }
        if mask.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: mask.len(),
            });
        }
        if mask.iter().all(|&m| m) {
            return Err(Error::FullyMasked);
        }
        Ok(Self { grid, values, mask })
    }

    /// Samples `f` at every node; no point is masked.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Result<Self>
    where
        F: Fn([f64; 3]) -> f64 + Sync,
    {
        grid.validate()?;
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.point_of(idx)))
            .collect();
        let mask = vec![false; grid.len()];
        Self::new(grid, values, mask)
    }

    /// Samples `f` and masks the nodes where `masked` holds or where `f`
    /// returns an error or a non-finite value.
    pub fn from_fn_masked<F, M>(grid: GridSpec, f: F, masked: M) -> Result<Self>
    where
        F: Fn([f64; 3]) -> Result<f64> + Sync,
        M: Fn([f64; 3]) -> bool + Sync,
    {
        grid.validate()?;
        let samples: Vec<(f64, bool)> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let p = grid.point_of(idx);
                if masked(p) {
                    return (0.0, true);
                }
                match f(p) {
                    Ok(v) if v.is_finite() => (v, false),
                    _ => (0.0, true),
                }
            })
            .collect();
        let (values, mask) = samples.into_iter().unzip();
        Self::new(grid, values, mask)
    }

    pub fn active_count(&self) -> usize {
        self.mask.iter().filter(|&&m| !m).count()
    }

    pub fn masked_fraction(&self) -> f64 {
        1.0 - self.active_count() as f64 / self.grid.len() as f64
    }

    /// Same grid and mask, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid, values, self.mask.clone())
    }

    /// Pointwise map over active points; masked points keep a zero value.
    pub fn map<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> Self {
        let values = self
            .values
            .par_iter()
            .zip(self.mask.par_iter())
            .map(|(&v, &m)| if m { 0.0 } else { f(v) })
            .collect();
        Self {
            grid: self.grid,
            values,
            mask: self.mask.clone(),
        }
    }

    /// Maximum of `|value|` over active points satisfying `keep`.
    pub fn max_abs_where<F: Fn([f64; 3]) -> bool>(&self, keep: F) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (idx, (&v, &m)) in self.values.iter().zip(&self.mask).enumerate() {
            if m || !keep(self.grid.point_of(idx)) {
                continue;
            }
            best = Some(best.map_or(v.abs(), |b: f64| b.max(v.abs())));
        }
        best
    }

    pub fn max_abs(&self) -> Option<f64> {
        self.max_abs_where(|_| true)
    }

    /// Value at node `(i, j, k)`, `None` when masked.
    pub fn at(&self, ijk: [usize; 3]) -> Option<f64> {
        let idx = self.grid.index(ijk[0], ijk[1], ijk[2]);
        (!self.mask[idx]).then(|| self.values[idx])
    }
}

/// Three components per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    pub grid: GridSpec,
    pub values: Vec<[f64; 3]>,
    pub mask: Vec<bool>,
}

impl VectorField3 {
    pub fn new(grid: GridSpec, values: Vec<[f64; 3]>, mask: Vec<bool>) -> Result<Self> {
        grid.validate()?;
        let n = grid.len();
        if values.len() != n || mask.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: values.len().min(mask.len()),
            });
        }
        if mask.iter().all(|&m| m) {
            return Err(Error::FullyMasked);
        }
        Ok(Self { grid, values, mask })
    }

    pub fn from_fn<F>(grid: GridSpec, f: F) -> Result<Self>
    where
        F: Fn([f64; 3]) -> [f64; 3] + Sync,
    {
        grid.validate()?;
        let values: Vec<[f64; 3]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.point_of(idx)))
            .collect();
        Self::new(grid, values, vec![false; grid.len()])
    }

    /// One component as a scalar field sharing this field's mask.
    pub fn component(&self, c: usize) -> ScalarField3 {
        ScalarField3 {
            grid: self.grid,
            values: self.values.iter().map(|v| v[c]).collect(),
            mask: self.mask.clone(),
        }
    }

    pub fn norm(&self) -> ScalarField3 {
        ScalarField3 {
            grid: self.grid,
            values: self.values.iter().map(|v| norm3(*v)).collect(),
            mask: self.mask.clone(),
        }
    }
}

/// Elastic constants and lengths of the smectic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// Bulk (compression) modulus.
    #[serde(rename = "B")]
    pub bulk_modulus: f64,
    /// Bend modulus.
    #[serde(rename = "K1")]
    pub bend_modulus: f64,
    /// Layer spacing.
    pub a: f64,
    /// Core cutoff.
    pub xi: f64,
    /// Transverse extent used for per-unit-length energies.
    #[serde(rename = "Ly")]
    pub ly: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            bulk_modulus: 1.0,
            bend_modulus: 1.0,
            a: 1.0,
            xi: 0.1,
            ly: 1.0,
        }
    }
}

impl MaterialParams {
    pub fn new(bulk_modulus: f64, bend_modulus: f64, a: f64, xi: f64, ly: f64) -> Result<Self> {
        let p = Self {
            bulk_modulus,
            bend_modulus,
            a,
            xi,
            ly,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `B = 1`, `a = 1` and the requested penetration length.
    pub fn with_lambda(lambda: f64, xi: f64) -> Result<Self> {
        Self::new(1.0, lambda * lambda, 1.0, xi, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64); 5] = [
            ("B", self.bulk_modulus),
            ("K1", self.bend_modulus),
            ("a", self.a),
            ("xi", self.xi),
            ("Ly", self.ly),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Penetration length `sqrt(K1 / B)`.
    pub fn lambda(&self) -> f64 {
        (self.bend_modulus / self.bulk_modulus).sqrt()
    }
}

#[inline]
pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

#[inline]
pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Deterministic pairwise (tree) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Midpoint-rule volume integral over the points where `active` holds.
pub fn integrate_masked(grid: &GridSpec, values: &[f64], masked: &[bool]) -> f64 {
    let active: Vec<f64> = values
        .iter()
        .zip(masked)
        .filter(|(_, &m)| !m)
        .map(|(&v, _)| v)
        .collect();
    pairwise_sum(&active) * grid.cell_volume()
}

impl ScalarField3 {
    /// Midpoint-rule integral over active points.
    pub fn integrate(&self) -> f64 {
        integrate_masked(&self.grid, &self.values, &self.mask)
    }
}
