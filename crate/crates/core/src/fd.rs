//! Second-order finite differences on uniform grids.
//!
//! Interior nodes use the central stencil, boundary nodes the one-sided
//! three-point stencil. A result is masked wherever any stencil input is
//! masked, so each differentiation dilates masks by one stencil radius.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField3, VectorField3};

/// `d values / d x_axis` with mask propagation.
pub fn partial(grid: &GridSpec, values: &[f64], mask: &[bool], axis: usize) -> (Vec<f64>, Vec<bool>) {
    let n = grid.extents[axis];
    let s = grid.stride(axis);
    let inv2h = 0.5 / grid.spacing[axis];
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let c = grid.ijk(idx)[axis];
            let (d, m) = if c == 0 {
                let (a, b, e) = (idx, idx + s, idx + 2 * s);
                (
                    (-3.0 * values[a] + 4.0 * values[b] - values[e]) * inv2h,
                    mask[a] || mask[b] || mask[e],
                )
            } else if c == n - 1 {
                let (a, b, e) = (idx, idx - s, idx - 2 * s);
                (
                    (3.0 * values[a] - 4.0 * values[b] + values[e]) * inv2h,
                    mask[a] || mask[b] || mask[e],
                )
            } else {
                (
                    (values[idx + s] - values[idx - s]) * inv2h,
                    mask[idx] || mask[idx + s] || mask[idx - s],
                )
            };
            (d, m)
        })
        .unzip()
}

fn merge_masks(masks: &[&[bool]]) -> Vec<bool> {
    (0..masks[0].len())
        .map(|i| masks.iter().any(|m| m[i]))
        .collect()
}

/// Mask after one differentiation: a point is masked when any stencil input
/// along any axis is masked.
pub fn dilate(grid: &GridSpec, mask: &[bool]) -> Vec<bool> {
    let zeros = vec![0.0; mask.len()];
    let parts: Vec<Vec<bool>> = (0..3).map(|ax| partial(grid, &zeros, mask, ax).1).collect();
    merge_masks(&[&parts[0], &parts[1], &parts[2]])
}

/// [`dilate`] applied `times` times.
pub fn dilate_n(grid: &GridSpec, mask: &[bool], times: usize) -> Vec<bool> {
    let mut m = mask.to_vec();
    for _ in 0..times {
        m = dilate(grid, &m);
    }
    m
}

/// Gradient of a scalar field.
pub fn gradient(f: &ScalarField3) -> Result<VectorField3> {
    f.grid.validate()?;
    let (dx, mx) = partial(&f.grid, &f.values, &f.mask, 0);
    let (dy, my) = partial(&f.grid, &f.values, &f.mask, 1);
    let (dz, mz) = partial(&f.grid, &f.values, &f.mask, 2);
    let mask = merge_masks(&[&mx, &my, &mz]);
    let values = (0..f.grid.len()).map(|i| [dx[i], dy[i], dz[i]]).collect();
    VectorField3::new(f.grid, values, mask)
}

fn split(v: &VectorField3) -> [Vec<f64>; 3] {
    let mut out = [
        Vec::with_capacity(v.values.len()),
        Vec::with_capacity(v.values.len()),
        Vec::with_capacity(v.values.len()),
    ];
    for x in &v.values {
        for c in 0..3 {
            out[c].push(x[c]);
        }
    }
    out
}

/// Divergence of a vector field.
pub fn divergence(v: &VectorField3) -> Result<ScalarField3> {
    let comps = split(v);
    let mut total = vec![0.0; v.grid.len()];
    let mut mask = v.mask.clone();
    for (axis, comp) in comps.iter().enumerate() {
        let (d, m) = partial(&v.grid, comp, &v.mask, axis);
        for i in 0..total.len() {
            total[i] += d[i];
            mask[i] |= m[i];
        }
    }
    ScalarField3::new(v.grid, total, mask)
}

/// Jacobian `J[i][j] = d v_i / d x_j` and the merged mask.
pub struct Jacobian {
    pub grid: GridSpec,
    pub values: Vec<[[f64; 3]; 3]>,
    pub mask: Vec<bool>,
}

impl Jacobian {
    pub fn trace(&self) -> Vec<f64> {
        self.values.iter().map(|j| j[0][0] + j[1][1] + j[2][2]).collect()
    }
}

pub fn jacobian(v: &VectorField3) -> Result<Jacobian> {
    let comps = split(v);
    let mut values = vec![[[0.0; 3]; 3]; v.grid.len()];
    let mut mask = v.mask.clone();
    for (ci, comp) in comps.iter().enumerate() {
        for axis in 0..3 {
            let (d, m) = partial(&v.grid, comp, &v.mask, axis);
            for i in 0..values.len() {
                values[i][ci][axis] = d[i];
                mask[i] |= m[i];
            }
        }
    }
    if mask.iter().all(|&m| m) {
        return Err(Error::FullyMasked);
    }
    Ok(Jacobian {
        grid: v.grid,
        values,
        mask,
    })
}
