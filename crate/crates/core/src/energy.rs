//! Nonlinear and linearized energies, the BPS residual and the
//! Euler-Lagrange residual.
//!
//! The nonlinear density `(B/2)[(1 - |grad Phi|)^2 + lambda^2 (div N)^2]` is
//! split as `(B/2)[Gamma^2 + 4 lambda Phi K + 2 lambda div(N - Phi W)]` with
//! `Gamma = 1 - |grad Phi| - lambda div N` and `W = N div N - (N . grad) N`.
//! Every term of a breakdown is integrated over one common mask, the input
//! mask dilated by the deepest nesting of differences (three).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::{LayerGeometry, DEFAULT_NORMAL_EPS};
use crate::grid::{dot3, integrate_masked, GridSpec, MaterialParams, ScalarField3, VectorField3};

/// Nesting depth of the deepest term (`K` and the boundary divergence).
pub const ENERGY_MASK_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    /// `(B/2) int (1 - |grad Phi|)^2`.
    pub compression: f64,
    /// `(B/2) int lambda^2 (div N)^2`.
    pub bending: f64,
    pub total: f64,
    /// `int Gamma^2`.
    pub bps_square: f64,
    /// `int 4 lambda (Phi + c) K`.
    pub bps_gauss: f64,
    /// `int 2 lambda div(N - (Phi + c) W)`.
    pub bps_boundary: f64,
    /// `int div W`, the Gaussian-curvature term per unit saddle-splay modulus.
    pub gauss_boundary: f64,
    /// Additive constant `c` used for `Phi` in the `Phi`-explicit terms.
    pub phi_gauge: f64,
    pub active_points: usize,
    pub masked_fraction: f64,
}

impl EnergyBreakdown {
    /// `(B/2)(bps_square + bps_gauss + bps_boundary)`.
    pub fn decomposed_total(&self, params: &MaterialParams) -> f64 {
        0.5 * params.bulk_modulus * (self.bps_square + self.bps_gauss + self.bps_boundary)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn union(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x || *y).collect()
}

/// Nonlinear energy with the `Phi` gauge `c = 0`.
pub fn full_energy(phi: &ScalarField3, params: &MaterialParams) -> Result<EnergyBreakdown> {
    full_energy_gauged(phi, params, 0.0)
}

/// Nonlinear energy with `Phi + gauge` used in the `Phi`-explicit terms.
pub fn full_energy_gauged(phi: &ScalarField3, params: &MaterialParams, gauge: f64) -> Result<EnergyBreakdown> {
    params.validate()?;
    let lambda = params.lambda();
    let geo = LayerGeometry::compute(phi, DEFAULT_NORMAL_EPS)?;
    let k = geo.gaussian_curvature()?;
    let w = &geo.gauss_flux;
    let vmask = union(&w.mask, &phi.mask);
    let v_values: Vec<[f64; 3]> = (0..phi.grid.len())
        .map(|i| {
            let p = phi.values[i] + gauge;
            [0, 1, 2].map(|c| geo.normal.values[i][c] - p * w.values[i][c])
        })
        .collect();
    let v = VectorField3::new(phi.grid, v_values, vmask)?;
    let div_v = fd::divergence(&v)?;
    let div_w = fd::divergence(w)?;

    let depth = fd::dilate_n(&phi.grid, &phi.mask, ENERGY_MASK_DEPTH);
    let mask: Vec<bool> = (0..phi.grid.len())
        .map(|i| depth[i] || k.mask[i] || div_v.mask[i] || div_w.mask[i] || geo.div_normal.mask[i])
        .collect();
    if mask.iter().all(|&m| m) {
        return Err(Error::FullyMasked);
    }

    let n = phi.grid.len();
    let mut comp = vec![0.0; n];
    let mut bend = vec![0.0; n];
    let mut square = vec![0.0; n];
    let mut gauss = vec![0.0; n];
    let mut bnd = vec![0.0; n];
    for i in 0..n {
        if mask[i] {
            continue;
        }
        let strain = 1.0 - geo.grad_norm.values[i];
        let d = geo.div_normal.values[i];
        comp[i] = strain * strain;
        bend[i] = lambda * lambda * d * d;
        let gamma = strain - lambda * d;
        square[i] = gamma * gamma;
        gauss[i] = 4.0 * lambda * (phi.values[i] + gauge) * k.values[i];
        bnd[i] = 2.0 * lambda * div_v.values[i];
    }
    let g = &phi.grid;
    let half_b = 0.5 * params.bulk_modulus;
    let compression = half_b * integrate_masked(g, &comp, &mask);
    let bending = half_b * integrate_masked(g, &bend, &mask);
    let active = mask.iter().filter(|&&m| !m).count();
    Ok(EnergyBreakdown {
        compression,
        bending,
        total: compression + bending,
        bps_square: integrate_masked(g, &square, &mask),
        bps_gauss: integrate_masked(g, &gauss, &mask),
        bps_boundary: integrate_masked(g, &bnd, &mask),
        gauss_boundary: integrate_masked(g, &div_w.values, &mask),
        phi_gauge: gauge,
        active_points: active,
        masked_fraction: 1.0 - active as f64 / n as f64,
    })
}

/// Linearized energy `(B/2) int [(d_z u)^2 + lambda^2 (lap_perp u)^2]`, with
/// the transverse Laplacian formed as nested first differences and the same
/// mask depth as [`full_energy`].
pub fn linear_energy(u: &ScalarField3, params: &MaterialParams) -> Result<f64> {
    params.validate()?;
    let g = u.grid;
    let (ux, mx) = fd::partial(&g, &u.values, &u.mask, 0);
    let (uy, my) = fd::partial(&g, &u.values, &u.mask, 1);
    let (uz, mz) = fd::partial(&g, &u.values, &u.mask, 2);
    let grad_mask: Vec<bool> = (0..g.len()).map(|i| mx[i] || my[i] || mz[i]).collect();
    let (uxx, _) = fd::partial(&g, &ux, &grad_mask, 0);
    let (uyy, _) = fd::partial(&g, &uy, &grad_mask, 1);
    let mask = fd::dilate_n(&g, &u.mask, ENERGY_MASK_DEPTH);
    let lam2 = params.lambda().powi(2);
    let density: Vec<f64> = (0..g.len())
        .map(|i| uz[i] * uz[i] + lam2 * (uxx[i] + uyy[i]).powi(2))
        .collect();
    if mask.iter().all(|&m| m) {
        return Err(Error::FullyMasked);
    }
    Ok(0.5 * params.bulk_modulus * integrate_masked(&g, &density, &mask))
}

/// Linearized energy of a gradient field `w = grad u` that need not be curl
/// free: `(B/2) int [w_z^2 + lambda^2 (d_x w_x + d_y w_y)^2]`.
pub fn linear_energy_from_gradient(w: &VectorField3, params: &MaterialParams) -> Result<f64> {
    params.validate()?;
    let g = w.grid;
    let wx: Vec<f64> = w.values.iter().map(|v| v[0]).collect();
    let wy: Vec<f64> = w.values.iter().map(|v| v[1]).collect();
    let (dx, mx) = fd::partial(&g, &wx, &w.mask, 0);
    let (dy, my) = fd::partial(&g, &wy, &w.mask, 1);
    let mask: Vec<bool> = (0..g.len()).map(|i| mx[i] || my[i]).collect();
    let lam2 = params.lambda().powi(2);
    let density: Vec<f64> = (0..g.len())
        .map(|i| w.values[i][2].powi(2) + lam2 * (dx[i] + dy[i]).powi(2))
        .collect();
    Ok(0.5 * params.bulk_modulus * integrate_masked(&g, &density, &mask))
}

/// Pointwise BPS residual.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaField {
    pub values: ScalarField3,
}

/// Which square is completed: `Lower` is `1 - |grad Phi| - lambda div N`
/// (normal along `+grad Phi`), `Upper` is `1 - |grad Phi| + lambda div N`
/// (normal along `-grad Phi`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Lower,
    Upper,
}

/// `Gamma = 1 - |grad Phi| - lambda div N`.
pub fn gamma_field(phi: &ScalarField3, params: &MaterialParams) -> Result<GammaField> {
    gamma_field_branch(phi, params, Branch::Lower)
}

pub fn gamma_field_branch(phi: &ScalarField3, params: &MaterialParams, branch: Branch) -> Result<GammaField> {
    let geo = LayerGeometry::compute(phi, DEFAULT_NORMAL_EPS)?;
    Ok(GammaField {
        values: gamma_from(&geo, params.lambda(), branch)?,
    })
}

fn gamma_from(geo: &LayerGeometry, lambda: f64, branch: Branch) -> Result<ScalarField3> {
    let s = match branch {
        Branch::Lower => 1.0,
        Branch::Upper => -1.0,
    };
    let values = (0..geo.grid.len())
        .map(|i| 1.0 - geo.grad_norm.values[i] - s * lambda * geo.div_normal.values[i])
        .collect();
    ScalarField3::new(geo.grid, values, geo.div_normal.mask.clone())
}

/// `div(N Gamma - lambda P grad Gamma / |grad Phi|) + 2 lambda K` with
/// `P = I - N N`; vanishes on extremals of the nonlinear energy.
pub fn el_residual(phi: &ScalarField3, params: &MaterialParams) -> Result<ScalarField3> {
    el_parts(phi, params).and_then(|(lhs, k, lambda)| combine(&lhs, &k, 2.0 * lambda))
}

/// The same divergence with the source on the other side,
/// `div(...) - 2 lambda K`.
pub fn el_residual_opposite_source(phi: &ScalarField3, params: &MaterialParams) -> Result<ScalarField3> {
    el_parts(phi, params).and_then(|(lhs, k, lambda)| combine(&lhs, &k, -2.0 * lambda))
}

fn combine(lhs: &ScalarField3, k: &ScalarField3, coef: f64) -> Result<ScalarField3> {
    let mask = union(&lhs.mask, &k.mask);
    let values = (0..lhs.values.len()).map(|i| lhs.values[i] + coef * k.values[i]).collect();
    ScalarField3::new(lhs.grid, values, mask)
}

fn el_parts(phi: &ScalarField3, params: &MaterialParams) -> Result<(ScalarField3, ScalarField3, f64)> {
    params.validate()?;
    let lambda = params.lambda();
    let geo = LayerGeometry::compute(phi, DEFAULT_NORMAL_EPS)?;
    let gamma = gamma_from(&geo, lambda, Branch::Lower)?;
    let grad_gamma = fd::gradient(&gamma)?;
    let values: Vec<[f64; 3]> = (0..phi.grid.len())
        .map(|i| {
            let n = geo.normal.values[i];
            let gg = grad_gamma.values[i];
            let along = dot3(n, gg);
            let norm = geo.grad_norm.values[i];
            [0, 1, 2].map(|c| {
                let tangential = gg[c] - n[c] * along;
                n[c] * gamma.values[i] - lambda * tangential / norm
            })
        })
        .collect();
    let flux = VectorField3::new(phi.grid, values, grad_gamma.mask.clone())?;
    let lhs = fd::divergence(&flux)?;
    let k = geo.gaussian_curvature()?;
    Ok((lhs, k, lambda))
}

/// Outward flux of `W = N div N - (N . grad) N` through the faces of the
/// sampled box, with face values linearly extrapolated from the two
/// outermost node layers. Equals `int div W` over the midpoint cells in the
/// continuum.
pub fn gauss_boundary_flux(phi: &ScalarField3) -> Result<f64> {
    let geo = LayerGeometry::compute(phi, DEFAULT_NORMAL_EPS)?;
    vector_boundary_flux(&geo.gauss_flux)
}

pub fn vector_boundary_flux(w: &VectorField3) -> Result<f64> {
    let g: GridSpec = w.grid;
    let e = g.extents;
    let mut parts = Vec::new();
    for axis in 0..3 {
        let (a1, a2) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let area = g.spacing[a1] * g.spacing[a2];
        for (outer, inner, sign) in [(0usize, 1usize, -1.0), (e[axis] - 1, e[axis] - 2, 1.0)] {
            let mut face = Vec::with_capacity(e[a1] * e[a2]);
            for t2 in 0..e[a2] {
                for t1 in 0..e[a1] {
                    let mut ijk_o = [0usize; 3];
                    ijk_o[axis] = outer;
                    ijk_o[a1] = t1;
                    ijk_o[a2] = t2;
                    let mut ijk_i = ijk_o;
                    ijk_i[axis] = inner;
                    let io = g.index(ijk_o[0], ijk_o[1], ijk_o[2]);
                    let ii = g.index(ijk_i[0], ijk_i[1], ijk_i[2]);
                    if w.mask[io] || w.mask[ii] {
                        return Err(Error::Singular {
                            what: "boundary flux with masked points on the box surface",
                        });
                    }
                    let val = 1.5 * w.values[io][axis] - 0.5 * w.values[ii][axis];
                    face.push(sign * val);
                }
            }
            parts.push(crate::grid::pairwise_sum(&face) * area);
        }
    }
    Ok(crate::grid::pairwise_sum(&parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(n: usize, half: f64) -> GridSpec {
        GridSpec::spanning([-half; 3], [half; 3], [n; 3]).unwrap()
    }

    #[test]
    fn uniform_layers_cost_nothing() {
        let g = cube(12, 1.0);
        let p = MaterialParams::default();
        let s = 1.0 / 3f64.sqrt();
        let phi = ScalarField3::from_fn(g, |x| s * (x[0] + x[1] + x[2])).unwrap();
        let e = full_energy(&phi, &p).unwrap();
        assert!(e.total.abs() < 1e-20, "{e:?}");
    }

    #[test]
    fn uniform_strain_compression() {
        // Unit volume: nodes at cell centres of [0,1]^3.
        let n = 10;
        let h = 1.0 / n as f64;
        let g = GridSpec::new([0.5 * h; 3], [n; 3], [h; 3]).unwrap();
        let phi = ScalarField3::from_fn(g, |x| 1.1 * x[2]).unwrap();
        let e = full_energy(&phi, &MaterialParams::default()).unwrap();
        assert_eq!(e.masked_fraction, 0.0);
        assert!((e.compression - 0.5 * 0.01).abs() < 1e-14);
        assert!(e.bending.abs() < 1e-20);
        assert!((e.total - e.compression - e.bending).abs() < 1e-16);
    }

    #[test]
    fn linear_energy_basics() {
        let n = 10;
        let h = 1.0 / n as f64;
        let g = GridSpec::new([0.5 * h; 3], [n; 3], [h; 3]).unwrap();
        let p = MaterialParams::default();
        let zero = ScalarField3::from_fn(g, |_| 0.0).unwrap();
        assert_eq!(linear_energy(&zero, &p).unwrap(), 0.0);
        let tilt = ScalarField3::from_fn(g, |x| 0.3 * x[2]).unwrap();
        assert!((linear_energy(&tilt, &p).unwrap() - 0.5 * 0.09).abs() < 1e-14);
    }

    #[test]
    fn gamma_of_flat_layers_is_zero() {
        let g = cube(8, 1.0);
        let phi = ScalarField3::from_fn(g, |x| x[2]).unwrap();
        let gamma = gamma_field(&phi, &MaterialParams::default()).unwrap();
        assert!(gamma.values.max_abs().unwrap() < 1e-14);
        let el = el_residual(&phi, &MaterialParams::default()).unwrap();
        assert!(el.max_abs().unwrap() < 1e-12);
    }

    #[test]
    fn decomposition_on_smooth_field() {
        let g = cube(33, 1.0);
        let p = MaterialParams::with_lambda(0.5, 0.1).unwrap();
        let phi = ScalarField3::from_fn(g, |x| x[2] + 0.2 * (x[0]).sin() * (1.3 * x[1]).cos() + 0.1 * x[0] * x[2]).unwrap();
        let e = full_energy(&phi, &p).unwrap();
        let rel = (e.decomposed_total(&p) - e.total).abs() / e.total;
        assert!(rel < 0.01, "{rel} {e:?}");
    }

    #[test]
    fn boundary_flux_matches_volume_integral() {
        let g = GridSpec::spanning([1.0, -0.8, -0.7], [2.6, 0.9, 0.8], [41, 43, 39]).unwrap();
        let phi = ScalarField3::from_fn(g, |x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()).unwrap();
        let e = full_energy(&phi, &MaterialParams::default()).unwrap();
        // Compare on the same (unmasked) box: recompute the volume term without dilation.
        let geo = LayerGeometry::compute(&phi, DEFAULT_NORMAL_EPS).unwrap();
        let div_w = fd::divergence(&geo.gauss_flux).unwrap();
        let flux = vector_boundary_flux(&geo.gauss_flux).unwrap();
        let vol = div_w.integrate();
        assert!((flux - vol).abs() < 0.01 * vol.abs(), "{flux} {vol}");
        assert!(e.gauss_boundary > 0.0);
    }

    #[test]
    fn json_has_all_fields() {
        let g = cube(8, 1.0);
        let phi = ScalarField3::from_fn(g, |x| x[2]).unwrap();
        let json = full_energy(&phi, &MaterialParams::default()).unwrap().to_json().unwrap();
        for key in [
            "compression",
            "bending",
            "total",
            "bps_square",
            "bps_gauss",
            "bps_boundary",
            "gauss_boundary",
            "phi_gauge",
            "active_points",
            "masked_fraction",
        ] {
            assert!(json.contains(key), "{key}");
        }
    }
}
