//! Level-set differential geometry of the layers `Phi = const`.
//!
//! The unit normal is `N = grad Phi / |grad Phi|`, the mean curvature is
//! `H = div N / 2` and the Gaussian curvature is
//! `K = div[N (div N) - (N . grad) N] / 2`. Both curvatures are computed as
//! nested first differences of `N`, never from a Hessian formula.

use crate::error::{Error, Result};
use crate::fd;
use crate::grid::{dot3, norm3, GridSpec, ScalarField3, VectorField3};

/// Gradient-magnitude floor below which a point is masked when forming `N`.
pub const DEFAULT_NORMAL_EPS: f64 = 1e-8;

/// Everything derived from `Phi` up to first derivatives of `N`.
#[derive(Debug, Clone)]
pub struct LayerGeometry {
    pub grid: GridSpec,
    /// `grad Phi`, masked one stencil beyond the input mask.
    pub grad: VectorField3,
    /// `|grad Phi|` on the gradient mask.
    pub grad_norm: ScalarField3,
    /// Unit normal; additionally masked where `|grad Phi| < eps`.
    pub normal: VectorField3,
    /// `div N`.
    pub div_normal: ScalarField3,
    /// `N (div N) - (N . grad) N`, whose divergence is `2K`.
    pub gauss_flux: VectorField3,
}

impl LayerGeometry {
    pub fn compute(phi: &ScalarField3, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(crate::error::invalid("eps", "must be positive"));
        }
        let grad = fd::gradient(phi)?;
        let grad_norm = grad.norm();
        let mut nmask = grad.mask.clone();
        let normals: Vec<[f64; 3]> = grad
            .values
            .iter()
            .zip(grad_norm.values.iter())
            .zip(nmask.iter_mut())
            .map(|((g, &n), m)| {
                if *m || n < eps {
                    *m = true;
                    [0.0; 3]
                } else {
                    [g[0] / n, g[1] / n, g[2] / n]
                }
            })
            .collect();
        let normal = VectorField3::new(phi.grid, normals, nmask)?;

        let jac = fd::jacobian(&normal)?;
        let div = jac.trace();
        let flux: Vec<[f64; 3]> = jac
            .values
            .iter()
            .zip(&normal.values)
            .zip(&div)
            .map(|((j, n), d)| {
                let mut w = [0.0; 3];
                for i in 0..3 {
                    let advect = n[0] * j[i][0] + n[1] * j[i][1] + n[2] * j[i][2];
                    w[i] = n[i] * d - advect;
                }
                w
            })
            .collect();
        let div_normal = ScalarField3::new(phi.grid, div, jac.mask.clone())?;
        let gauss_flux = VectorField3::new(phi.grid, flux, jac.mask)?;
        Ok(Self {
            grid: phi.grid,
            grad,
            grad_norm,
            normal,
            div_normal,
            gauss_flux,
        })
    }

    pub fn mean_curvature(&self) -> ScalarField3 {
        self.div_normal.map(|d| 0.5 * d)
    }

    pub fn gaussian_curvature(&self) -> Result<ScalarField3> {
        let div = fd::divergence(&self.gauss_flux)?;
        Ok(div.map(|d| 0.5 * d))
    }
}

pub fn normal_field(phi: &ScalarField3, eps: f64) -> Result<VectorField3> {
    if !(eps > 0.0) {
        return Err(crate::error::invalid("eps", "must be positive"));
    }
    let grad = fd::gradient(phi)?;
    let mut mask = grad.mask.clone();
    let values = grad
        .values
        .iter()
        .zip(mask.iter_mut())
        .map(|(g, m)| {
            let n = norm3(*g);
            if *m || n < eps {
                *m = true;
                [0.0; 3]
            } else {
                [g[0] / n, g[1] / n, g[2] / n]
            }
        })
        .collect();
    VectorField3::new(phi.grid, values, mask)
}

/// `H = div N / 2`; positive for `Phi = |x|`.
pub fn mean_curvature(phi: &ScalarField3) -> Result<ScalarField3> {
    Ok(LayerGeometry::compute(phi, DEFAULT_NORMAL_EPS)?.mean_curvature())
}

pub fn gaussian_curvature(phi: &ScalarField3) -> Result<ScalarField3> {
    LayerGeometry::compute(phi, DEFAULT_NORMAL_EPS)?.gaussian_curvature()
}

/// Compression strains `u_zz = 1 - |grad Phi|` and
/// `u~_zz = (1 - |grad Phi|^2) / 2`.
pub fn strain_fields(phi: &ScalarField3) -> Result<(ScalarField3, ScalarField3)> {
    let grad = fd::gradient(phi)?;
    let mut uzz = Vec::with_capacity(grad.values.len());
    let mut uzz_tilde = Vec::with_capacity(grad.values.len());
    for g in &grad.values {
        let sq = dot3(*g, *g);
        uzz.push(1.0 - sq.sqrt());
        uzz_tilde.push(0.5 * (1.0 - sq));
    }
    Ok((
        ScalarField3::new(phi.grid, uzz, grad.mask.clone())?,
        ScalarField3::new(phi.grid, uzz_tilde, grad.mask)?,
    ))
}

/// `u_zz` recovered from the alternate strain.
pub fn strain_from_alternate(uzz_tilde: f64) -> f64 {
    1.0 - (1.0 - 2.0 * uzz_tilde).sqrt()
}

/// Principal curvatures of a layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvaturePair {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl CurvaturePair {
    pub fn new(kappa1: f64, kappa2: f64) -> Self {
        Self { kappa1, kappa2 }
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.kappa1 + self.kappa2)
    }

    pub fn gaussian(&self) -> f64 {
        self.kappa1 * self.kappa2
    }

    /// Principal curvatures from `(H, K)`, ordered `kappa1 >= kappa2`.
    pub fn from_invariants(h: f64, k: f64) -> Result<Self> {
        let disc = h * h - k;
        if disc < -1e-14 * (h * h).max(k.abs()).max(f64::MIN_POSITIVE) {
            return Err(crate::error::invalid("K", "H^2 < K has no real principal curvatures"));
        }
        let r = disc.max(0.0).sqrt();
        Ok(Self::new(h + r, h - r))
    }
}

/// Curvatures of the layer offset by `n` spacings along the normal,
/// `kappa_n = kappa_0 / (1 + n a kappa_0)`.
pub fn parallel_curvatures(c0: CurvaturePair, n: i64, a: f64) -> Result<CurvaturePair> {
    if !(a > 0.0) {
        return Err(crate::error::invalid("a", "layer spacing must be positive"));
    }
    let na = n as f64 * a;
    let step = |k: f64, direction: usize| {
        let den = 1.0 + na * k;
        if den <= 0.0 {
            Err(Error::FocalCrossing { direction, n })
        } else {
            Ok(k / den)
        }
    };
    Ok(CurvaturePair::new(step(c0.kappa1, 1)?, step(c0.kappa2, 2)?))
}

/// `H_n = (H_0 + n a K_0) / (1 + 2 n a H_0 + n^2 a^2 K_0)`.
pub fn parallel_mean_curvature(h0: f64, k0: f64, n: i64, a: f64) -> f64 {
    let na = n as f64 * a;
    (h0 + na * k0) / (1.0 + 2.0 * na * h0 + na * na * k0)
}

/// `K_n = K_0 / (1 + 2 n a H_0 + n^2 a^2 K_0)`.
pub fn parallel_gaussian_curvature(h0: f64, k0: f64, n: i64, a: f64) -> f64 {
    let na = n as f64 * a;
    k0 / (1.0 + 2.0 * na * h0 + na * na * k0)
}
