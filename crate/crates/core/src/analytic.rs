//! Closed-form dislocation fields.
//!
//! Edge lines run along `y`, so edge solutions are functions of the in-layer
//! coordinate `x` and the layer coordinate `z`. Screw lines run along `z`.
//! Displacements are Eulerian, `Phi = z - u`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{invalid, Error, Result};

/// Standard normal cumulative distribution, `P(X <= s)`.
pub fn gaussian_cdf(s: f64) -> f64 {
    0.5 * libm::erfc(-s / SQRT_2)
}

/// Standard normal density.
pub fn gaussian_pdf(s: f64) -> f64 {
    (-0.5 * s * s).exp() / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSolutionParams {
    /// Burgers vector `b = -n a`.
    pub burgers: f64,
    pub lambda: f64,
}

impl EdgeSolutionParams {
    pub fn new(burgers: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", "must be positive"));
        }
        if !burgers.is_finite() {
            return Err(invalid("b", "must be finite"));
        }
        Ok(Self { burgers, lambda })
    }

    /// Parameters for winding `n` and spacing `a`.
    pub fn from_winding(n: i64, a: f64, lambda: f64) -> Result<Self> {
        Self::new(-(n as f64) * a, lambda)
    }

    /// Similarity variable `x / sqrt(2 lambda |z|)`.
    fn scaled(&self, x: f64, z: f64) -> Result<f64> {
        if z == 0.0 || !z.is_finite() {
            return Err(Error::Singular {
                what: "edge displacement on the z = 0 sheet",
            });
        }
        Ok(x / (2.0 * self.lambda * z.abs()).sqrt())
    }
}

/// Linear edge displacement `-sgn(z) (b/2) P(x / sqrt(2 lambda |z|))`.
pub fn linear_edge_u(x: f64, z: f64, p: &EdgeSolutionParams) -> Result<f64> {
    let s = p.scaled(x, z)?;
    Ok(-z.signum() * 0.5 * p.burgers * gaussian_cdf(s))
}

/// Gradient `(d_x u, d_y u, d_z u)` of [`linear_edge_u`]:
/// `sgn(z) n a / (4 sqrt(pi lambda |z|)) exp(-x^2 / 4 lambda |z|) [1, 0, -x/(2z)]`.
pub fn linear_edge_gradient(x: f64, z: f64, p: &EdgeSolutionParams) -> Result<[f64; 3]> {
    p.scaled(x, z)?;
    let na = -p.burgers;
    let az = z.abs();
    let ux = z.signum() * na / (4.0 * (PI * p.lambda * az).sqrt()) * (-x * x / (4.0 * p.lambda * az)).exp();
    Ok([ux, 0.0, -ux * x / (2.0 * z)])
}

fn screw_radius(x: f64, y: f64) -> Result<f64> {
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return Err(Error::Singular { what: "screw field on its axis" });
    }
    Ok(r2)
}

/// `-(b / 2 pi) atan2(y, x)`, cut along the negative x axis.
pub fn linear_screw_u(x: f64, y: f64, b: f64) -> Result<f64> {
    screw_radius(x, y)?;
    Ok(-b / (2.0 * PI) * y.atan2(x))
}

/// `(b / 2 pi r^2) [y, -x, 0]`; single valued, no cut.
pub fn linear_screw_gradient(x: f64, y: f64, b: f64) -> Result<[f64; 3]> {
    let r2 = screw_radius(x, y)?;
    let c = b / (2.0 * PI * r2);
    Ok([c * y, -c * x, 0.0])
}

/// Nonlinear edge displacement
/// `2 lambda sgn(z) ln[1 + (e^{b/4 lambda} - 1) P(x / sqrt(2 lambda |z|))]`.
pub fn bps_edge_u(x: f64, z: f64, p: &EdgeSolutionParams) -> Result<f64> {
    let s = p.scaled(x, z)?;
    let beta = p.burgers / (4.0 * p.lambda);
    let c = beta.exp_m1();
    let log = if s >= 0.0 {
        // 1 + c(1 - Q) = e^beta (1 - c Q e^{-beta}), Q = P(-s) small.
        let q = gaussian_cdf(-s);
        beta + (-c * q * (-beta).exp()).ln_1p()
    } else {
        (c * gaussian_cdf(s)).ln_1p()
    };
    debug_assert!(log.is_finite());
    Ok(2.0 * p.lambda * z.signum() * log)
}

/// Gradient of [`bps_edge_u`].
pub fn bps_edge_gradient(x: f64, z: f64, p: &EdgeSolutionParams) -> Result<[f64; 3]> {
    let s = p.scaled(x, z)?;
    let beta = p.burgers / (4.0 * p.lambda);
    let c = beta.exp_m1();
    let denom = if s >= 0.0 {
        beta.exp() - c * gaussian_cdf(-s)
    } else {
        1.0 + c * gaussian_cdf(s)
    };
    let width = (2.0 * p.lambda * z.abs()).sqrt();
    let ux = 2.0 * p.lambda * z.signum() * c * gaussian_pdf(s) / denom / width;
    Ok([ux, 0.0, -ux * x / (2.0 * z)])
}

/// Small-`b` limit of [`bps_edge_u`], `sgn(z) (b/2) P(s)`. Equal to
/// [`linear_edge_u`] with the Burgers vector reversed: the nonlinear solution
/// measures `b` with the opposite circuit orientation.
pub fn bps_linearization(x: f64, z: f64, p: &EdgeSolutionParams) -> Result<f64> {
    let s = p.scaled(x, z)?;
    Ok(z.signum() * 0.5 * p.burgers * gaussian_cdf(s))
}

/// Helicoid phase field `z + (b / 2 pi) atan2(y, x)`.
pub fn helicoid_phi(x: f64, y: f64, z: f64, b: f64) -> Result<f64> {
    Ok(z - linear_screw_u(x, y, b)?)
}

/// `grad Phi` of the helicoid.
pub fn helicoid_gradient(x: f64, y: f64, b: f64) -> Result<[f64; 3]> {
    let g = linear_screw_gradient(x, y, b)?;
    Ok([-g[0], -g[1], 1.0])
}

/// `N = [-b y / r, b x / r, 2 pi r] / sqrt(b^2 + (2 pi r)^2)`.
pub fn helicoid_normal(x: f64, y: f64, b: f64) -> Result<[f64; 3]> {
    let r = screw_radius(x, y)?.sqrt();
    let d = (b * b + (2.0 * PI * r).powi(2)).sqrt();
    Ok([-b * y / r / d, b * x / r / d, 2.0 * PI * r / d])
}

/// Helicoid residual profile `1 - sqrt(1 + b^2 / (2 pi r)^2)`.
pub fn screw_gamma(r: f64, b: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("r", "radius must be positive"));
    }
    Ok(1.0 - (1.0 + (b / (2.0 * PI * r)).powi(2)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(b: f64) -> EdgeSolutionParams {
        EdgeSolutionParams::new(b, 1.0).unwrap()
    }

    #[test]
    fn linear_edge_gradient_at_unit_depth() {
        // n a = 1 means b = -1.
        let g = linear_edge_gradient(0.0, 1.0, &p(-1.0)).unwrap();
        assert_abs_diff_eq!(g[0], 1.0 / (4.0 * PI.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(g[0], 0.141047, epsilon = 1e-6);
        assert_eq!(g[1], 0.0);
        assert_eq!(g[2], 0.0);
        let far = linear_edge_gradient(60.0, 1.0, &p(-1.0)).unwrap();
        assert!(far.iter().all(|v| v.abs() < 1e-300));
    }

    #[test]
    fn linear_edge_gradient_parity() {
        let a = linear_edge_gradient(0.7, 2.0, &p(1.0)).unwrap();
        let b = linear_edge_gradient(-0.7, 2.0, &p(1.0)).unwrap();
        assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-16);
        assert_abs_diff_eq!(a[2], -b[2], epsilon = 1e-16);
    }

    #[test]
    fn linear_edge_limits() {
        let q = p(1.0);
        assert_abs_diff_eq!(linear_edge_u(1e3, 1.0, &q).unwrap(), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(linear_edge_u(1e3, -1.0, &q).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(linear_edge_u(-1e3, 1.0, &q).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(linear_edge_u(0.0, 3.0, &q).unwrap(), -0.25, epsilon = 1e-15);
        assert!(linear_edge_u(1.0, 0.0, &q).is_err());
        assert!(linear_edge_gradient(1.0, 0.0, &q).is_err());
    }

    #[test]
    fn screw_values() {
        assert_abs_diff_eq!(linear_screw_u(1.0, 0.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(linear_screw_u(0.0, 1.0, 1.0).unwrap(), -0.25, epsilon = 1e-16);
        let g = linear_screw_gradient(1.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(g[1], -1.0 / (2.0 * PI), epsilon = 1e-16);
        assert!(linear_screw_u(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn bps_limits_and_positivity() {
        let q = p(4.0);
        assert_abs_diff_eq!(bps_edge_u(1e3, 1.0, &q).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bps_edge_u(-1e3, 1.0, &q).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bps_edge_u(1e3, -1.0, &q).unwrap(), -2.0, epsilon = 1e-14);
        assert!(bps_edge_u(0.0, 0.0, &q).is_err());
        for b in [-30.0, -1.0, 0.01, 1.0, 40.0] {
            for x in [-50.0, -1.0, 0.0, 2.0, 50.0] {
                assert!(bps_edge_u(x, 1.5, &p(b)).unwrap().is_finite());
            }
        }
    }

    #[test]
    fn bps_constant_on_parabolas() {
        let q = p(4.0);
        let on = |z: f64| bps_edge_u((4.0 * z).sqrt(), z, &q).unwrap();
        let u0 = on(1.0);
        for z in [2.0, 7.0, 30.0, 500.0] {
            assert_abs_diff_eq!(on(z), u0, epsilon = 1e-13);
        }
    }

    #[test]
    fn coded_gradients_match_differences() {
        let h = 1e-5;
        for &(x, z) in &[(0.3, 1.2), (-1.1, 2.5), (0.8, -0.9), (2.0, -4.0)] {
            for (u, g) in [
                (linear_edge_u as fn(f64, f64, &EdgeSolutionParams) -> Result<f64>, linear_edge_gradient as fn(f64, f64, &EdgeSolutionParams) -> Result<[f64; 3]>),
                (bps_edge_u, bps_edge_gradient),
            ] {
                let q = p(2.5);
                let grad = g(x, z, &q).unwrap();
                let dx = (u(x + h, z, &q).unwrap() - u(x - h, z, &q).unwrap()) / (2.0 * h);
                let dz = (u(x, z + h, &q).unwrap() - u(x, z - h, &q).unwrap()) / (2.0 * h);
                assert_abs_diff_eq!(grad[0], dx, epsilon = 1e-8);
                assert_abs_diff_eq!(grad[2], dz, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn helicoid_identities() {
        let b = 1.3;
        let (x, y) = (0.4, -0.7);
        let n = helicoid_normal(x, y, b).unwrap();
        let g = helicoid_gradient(x, y, b).unwrap();
        let gn = crate::grid::norm3(g);
        for i in 0..3 {
            assert_abs_diff_eq!(n[i], g[i] / gn, epsilon = 1e-15);
        }
        let r = b / (2.0 * PI);
        let g = helicoid_gradient(r, 0.0, b).unwrap();
        assert_abs_diff_eq!(crate::grid::norm3(g), SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(screw_gamma(r, b).unwrap(), 1.0 - SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(screw_gamma(r, b).unwrap(), -0.414214, epsilon = 1e-6);
        assert!(screw_gamma(1e9, b).unwrap().abs() < 1e-15);
        assert!(screw_gamma(0.0, b).is_err());
        assert_abs_diff_eq!(helicoid_phi(-1.0, 1e-300, 0.0, b).unwrap(), b / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn small_burgers_linearizes() {
        let q = p(0.01);
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            let x = -20.0 + 0.2 * i as f64;
            for z in [1.0, 3.0, 10.0] {
                let gap = bps_edge_u(x, z, &q).unwrap() - bps_linearization(x, z, &q).unwrap();
                worst = worst.max(gap.abs() / 0.01);
            }
        }
        assert!(worst < 0.01, "{worst}");
        let l = linear_edge_u(0.4, 2.0, &p(-0.01)).unwrap();
        assert_abs_diff_eq!(l, bps_linearization(0.4, 2.0, &q).unwrap(), epsilon = 1e-18);
    }
}
