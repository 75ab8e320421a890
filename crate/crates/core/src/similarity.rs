//! Similarity reduction of the nonlinear edge problem.
//!
//! With `alpha = x / sqrt(lambda z)` and `u = lambda f(alpha)` the flow
//! equation reduces to `(alpha f' + f'^2) / 2 + f'' = 0`. The substitution
//! `S = exp(f/2)` linearizes it to `alpha S' + 2 S'' = 0`.

use std::f64::consts::SQRT_2;

use crate::analytic::{gaussian_cdf, gaussian_pdf};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityProfile {
    pub alpha_samples: Vec<f64>,
    pub f_values: Vec<f64>,
    pub s_values: Vec<f64>,
}

impl SimilarityProfile {
    fn from_f(alpha_samples: Vec<f64>, f_values: Vec<f64>) -> Self {
        let s_values = f_values.iter().map(|f| (0.5 * f).exp()).collect();
        Self {
            alpha_samples,
            f_values,
            s_values,
        }
    }
}

/// `S(alpha) = 1 + (e^{b/4 lambda} - 1) P(alpha / sqrt 2)`, normalized so
/// that `f(-inf) = 0` and `f(+inf) = b / 2 lambda`.
pub fn hopf_cole_s(alpha: f64, b_over_lambda: f64) -> f64 {
    1.0 + (0.25 * b_over_lambda).exp_m1() * gaussian_cdf(alpha / SQRT_2)
}

/// `f = 2 ln S`, evaluated without cancellation.
pub fn hopf_cole_f(alpha: f64, b_over_lambda: f64) -> f64 {
    let beta = 0.25 * b_over_lambda;
    let c = beta.exp_m1();
    let s = alpha / SQRT_2;
    if s >= 0.0 {
        2.0 * (beta + (-c * gaussian_cdf(-s) * (-beta).exp()).ln_1p())
    } else {
        2.0 * (c * gaussian_cdf(s)).ln_1p()
    }
}

/// `(f', f'')` of the closed form.
pub fn hopf_cole_derivatives(alpha: f64, b_over_lambda: f64) -> (f64, f64) {
    let c = (0.25 * b_over_lambda).exp_m1();
    let s = hopf_cole_s(alpha, b_over_lambda);
    let s1 = c * gaussian_pdf(alpha / SQRT_2) / SQRT_2;
    let s2 = -0.5 * alpha * s1;
    let f1 = 2.0 * s1 / s;
    let f2 = 2.0 * s2 / s - 2.0 * (s1 / s).powi(2);
    (f1, f2)
}

/// Residual of the nonlinear similarity equation given `f'` and `f''`.
pub fn nonlinear_residual(alpha: f64, f1: f64, f2: f64) -> f64 {
    0.5 * (alpha * f1 + f1 * f1) + f2
}

/// Residual of the linear equation for the closed-form `S`.
pub fn linear_residual(alpha: f64, b_over_lambda: f64) -> f64 {
    let c = (0.25 * b_over_lambda).exp_m1();
    let s1 = c * gaussian_pdf(alpha / SQRT_2) / SQRT_2;
    let s2 = -0.5 * alpha * s1;
    alpha * s1 + 2.0 * s2
}

/// Closed-form profiles on `n_samples` uniform points of `[-alpha_max, alpha_max]`.
pub fn similarity_profiles(b_over_lambda: f64, alpha_max: f64, n_samples: usize) -> Result<SimilarityProfile> {
    if n_samples < 100 {
        return Err(invalid("n_samples", "at least 100 samples required"));
    }
    if !(alpha_max > 0.0 && alpha_max.is_finite()) {
        return Err(invalid("alpha_max", "must be positive"));
    }
    if !b_over_lambda.is_finite() {
        return Err(invalid("b_over_lambda", "must be finite"));
    }
    let step = 2.0 * alpha_max / (n_samples - 1) as f64;
    let alpha: Vec<f64> = (0..n_samples).map(|i| -alpha_max + i as f64 * step).collect();
    let f: Vec<f64> = alpha.iter().map(|&a| hopf_cole_f(a, b_over_lambda)).collect();
    let mut out = SimilarityProfile::from_f(alpha, f);
    out.s_values = out.alpha_samples.iter().map(|&a| hopf_cole_s(a, b_over_lambda)).collect();
    Ok(out)
}

/// Riccati form of the similarity equation for `g = f'`, with `f` carried along.
fn rhs(alpha: f64, y: [f64; 2]) -> [f64; 2] {
    [y[1], -0.5 * (alpha * y[1] + y[1] * y[1])]
}

fn rk4(alpha: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let k1 = rhs(alpha, y);
    let k2 = rhs(alpha + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = rhs(alpha + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = rhs(alpha + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// March from `alpha = 0` with `f(0) = 0`, `f'(0) = g0` over `steps` steps of
/// signed size `h`. `None` signals blow-up.
fn march(g0: f64, h: f64, steps: usize) -> Option<Vec<[f64; 2]>> {
    let mut y = [0.0, g0];
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y);
    for i in 0..steps {
        y = rk4(i as f64 * h, y, h);
        if !(y[0].is_finite() && y[1].is_finite()) || y[1].abs() > 1e6 {
            return None;
        }
        out.push(y);
    }
    Some(out)
}

/// Direct integration of the nonlinear similarity equation.
///
/// The Riccati equation for `f'` is stable when marched outward from the
/// origin in both directions, so `f'(0)` is found by shooting on the jump
/// `f(A) - f(-A) = b / 2 lambda` with `A = max(alpha_max, 12)`, and `f` is
/// normalized by `f(-A) = 0`. Returned samples cover `[-alpha_max, alpha_max]`.
pub fn integrate_similarity(b_over_lambda: f64, alpha_max: f64, step: f64) -> Result<SimilarityProfile> {
    if !(alpha_max > 0.0 && step > 0.0 && step < alpha_max) {
        return Err(invalid("step", "need 0 < step < alpha_max"));
    }
    let target = 0.5 * b_over_lambda;
    let half = alpha_max.max(12.0);
    let steps = (half / step).ceil() as usize;
    let h = half / steps as f64;

    let jump = |g0: f64| -> f64 {
        let right = march(g0, h, steps);
        let left = march(g0, -h, steps);
        match (right, left) {
            (Some(r), Some(l)) => r[steps][0] - l[steps][0],
            _ => g0.signum() * f64::INFINITY,
        }
    };

    if target == 0.0 {
        let n = 2 * steps + 1;
        let alpha = (0..n).map(|i| -half + i as f64 * h).collect::<Vec<_>>();
        return Ok(crop(SimilarityProfile::from_f(alpha, vec![0.0; n]), alpha_max));
    }
    // Bracket the root on the side of the target's sign.
    let sign = target.signum();
    let mut lo = 0.0;
    let mut hi = sign * 0.1;
    let mut iters = 0;
    while (jump(hi) - target) * sign < 0.0 {
        lo = hi;
        hi *= 2.0;
        iters += 1;
        if iters > 60 {
            return Err(Error::NoConvergence("similarity shooting bracket".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (jump(mid) - target) * sign < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g0 = 0.5 * (lo + hi);
    let right = march(g0, h, steps).ok_or_else(|| Error::NoConvergence("similarity march".into()))?;
    let left = march(g0, -h, steps).ok_or_else(|| Error::NoConvergence("similarity march".into()))?;
    let offset = left[steps][0];
    let mut alpha = Vec::with_capacity(2 * steps + 1);
    let mut f = Vec::with_capacity(2 * steps + 1);
    for i in (1..=steps).rev() {
        alpha.push(-(i as f64) * h);
        f.push(left[i][0] - offset);
    }
    for (i, y) in right.iter().enumerate() {
        alpha.push(i as f64 * h);
        f.push(y[0] - offset);
    }
    Ok(crop(SimilarityProfile::from_f(alpha, f), alpha_max))
}

fn crop(p: SimilarityProfile, alpha_max: f64) -> SimilarityProfile {
    let keep: Vec<usize> = (0..p.alpha_samples.len())
        .filter(|&i| p.alpha_samples[i].abs() <= alpha_max * (1.0 + 1e-12))
        .collect();
    SimilarityProfile {
        alpha_samples: keep.iter().map(|&i| p.alpha_samples[i]).collect(),
        f_values: keep.iter().map(|&i| p.f_values[i]).collect(),
        s_values: keep.iter().map(|&i| p.s_values[i]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_is_exp_half_f() {
        let p = similarity_profiles(4.0, 6.0, 401).unwrap();
        for (f, s) in p.f_values.iter().zip(&p.s_values) {
            assert!(((0.5 * f).exp() - s).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(similarity_profiles(1.0, 6.0, 99).is_err());
    }

    #[test]
    fn far_field_jump() {
        for b in [0.1, 4.0, -3.0, 10.0] {
            let jump = hopf_cole_f(40.0, b) - hopf_cole_f(-40.0, b);
            assert!((jump - 0.5 * b).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_form_residuals() {
        for b in [0.5, 4.0, 10.0] {
            for i in 0..=120 {
                let a = -6.0 + 0.1 * i as f64;
                let (f1, f2) = hopf_cole_derivatives(a, b);
                assert!(nonlinear_residual(a, f1, f2).abs() < 1e-12);
                assert!(linear_residual(a, b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_amplitude_is_gaussian_integral() {
        let b = 1e-4;
        for a in [-3.0, 0.0, 1.5] {
            let lin = 0.5 * b * gaussian_cdf(a / SQRT_2);
            assert!((hopf_cole_f(a, b) - lin).abs() < 1e-3 * b);
        }
    }

    #[test]
    fn shooting_matches_closed_form() {
        let p = integrate_similarity(4.0, 6.0, 1e-3).unwrap();
        let worst = p
            .alpha_samples
            .iter()
            .zip(&p.f_values)
            .map(|(&a, &f)| (f - hopf_cole_f(a, 4.0)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }
}
