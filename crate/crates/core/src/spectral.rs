//! Fourier solution of the linearized theory.
//!
//! Transforms are continuum normalized on the periodic box of the grid:
//! `f(q) = dV sum_x f(x) e^{-i q.x}` and `f(x) = (1/V) sum_q f(q) e^{i q.x}`,
//! with `x` measured from the grid origin, so that `2 pi delta(q_y)` becomes
//! `L_y` on the `q_y = 0` plane. With
//! `d -> i q` and `curl grad u = m`, the transverse part of `grad u` is
//! `tau = i q x m / q^2` and the longitudinal potential is
//! `sigma = -q_z (1 - lambda^2 q_perp^2)(q_x m_y - q_y m_x) / (q^2 (q_z^2 + lambda^2 q_perp^4))`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridSpec, MaterialParams, ScalarField3, VectorField3};
use crate::topology::{DefectKind, DefectLine};

/// Fourier coefficients on the dual of a real-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    /// Real-space grid; its box lengths fix the wavevectors.
    pub grid: GridSpec,
    /// One coefficient array per component, in FFT order.
    pub coeffs: Vec<Vec<Complex64>>,
}

/// Signed FFT index of position `i` on an axis of `n` points.
fn signed_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl SpectralField {
    pub fn zeros(grid: GridSpec, components: usize) -> Result<Self> {
        grid.validate()?;
        Ok(Self {
            grid,
            coeffs: vec![vec![Complex64::new(0.0, 0.0); grid.len()]; components],
        })
    }

    pub fn components(&self) -> usize {
        self.coeffs.len()
    }

    pub fn wave_index(&self, idx: usize) -> [i64; 3] {
        let ijk = self.grid.ijk(idx);
        [0, 1, 2].map(|a| signed_index(ijk[a], self.grid.extents[a]))
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        wavevector(&self.grid, idx)
    }

    /// True when some axis sits on its Nyquist index.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let ijk = self.grid.ijk(idx);
        (0..3).any(|a| self.grid.extents[a] % 2 == 0 && ijk[a] == self.grid.extents[a] / 2)
    }

    /// Index of the mode `-q`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let ijk = self.grid.ijk(idx);
        let e = self.grid.extents;
        let c = [0, 1, 2].map(|a| (e[a] - ijk[a]) % e[a]);
        self.grid.index(c[0], c[1], c[2])
    }

    /// Largest `|f(q) - conj f(-q)|` relative to the largest coefficient,
    /// over modes off the Nyquist planes (those are discarded by the solver).
    pub fn hermitian_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut peak: f64 = 0.0;
        for comp in &self.coeffs {
            for (idx, c) in comp.iter().enumerate() {
                if self.is_nyquist(idx) {
                    continue;
                }
                peak = peak.max(c.norm());
                worst = worst.max((c - comp[self.conjugate_index(idx)].conj()).norm());
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            worst / peak
        }
    }

    /// Forward transform of each component of a real vector field.
    pub fn from_vector_field(v: &VectorField3) -> Result<Self> {
        let coeffs = (0..3)
            .map(|c| forward(&v.grid, &v.values.iter().map(|x| x[c]).collect::<Vec<_>>()))
            .collect();
        Ok(Self { grid: v.grid, coeffs })
    }

    pub fn from_scalar_field(f: &ScalarField3) -> Result<Self> {
        Ok(Self {
            grid: f.grid,
            coeffs: vec![forward(&f.grid, &f.values)],
        })
    }
}

fn wavevector(grid: &GridSpec, idx: usize) -> [f64; 3] {
    let ijk = grid.ijk(idx);
    let l = grid.box_lengths();
    [0, 1, 2].map(|a| 2.0 * PI * signed_index(ijk[a], grid.extents[a]) as f64 / l[a])
}

/// In-place complex 3D FFT along all three axes, unnormalized.
fn fft3(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..3 {
        let n = grid.extents[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let stride = grid.stride(axis);
        let lines = grid.len() / n;
        // Line l starts at the l-th node whose coordinate along `axis` is 0.
        let starts: Vec<usize> = (0..grid.len()).filter(|&i| grid.ijk(i)[axis] == 0).collect();
        debug_assert_eq!(starts.len(), lines);
        let mut buf: Vec<Complex64> = Vec::with_capacity(grid.len());
        for &s in &starts {
            for t in 0..n {
                buf.push(data[s + t * stride]);
            }
        }
        buf.par_chunks_mut(n).for_each(|line| fft.process(line));
        for (l, &s) in starts.iter().enumerate() {
            for t in 0..n {
                data[s + t * stride] = buf[l * n + t];
            }
        }
    }
}

/// `dV sum f e^{-iqx}`.
pub fn forward(grid: &GridSpec, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft3(grid, &mut data, false);
    let dv = grid.cell_volume();
    data.iter_mut().for_each(|c| *c *= dv);
    data
}

/// Real part of `(1/V) sum f(q) e^{iqx}`.
pub fn inverse(grid: &GridSpec, coeffs: &[Complex64]) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    fft3(grid, &mut data, true);
    let v: f64 = grid.box_lengths().iter().product();
    data.iter().map(|c| c.re / v).collect()
}

/// Analytic spectrum `m(q)` of straight lines in the periodic box.
///
/// An edge line along `y` through `(x0, z0)` contributes
/// `n a L_y e^{-i(q_x x0 + q_z z0)}` to `m_y` on the `q_y = 0` plane; a screw
/// along `z` contributes `n a L_z e^{-i(q_x x0 + q_y y0)}` to `m_z` on `q_z = 0`.
pub fn defect_spectrum(defects: &[DefectLine], grid: &GridSpec, a: f64) -> Result<SpectralField> {
    if !(a > 0.0) {
        return Err(invalid("a", "layer spacing must be positive"));
    }
    let mut out = SpectralField::zeros(*grid, 3)?;
    let l = grid.box_lengths();
    for d in defects {
        d.validate()?;
        let sign = d
            .axis_sign()
            .ok_or_else(|| Error::UnsupportedGeometry("defect line is not axis aligned".into()))?;
        let ax = d.kind.axis();
        let strength = sign * d.n as f64 * a * l[ax];
        let comp = &mut out.coeffs[ax];
        comp.par_iter_mut().enumerate().for_each(|(idx, c)| {
            let ijk = grid.ijk(idx);
            if ijk[ax] != 0 {
                return;
            }
            let q = wavevector(grid, idx);
            let phase: f64 = (0..3)
                .filter(|&k| k != ax)
                .map(|k| q[k] * (d.anchor[k] - grid.origin[k]))
                .sum();
            *c += Complex64::from_polar(strength, -phase);
        });
        debug_assert!(matches!(d.kind, DefectKind::Edge | DefectKind::Screw));
    }
    Ok(out)
}

/// Result of [`solve_linear`].
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub tau: SpectralField,
    pub sigma: SpectralField,
    /// `grad u = grad sigma + tau` in real space.
    pub grad_u: VectorField3,
}

fn check_three(m: &SpectralField) -> Result<()> {
    if m.components() != 3 {
        return Err(invalid("m", "defect density needs three components"));
    }
    Ok(())
}

/// Rejects a density whose modes are not transverse.
pub fn check_divergence_free(m: &SpectralField) -> Result<()> {
    check_three(m)?;
    for idx in 0..m.grid.len() {
        let q = m.wavevector(idx);
        let mv = [m.coeffs[0][idx], m.coeffs[1][idx], m.coeffs[2][idx]];
        let qm = mv[0] * q[0] + mv[1] * q[1] + mv[2] * q[2];
        let qn = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        let mn = (mv[0].norm_sqr() + mv[1].norm_sqr() + mv[2].norm_sqr()).sqrt();
        if qm.norm() > 1e-10 * qn * mn + 1e-300 {
            return Err(Error::NotDivergenceFree { residual: qm.norm(), q });
        }
    }
    Ok(())
}

fn in_window(q: [f64; 3], xi: f64) -> bool {
    q[2].abs() <= PI / xi * (1.0 + 1e-12)
}

/// Solve for `tau`, `sigma` and `grad u` given `m(q)`.
///
/// The `q = 0` mode of `m` is discarded (a uniform neutralizing background),
/// modes with `|q_z| > pi / xi` and grid Nyquist modes are left out of the
/// real-space reconstruction.
pub fn solve_linear(m: &SpectralField, params: &MaterialParams) -> Result<LinearSolution> {
    params.validate()?;
    check_divergence_free(m)?;
    let lam2 = params.lambda().powi(2);
    let grid = m.grid;
    let n = grid.len();
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let modes: Vec<([Complex64; 3], Complex64, [Complex64; 3])> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let q = wavevector(&grid, idx);
            let q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
            if q2 == 0.0 {
                return ([zero; 3], zero, [zero; 3]);
            }
            let mv = [m.coeffs[0][idx], m.coeffs[1][idx], m.coeffs[2][idx]];
            let qxm = [
                mv[2] * q[1] - mv[1] * q[2],
                mv[0] * q[2] - mv[2] * q[0],
                mv[1] * q[0] - mv[0] * q[1],
            ];
            let tau = qxm.map(|c| i * c / q2);
            let qp2 = q[0] * q[0] + q[1] * q[1];
            let sigma = -q[2] * (1.0 - lam2 * qp2) * qxm[2] / (q2 * (q[2] * q[2] + lam2 * qp2 * qp2));
            let keep = in_window(q, params.xi) && !is_nyquist(&grid, idx);
            let w = if keep {
                [0, 1, 2].map(|c| i * q[c] * sigma + tau[c])
            } else {
                [zero; 3]
            };
            (tau, sigma, w)
        })
        .collect();
    let mut tau = SpectralField::zeros(grid, 3)?;
    let mut sigma = SpectralField::zeros(grid, 1)?;
    let mut w = [vec![zero; n], vec![zero; n], vec![zero; n]];
    for (idx, (t, s, g)) in modes.into_iter().enumerate() {
        for c in 0..3 {
            tau.coeffs[c][idx] = t[c];
            w[c][idx] = g[c];
        }
        sigma.coeffs[0][idx] = s;
    }
    let comps: Vec<Vec<f64>> = w.par_iter().map(|c| inverse(&grid, c)).collect();
    let values = (0..n).map(|k| [comps[0][k], comps[1][k], comps[2][k]]).collect();
    let grad_u = VectorField3::new(grid, values, vec![false; n])?;
    Ok(LinearSolution { tau, sigma, grad_u })
}

fn is_nyquist(grid: &GridSpec, idx: usize) -> bool {
    let ijk = grid.ijk(idx);
    (0..3).any(|a| grid.extents[a] % 2 == 0 && ijk[a] == grid.extents[a] / 2)
}

/// `(B lambda^2 / 2) (1/V) sum_q |z.(q x m)|^2 / (q_z^2 + lambda^2 q_perp^4)`
/// over `q != 0`, `|q_z| <= pi / xi`.
pub fn spectral_energy(m: &SpectralField, params: &MaterialParams) -> Result<f64> {
    params.validate()?;
    check_divergence_free(m)?;
    let lam2 = params.lambda().powi(2);
    let grid = m.grid;
    let terms: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let q = wavevector(&grid, idx);
            let qp2 = q[0] * q[0] + q[1] * q[1];
            if qp2 + q[2] * q[2] == 0.0 || !in_window(q, params.xi) {
                return 0.0;
            }
            let cz = m.coeffs[1][idx] * q[0] - m.coeffs[0][idx] * q[1];
            if cz.norm_sqr() == 0.0 {
                return 0.0;
            }
            cz.norm_sqr() / (q[2] * q[2] + lam2 * qp2 * qp2)
        })
        .collect();
    let v: f64 = grid.box_lengths().iter().product();
    Ok(0.5 * params.bulk_modulus * lam2 * crate::grid::pairwise_sum(&terms) / v)
}

/// Closed-form edge energy `B L_y n^2 a^2 sqrt(pi / 2) sqrt(lambda / xi)`.
pub fn edge_energy_closed_form(params: &MaterialParams, n: i64) -> f64 {
    let na = n as f64 * params.a;
    params.bulk_modulus * params.ly * na * na * (PI / 2.0).sqrt() * (params.lambda() / params.xi).sqrt()
}

/// Value of the windowed quadrature in the continuum,
/// `B L_y b^2 / (2 sqrt(2 pi)) sqrt(lambda / xi)`. It is smaller than
/// [`edge_energy_closed_form`] by exactly `2 pi`.
pub fn edge_energy_windowed(params: &MaterialParams, n: i64) -> f64 {
    let na = n as f64 * params.a;
    params.bulk_modulus * params.ly * na * na / (2.0 * (2.0 * PI).sqrt()) * (params.lambda() / params.xi).sqrt()
}

/// Square-completion edge energy `B L_y b^2 / (8 sqrt(2 pi)) sqrt(lambda / xi')`.
pub fn square_completion_energy(params: &MaterialParams, n: i64, xi_prime: f64) -> f64 {
    let b = n as f64 * params.a;
    params.bulk_modulus * params.ly * b * b / (8.0 * (2.0 * PI).sqrt()) * (params.lambda() / xi_prime).sqrt()
}

/// Cutoff at which the square-completion and closed-form energies agree.
pub fn matched_cutoff(xi: f64) -> f64 {
    xi / (64.0 * PI * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::DefectKind;

    fn box_grid(nx: usize, nz: usize, h: f64) -> GridSpec {
        let lx = nx as f64 * h;
        let lz = nz as f64 * h;
        GridSpec::new([-lx / 2.0, 0.0, -lz / 2.0], [nx, 4, nz], [h, 1.0, h]).unwrap()
    }

    #[test]
    fn fft_round_trip() {
        let g = GridSpec::new([0.0; 3], [6, 5, 4], [0.3, 0.7, 1.1]).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let back = inverse(&g, &forward(&g, &vals));
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_of_plane_wave() {
        let g = GridSpec::new([0.0; 3], [8, 4, 4], [0.5; 3]).unwrap();
        let l = g.box_lengths();
        let f: Vec<f64> = (0..g.len()).map(|i| (2.0 * PI * g.point_of(i)[0] / l[0]).cos()).collect();
        let c = forward(&g, &f);
        let v: f64 = l.iter().product();
        assert!((c[1].re - v / 2.0).abs() < 1e-12);
        assert!(c[2].norm() < 1e-12);
    }

    #[test]
    fn edge_spectrum_on_plane() {
        let g = box_grid(16, 16, 0.5);
        let d = DefectLine::new(DefectKind::Edge, 1, [0.0; 3]).unwrap();
        let m = defect_spectrum(&[d], &g, 1.0).unwrap();
        for idx in 0..g.len() {
            let on = g.ijk(idx)[1] == 0;
            assert_eq!(m.coeffs[1][idx].norm() > 0.0, on);
            assert_eq!(m.coeffs[0][idx].norm(), 0.0);
        }
        assert!((m.coeffs[1][0].re - 4.0).abs() < 1e-15);
        assert!(m.hermitian_error() < 1e-12);
        check_divergence_free(&m).unwrap();
    }

    #[test]
    fn opposite_edges_have_sine_structure() {
        let g = box_grid(16, 16, 0.5);
        let d = 1.5;
        let a = DefectLine::new(DefectKind::Edge, 1, [d / 2.0, 0.0, 0.0]).unwrap();
        let b = DefectLine::new(DefectKind::Edge, -1, [-d / 2.0, 0.0, 0.0]).unwrap();
        let m = defect_spectrum(&[a, b], &g, 1.0).unwrap();
        assert!(m.coeffs[1][0].norm() < 1e-15);
        for i in 0..16 {
            let idx = g.index(i, 0, 3);
            let qx = m.wavevector(idx)[0];
            let q = m.wavevector(idx);
            // Phases are measured from the grid origin.
            let shift = Complex64::from_polar(1.0, q[0] * g.origin[0] + q[2] * g.origin[2]);
            let expect = Complex64::new(0.0, -2.0 * 4.0 * (qx * d / 2.0).sin()) * shift;
            assert!((m.coeffs[1][idx] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn non_transverse_density_rejected() {
        let g = box_grid(8, 8, 1.0);
        let mut m = SpectralField::zeros(g, 3).unwrap();
        m.coeffs[0][1] = Complex64::new(1.0, 0.0);
        assert!(matches!(check_divergence_free(&m), Err(Error::NotDivergenceFree { .. })));
    }

    #[test]
    fn tau_is_transverse_and_screw_sigma_vanishes() {
        let g = GridSpec::new([-8.0, -8.0, 0.0], [32, 32, 4], [0.5; 3]).unwrap();
        let d = DefectLine::new(DefectKind::Screw, 1, [0.3, 0.1, 0.0]).unwrap();
        let m = defect_spectrum(&[d], &g, 1.0).unwrap();
        let p = MaterialParams::default();
        let sol = solve_linear(&m, &p).unwrap();
        for idx in 0..g.len() {
            let q = m.wavevector(idx);
            let t = &sol.tau.coeffs;
            let qt = t[0][idx] * q[0] + t[1][idx] * q[1] + t[2][idx] * q[2];
            assert!(qt.norm() < 1e-12);
            assert_eq!(sol.sigma.coeffs[0][idx].norm(), 0.0);
        }
        assert!(spectral_energy(&m, &p).unwrap() == 0.0);
    }

    #[test]
    fn zero_density_gives_zero() {
        let g = box_grid(8, 8, 1.0);
        let m = SpectralField::zeros(g, 3).unwrap();
        let sol = solve_linear(&m, &MaterialParams::default()).unwrap();
        assert!(sol.grad_u.values.iter().all(|v| v.iter().all(|c| *c == 0.0)));
        assert_eq!(spectral_energy(&m, &MaterialParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn energy_quadratic_and_translation_invariant() {
        let g = box_grid(64, 64, 0.5);
        let p = MaterialParams::with_lambda(1.0, 1.0).unwrap();
        let one = DefectLine::new(DefectKind::Edge, 1, [0.0; 3]).unwrap();
        let two = DefectLine::new(DefectKind::Edge, 2, [0.0; 3]).unwrap();
        let moved = DefectLine::new(DefectKind::Edge, 1, [1.3, 0.0, -2.1]).unwrap();
        let e1 = spectral_energy(&defect_spectrum(&[one], &g, 1.0).unwrap(), &p).unwrap();
        let e2 = spectral_energy(&defect_spectrum(&[two], &g, 1.0).unwrap(), &p).unwrap();
        let em = spectral_energy(&defect_spectrum(&[moved], &g, 1.0).unwrap(), &p).unwrap();
        assert!((e2 / e1 - 4.0).abs() < 1e-12);
        assert!((em / e1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_forms() {
        let p = MaterialParams::with_lambda(1.0, 0.1).unwrap();
        assert_eq!(edge_energy_closed_form(&p, 0), 0.0);
        let ratio = edge_energy_closed_form(&p, 1) / edge_energy_windowed(&p, 1);
        assert!((ratio - 2.0 * PI).abs() < 1e-12);
        let sq = square_completion_energy(&p, 1, matched_cutoff(p.xi));
        assert!((sq / edge_energy_closed_form(&p, 1) - 1.0).abs() < 1e-12);
    }
}
