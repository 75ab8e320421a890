use proptest::prelude::*;
use smectic::energy::*;
use smectic::{GridSpec, MaterialParams, ScalarField3};

fn grid() -> GridSpec {
    GridSpec::new([-2.0; 3], [41, 41, 41], [0.1; 3]).unwrap()
}

fn bump(p: [f64; 3]) -> f64 {
    (1.0 + 0.4 * p[0]) * (-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / 0.5).exp()
}

#[test]
fn flat_layers_cost_nothing() {
    let params = MaterialParams::default();
    let phi = ScalarField3::from_fn(grid(), |p| p[2]).unwrap();
    let e = full_energy(&phi, &params).unwrap();
    // Grid coordinates carry roundoff, so "zero" is at that level.
    assert!(e.total < 1e-24);
    assert!(gamma_field(&phi, &params).unwrap().values.max_abs().unwrap() < 1e-12);
    assert!(el_residual(&phi, &params).unwrap().max_abs().unwrap() < 1e-9);
}

#[test]
fn decomposition_reproduces_total() {
    let params = MaterialParams::with_lambda(0.7, 0.1).unwrap();
    let phi = ScalarField3::from_fn(grid(), |p| p[2] - 0.3 * bump(p)).unwrap();
    for gauge in [0.0, 2.5, -4.0] {
        let e = full_energy_gauged(&phi, &params, gauge).unwrap();
        let rel = (e.decomposed_total(&params) - e.total).abs() / e.total;
        assert!(rel < 0.01, "gauge {gauge}: {rel}");
        assert_eq!(e.phi_gauge, gauge);
    }
}

#[test]
fn boundary_flux_matches_volume_integral() {
    let phi = ScalarField3::from_fn(grid(), |p| p[2] - 0.3 * bump(p)).unwrap();
    let flux = gauss_boundary_flux(&phi).unwrap();
    let e = full_energy(&phi, &MaterialParams::default()).unwrap();
    assert!((flux - e.gauss_boundary).abs() < 0.02 * e.gauss_boundary.abs().max(1e-3), "{flux} vs {}", e.gauss_boundary);
}

#[test]
fn masked_input_respected() {
    let g = grid();
    let phi = ScalarField3::from_fn_masked(g, |p| Ok(p[2] - 0.2 * bump(p)), |p| p[0].hypot(p[2]) < 0.3).unwrap();
    let e = full_energy(&phi, &MaterialParams::default()).unwrap();
    assert!(e.masked_fraction > phi.masked_fraction());
    assert_eq!(e.active_points, ((1.0 - e.masked_fraction) * g.len() as f64).round() as usize);
}

#[test]
fn invalid_params_rejected() {
    let phi = ScalarField3::from_fn(grid(), |p| p[2]).unwrap();
    let mut p = MaterialParams::default();
    p.bend_modulus = -1.0;
    assert!(full_energy(&phi, &p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn energy_is_shift_invariant(c in -10.0f64..10.0, eps in 0.0f64..0.3) {
        let params = MaterialParams::default();
        let g = GridSpec::new([-1.5; 3], [21, 21, 21], [0.15; 3]).unwrap();
        let a = full_energy(&ScalarField3::from_fn(g, |p| p[2] - eps * bump(p)).unwrap(), &params).unwrap();
        let b = full_energy(&ScalarField3::from_fn(g, |p| p[2] - eps * bump(p) + c).unwrap(), &params).unwrap();
        prop_assert!((a.total - b.total).abs() <= 1e-9 * (1.0 + a.total));
    }

    #[test]
    fn linear_energy_non_negative_and_quadratic(eps in 0.01f64..1.0) {
        let params = MaterialParams::default();
        let g = GridSpec::new([-1.5; 3], [21, 21, 21], [0.15; 3]).unwrap();
        let one = linear_energy(&ScalarField3::from_fn(g, bump).unwrap(), &params).unwrap();
        let e = linear_energy(&ScalarField3::from_fn(g, |p| eps * bump(p)).unwrap(), &params).unwrap();
        prop_assert!(one > 0.0);
        prop_assert!((e - eps * eps * one).abs() <= 1e-12 * one);
    }
}
