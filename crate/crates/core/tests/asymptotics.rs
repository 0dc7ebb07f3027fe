use ndelab::asymptotics::*;
use ndelab::bvp::{solve_shock_profile, BvpProblem, Closure, Guess};
use ndelab::models::{ModelId, ModelSpec};
use proptest::prelude::*;

#[test]
fn envelope_unit_point_and_power_law() {
    let a0 = wkbj_phase_constant();
    assert!((a0 - (256.0f64 / 3125.0).powf(0.25)).abs() < 1e-15);
    let (env, phase) = wkbj_envelope(-1.0, 2.5).unwrap();
    assert!((env - 2.5).abs() < 1e-15 && (phase - a0).abs() < 1e-15);
    let ratio = wkbj_envelope(-4.0, 1.0).unwrap().0 / wkbj_envelope(-1.0, 1.0).unwrap().0;
    assert!((ratio - 0.4204482076).abs() < 1e-9);
    assert!(wkbj_envelope(1.0, 1.0).is_err());
}

#[test]
fn bundle_dimensions_are_locally_constant_in_alpha() {
    let alphas: Vec<f64> = (1..=11).map(|k| 0.25 * k as f64 / 12.0).collect();
    for kind in [BundleKind::FarfieldBlowup, BundleKind::FarfieldGlobal] {
        let dims: Vec<usize> = alphas.iter().map(|&a| bundle_dimension(kind, a, 1.0).unwrap().dimension).collect();
        assert!(dims.iter().all(|&d| d == dims[0]), "{kind:?}: {dims:?}");
    }
    assert_eq!(bundle_dimension(BundleKind::InterfaceNonneg, 0.1, 1.0).unwrap().dimension, 1);
    assert_eq!(bundle_dimension(BundleKind::InterfaceSigned, 0.1, 1.0).unwrap().dimension, 2);
}

#[test]
fn interface_expansion_of_nde50_carries_a_log() {
    let e = interface_expansion(ModelId::Nde50, 3.0).unwrap();
    let t = &e.terms[0];
    // direct substitution fixes the coefficient at z₀/30
    assert!((t.coefficient - 3.0 / 30.0).abs() < 1e-15);
    assert_eq!((t.exponent, t.log_power), (4.0, 1));
}

#[test]
fn kernel_has_unit_mass_and_solves_its_equation() {
    let grid: Vec<f64> = (0..=800).map(|i| -20.0 + 0.05 * i as f64).collect();
    let report = linear_kernel(&grid).unwrap();
    assert!(report.converged);
    assert!((report.mass - 1.0).abs() < 1e-6, "{}", report.mass);
    // F‴ against its derivative F⁗ = yF/5 on |y| ≤ 5
    let p = &report.profile;
    let d4 = ndelab::models::differentiate(&p.grid, &p.values[3]);
    let worst = p
        .grid
        .iter()
        .enumerate()
        .filter(|(_, y)| y.abs() <= 5.0)
        .map(|(i, &y)| (d4[i] - y * p.values[0][i] / 5.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn kernel_agrees_with_the_ode_solution() {
    let grid: Vec<f64> = (0..=120).map(|i| -3.0 + 0.05 * i as f64).collect();
    let report = linear_kernel(&grid).unwrap();
    let at_zero = report.profile.interpolate(0.0).unwrap();
    let by_ode = kernel_by_ode(&grid, at_zero);
    for (i, &y) in grid.iter().enumerate() {
        let diff = (report.profile.interpolate(y).unwrap() - by_ode[i]).abs();
        assert!(diff < 1e-5, "y={y}: {diff}");
    }
}

#[test]
fn partial_mass_grows_like_three_eighths_power() {
    // increments M(2Z) − M(Z) drop the fixed contribution of the inner overshoots;
    // the longer domain keeps the closure away from the largest window
    let problem = BvpProblem::shock(ModelSpec::nde50(), 400.0, Closure::Dirichlet);
    let sol = solve_shock_profile(&problem, &Guess::Tanh { sign: 1.0 }).unwrap();
    let windows = [20.0, 40.0, 80.0, 160.0, 320.0];
    let mass = partial_l1_mass(&sol.profile, &windows);
    let lx: Vec<f64> = windows[..4].iter().map(|w| w.ln()).collect();
    let ly: Vec<f64> = mass.windows(2).map(|m| (m[1] - m[0]).ln()).collect();
    let (slope, _) = linear_fit(&lx, &ly);
    assert!((slope - 0.375).abs() < 0.05, "{slope}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelope_scales_with_exponent_minus_five_eighths(z in -500.0f64..-1.0, k in 1.1f64..10.0, c0 in 0.1f64..5.0) {
        let a = wkbj_envelope(z, c0).unwrap().0;
        let b = wkbj_envelope(k * z, c0).unwrap().0;
        prop_assert!((b / a - k.powf(-0.625)).abs() < 1e-12);
    }

    #[test]
    fn blowup_roots_have_small_residuals(alpha in 0.01f64..0.24) {
        let set = char_poly_blowup(alpha).unwrap();
        prop_assert_eq!(set.degree(), 5);
        prop_assert!(set.max_residual() < 1e-10);
    }
}
