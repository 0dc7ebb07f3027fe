use ndelab::ivp::{integrate, IntegrationOptions};
use ndelab::models::*;
use ndelab::shooting::shoot_d0;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shock_profile() -> ProfileSolution {
    shoot_d0(50.0, 1e-6).unwrap().profile
}

#[test]
fn rescale_by_one_is_identity() {
    let p = shock_profile();
    let q = rescale(&p, 1.0).unwrap();
    assert_eq!(p.grid, q.grid);
    assert_eq!(p.values, q.values);
}

#[test]
fn rescale_by_two_keeps_the_residual_small() {
    let p = shock_profile();
    let base = residual(&p.model, &p).unwrap();
    let q = rescale(&p, 2.0).unwrap();
    assert!(q.residual_sup <= 10.0 * base.max(1e-12), "{} vs {}", q.residual_sup, base);
    // gₐ(az) = a⁵ g(z)
    let z = -3.0;
    let lhs = q.interpolate(2.0 * z).unwrap();
    assert!((lhs - 32.0 * p.interpolate(z).unwrap()).abs() < 1e-9 * lhs.abs().max(1.0));
}

#[test]
fn rescale_by_minus_one_is_the_odd_image() {
    let p = shock_profile();
    let q = rescale(&p, -1.0).unwrap();
    assert!(q.grid.windows(2).all(|w| w[1] > w[0]));
    for &z in &[0.5, 2.0, 10.0, 14.0] {
        let image = -p.interpolate(-z).unwrap();
        assert!((q.interpolate(z).unwrap() - image).abs() < 1e-12);
    }
    assert!((q.residual_sup - residual(&p.model, &p).unwrap()).abs() < 1e-12);
}

#[test]
fn rescale_rejects_zero_and_non_nde_models() {
    let p = shock_profile();
    assert!(matches!(rescale(&p, 0.0), Err(ModelError::ZeroScale)));
    let mut q = p.clone();
    q.model = ModelSpec::quintic_compacton(0.0, 0.0);
    assert!(matches!(rescale(&q, 2.0), Err(ModelError::NoScaling(_))));
}

#[test]
fn perturbed_profile_has_large_residual() {
    let mut p = shock_profile();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for v in p.values[4].iter_mut() {
        *v += 1e-3 * rng.gen_range(-1.0..1.0);
    }
    let r = residual(&p.model, &p).unwrap();
    assert!(r > 1e-2, "{r}");
}

fn propagate(spec: &ModelSpec, params: SeriesParams, z_eps: f64, to: f64) -> Vec<f64> {
    let y0 = series_init(spec, params, z_eps).unwrap();
    let traj = integrate(
        |z, y, dy| spec.rhs_into(z, y, dy),
        &y0,
        (z_eps, to),
        &IntegrationOptions::with_tol(1e-12, 1e-14),
    )
    .unwrap();
    traj.last_state().to_vec()
}

#[test]
fn series_launch_radius_does_not_matter() {
    let cases = [
        (ModelSpec::nde50().with_nu(0.0), SeriesParams::Shock { c: -1.0, d: 0.0693 }),
        (ModelSpec::blowup(1.0 / 9.0).unwrap(), SeriesParams::Odd { f1: -1.0, f3: 0.0718 }),
        (ModelSpec::global(0.2).unwrap(), SeriesParams::Odd { f1: -1.0, f3: -0.1 }),
    ];
    for (spec, params) in cases {
        let a = propagate(&spec, params, -1e-2, -0.4);
        let b = propagate(&spec, params, -5e-3, -0.4);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8 * x.abs().max(1.0), "{:?}: {x} vs {y}", spec.id);
        }
    }
}

#[test]
fn series_outside_radius_is_rejected() {
    let spec = ModelSpec::nde50();
    assert!(matches!(
        series_init(&spec, SeriesParams::Shock { c: -1.0, d: 0.0 }, -0.6),
        Err(ModelError::SeriesRadius(_))
    ));
}

#[test]
fn config_round_trip_preserves_every_field() {
    let spec = ModelSpec::blowup(1.0 / 9.0).unwrap().with_nu(3e-5);
    let back = ModelSpec::from_config(&spec.to_config()).unwrap();
    assert_eq!(spec, back);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regularization_vanishes_with_nu(
        g in prop_oneof![-3.0f64..-1e-2, 1e-2f64..3.0],
        g1 in -2.0f64..2.0,
        z in -20.0f64..-0.1,
        nu_exp in -8.0f64..-3.0,
    ) {
        let nu = 10f64.powf(nu_exp);
        let y = [g, g1, 0.3, -0.2, 0.1];
        let exact = ModelSpec::nde50().with_nu(0.0).top_derivative(z, &y);
        let reg = ModelSpec::nde50().with_nu(nu).top_derivative(z, &y);
        let balance = -0.2 * g1 * z;
        let bound = balance.abs() * nu * nu / (2.0 * g.abs().powi(3));
        prop_assert!((exact - reg).abs() <= bound * (1.0 + 1e-9) + 1e-15 * exact.abs());
    }

    #[test]
    fn odd_models_commute_with_reflection(
        g in 0.1f64..3.0, g1 in -2.0f64..2.0, g2 in -2.0f64..2.0, g3 in -2.0f64..2.0, g4 in -2.0f64..2.0,
        z in -10.0f64..-0.1,
    ) {
        // g ↦ −g(−z) sends (g, g′, g″, g‴, g⁗) to (−g, g′, −g″, g‴, −g⁗)
        let y = [g, g1, g2, g3, g4];
        let flipped = [-g, g1, -g2, g3, -g4];
        for spec in [ModelSpec::nde50().with_nu(0.0), ModelSpec::new(ModelId::Nde14).with_nu(0.0), ModelSpec::new(ModelId::Nde32).with_nu(0.0)] {
            let top = spec.top_derivative(z, &y);
            let image = spec.top_derivative(-z, &flipped);
            prop_assert!((image - top).abs() <= 1e-12 * top.abs().max(1.0));
        }
    }
}
