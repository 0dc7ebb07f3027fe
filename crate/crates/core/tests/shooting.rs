use ndelab::models::{rescale, ModelSpec, SeriesParams};
use ndelab::shooting::*;

fn nde_fate(d: f64, z_max: f64) -> FateTag {
    let launch = Launch::series(SeriesParams::Shock { c: -1.0, d });
    classify_fate(&ModelSpec::nde50(), &launch, z_max, DEFAULT_BAND).unwrap().tag
}

#[test]
fn nde50_fates_at_the_extremes_and_near_the_root() {
    assert_eq!(nde_fate(-1.0, 50.0), FateTag::GrowthPlus);
    assert_eq!(nde_fate(1.0, 50.0), FateTag::ZeroCrossing);
    // the growing mode ~ exp(0.535|z|^{5/4}) amplifies the bisection error, so boundedness
    // of the converged root is only observable on a short domain
    let d0 = shoot_d0(50.0, 1e-9).unwrap().converged_param;
    assert_eq!(nde_fate(d0, 10.0), FateTag::BoundedCandidate);
    assert_eq!(nde_fate(0.0692, 50.0), FateTag::GrowthPlus);
}

#[test]
fn d0_matches_reference_and_iteration_count() {
    let tol = 1e-6;
    let out = shoot_d0(50.0, tol).unwrap();
    assert!((out.converged_param - 0.0692).abs() < 1e-2, "{}", out.converged_param);
    assert_eq!(out.iterations, bisection_iterations(2.0, tol));
    assert!(out.bracket_hi - out.bracket_lo <= tol);
    assert_ne!(out.fate_lo.class(), out.fate_hi.class());
    let half = out.half_launch_param.unwrap();
    assert!((half - out.converged_param).abs() < 1e-4, "{half}");
}

#[test]
fn d0_is_stable_when_the_domain_doubles() {
    let short = shoot_d0(50.0, 1e-6).unwrap().converged_param;
    let long = shoot_d0(100.0, 1e-6).unwrap().converged_param;
    assert!((short - long).abs() < 2e-3, "{short} vs {long}");
}

#[test]
fn scaled_launch_reproduces_the_same_profile() {
    // C = −2 is the a = 2^{1/4} image of C = −1, with D scaled by a²
    let a = 2f64.powf(0.25);
    let unit = shoot_d0(50.0, 1e-10).unwrap();
    let scaled = bisect_parameter(&ModelSpec::nde50(), &ParamAxis::ShockCubic { c: -2.0 }, (-2.0, 2.0), 50.0, 1e-10)
        .unwrap();
    assert!((scaled.converged_param - a * a * unit.converged_param).abs() < 1e-6);
    let image = rescale(&unit.profile, a).unwrap();
    let worst = scaled
        .profile
        .grid
        .iter()
        .zip(&scaled.profile.values[0])
        .filter(|(z, _)| (-10.0..=-0.1).contains(*z))
        .map(|(&z, &g)| (g - image.interpolate(z).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn blowup_and_global_reference_values() {
    let blow = shoot_blowup(1.0 / 9.0, 20.0, 1e-6).unwrap();
    assert!((blow.converged_param.abs() - 0.0718).abs() < 1e-3, "{}", blow.converged_param);
    let diag = shoot_global_diagonal(1.0 / 9.0, 20.0, 1e-6).unwrap();
    assert!((diag.converged_param + 0.1155).abs() < 1e-2, "{}", diag.converged_param);
}

#[test]
fn global_scan_has_no_candidate_but_blowup_scan_does() {
    let grid = default_scan_grid();
    assert_eq!(grid.len(), 201);
    let global = explore_global_extension(&ModelSpec::global(1.0 / 9.0).unwrap(), &grid, 50.0).unwrap();
    assert_eq!(global.bounded_candidates, 0);
    let blowup = explore_global_extension(&ModelSpec::blowup(1.0 / 9.0).unwrap(), &grid, 50.0).unwrap();
    assert!(blowup.bounded_candidates >= 1);
    assert!(blowup.rows.iter().any(|r| r.refined && r.fate == FateTag::BoundedCandidate));
}

#[test]
fn collapse_jump_follows_the_power_law() {
    let alpha = 1.0 / 9.0;
    for t in [-1.0, -0.1, -1e-3] {
        let jump = collapse_jump(10.0, t, alpha);
        assert!((jump - 20.0 * (-t as f64).powf(alpha)).abs() < 1e-12);
    }
    assert_eq!(collapse_jump(10.0, 0.0, alpha), 0.0);
}
