use std::f64::consts::PI;

use ndelab::compactons::*;

fn probe_grid() -> Vec<f64> {
    (0..=390).map(|i| 0.5 + 0.05 * i as f64).collect()
}

#[test]
fn signed_branch_one_is_a_single_positive_hump() {
    let p = solve_signed_compacton(1).unwrap();
    assert!(p.center_value.unwrap() > 0.0);
    assert!((p.support.1 - 10.86285).abs() < 1e-3, "{}", p.support.1);
    assert!((p.center_value.unwrap() - 6.1009).abs() < 1e-3);
    assert!(p.sign_changes_near_interface >= 3);
    assert!(p.residual_sup < 1e-5);
    // f is monotone from the centre to the first zero
    let centre = p.grid.iter().position(|&y| y == 0.0).unwrap();
    let first_zero = (centre..p.grid.len()).find(|&i| p.values[i] <= 0.0).unwrap();
    assert!(p.values[centre..first_zero].windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn signed_branch_two_is_non_monotone() {
    let p = solve_signed_compacton(2).unwrap();
    assert!((p.support.1 - 14.67196).abs() < 1e-3);
    // a local minimum at the origin: F″(0) > 0 with F(0) > 0
    assert!(p.center_value.unwrap() > 0.0 && p.center_curvature.unwrap() > 0.0);
    assert!(p.sign_changes_near_interface >= 3);
    let sq = p.squared.as_ref().unwrap();
    let outside = p.grid.iter().zip(sq).filter(|(y, _)| y.abs() > p.support.1);
    assert!(outside.clone().count() > 0 && outside.clone().all(|(_, f)| *f == 0.0));
    let edge = p.detected_support.unwrap();
    assert!(edge < p.support.1 && edge > p.support.1 - 1.0);
}

#[test]
fn signed_profiles_are_even() {
    let p = solve_signed_compacton(1).unwrap();
    let n = p.grid.len();
    for i in 0..n {
        assert_eq!(p.grid[i], -p.grid[n - 1 - i]);
        assert_eq!(p.values[i], p.values[n - 1 - i]);
    }
}

#[test]
fn probe_finds_explicit_quintic_compacton() {
    let curve = robustness_probe((25.0, 144.0), &probe_grid()).unwrap();
    let (at, value) = curve.minimum_near(PI).unwrap();
    assert!((at - PI).abs() < 1e-6 && value < 1e-6, "{at} {value}");
    assert!(curve.minimum < 1e-6);
}

#[test]
fn pure_problem_never_matches() {
    let curve = robustness_probe((0.0, 0.0), &probe_grid()).unwrap();
    assert!(curve.minimum > 1e-3);
    // scale invariance makes the dimensionless mismatch constant in y₀
    let vals: Vec<f64> = curve.points.iter().filter_map(|p| p.1).collect();
    let spread = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vals.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1e-8 * vals[0]);
}

#[test]
fn perturbed_coefficients_break_matching() {
    let curve = robustness_probe((25.5, 144.0), &probe_grid()).unwrap();
    assert!(curve.minimum > 1e-3, "{}", curve.minimum);
}

#[test]
fn probe_rejects_bad_grid() {
    assert!(matches!(robustness_probe((0.0, 0.0), &[]), Err(CompactonError::BadGrid)));
    assert!(matches!(robustness_probe((0.0, 0.0), &[1.0, -1.0]), Err(CompactonError::BadGrid)));
}
