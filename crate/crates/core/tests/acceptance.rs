//! One PASS/FAIL line per acceptance criterion; the test fails if any line fails.

use std::f64::consts::PI;
use std::time::Instant;

use ndelab::asymptotics::{bundle_dimension, euler_roots_compacton, wkbj_fit, BundleKind};
use ndelab::bvp::{default_shock, uniform_profile, Closure};
use ndelab::compactons::{
    explicit_profile, robustness_probe, subspace_closure_check, third_order_match, ExplicitKind,
};
use ndelab::models::ModelSpec;
use ndelab::riemann::*;
use ndelab::shooting::{
    default_scan_grid, explore_global_extension, shoot_blowup, shoot_d0, shoot_global_curvature,
    shoot_global_diagonal,
};
use num_complex::Complex64;

struct Report {
    failed: Vec<usize>,
}

impl Report {
    fn line(&mut self, n: usize, pass: bool, detail: String) {
        println!("criterion {n:2}: {} {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(n);
        }
    }
}

fn probe_grid() -> Vec<f64> {
    (0..=390).map(|i| 0.5 + 0.05 * i as f64).collect()
}

#[test]
fn acceptance_criteria() {
    let mut r = Report { failed: Vec::new() };

    let t = Instant::now();
    let k22 = explicit_profile(ExplicitKind::K22, 1001).residual_sup;
    let q55 = explicit_profile(ExplicitKind::Q55, 1001).residual_sup;
    let secs = t.elapsed().as_secs_f64();
    r.line(1, k22 < 1e-9 && q55 < 1e-9 && secs < 1.0, format!("K(2,2) {k22:.2e}, quintic {q55:.2e}, {secs:.3} s"));

    let want = [
        Complex64::new(-4.0, 0.0),
        Complex64::new(7.0, 0.0),
        Complex64::new(1.5, 111f64.sqrt() / 2.0),
        Complex64::new(1.5, -111f64.sqrt() / 2.0),
    ];
    let roots = euler_roots_compacton().roots;
    let worst = want
        .iter()
        .map(|w| roots.iter().map(|z| (z - w).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    r.line(2, roots.len() == 4 && worst < 1e-12, format!("{} roots, worst distance {worst:.1e}", roots.len()));

    let t = Instant::now();
    let d50 = shoot_d0(50.0, 1e-6).unwrap().converged_param;
    let d100 = shoot_d0(100.0, 1e-6).unwrap().converged_param;
    let secs = t.elapsed().as_secs_f64();
    r.line(
        3,
        (d50 - 0.069192424).abs() <= 1e-2 && (d100 - d50).abs() <= 2e-3 && secs < 30.0,
        format!("D0 = {d50:.7} (z_max 50), {d100:.7} (z_max 100), {secs:.2} s"),
    );

    let f3 = shoot_blowup(1.0 / 9.0, 50.0, 1e-8).unwrap().converged_param;
    r.line(4, (f3.abs() - 0.0718040128557).abs() <= 1e-3, format!("f'''(0) = {f3:.8} (sign from the f'(0) = -1 branch)"));

    let diag = shoot_global_diagonal(1.0 / 9.0, 50.0, 1e-8).unwrap().converged_param;
    let curv = shoot_global_curvature(1.0 / 9.0, 50.0, 1e-8).unwrap().converged_param;
    r.line(
        5,
        (diag + 0.115526).abs() <= 1e-2 && (curv + 0.16648).abs() <= 5e-3,
        format!("diagonal {diag:.7}, F''(0) {curv:.6}"),
    );

    let shock = default_shock(Closure::Dirichlet).unwrap();
    let fit = convergence_rate(&shock.profile, 1.0, &[1e-1, 1e-2, 1e-3, 1e-4]).unwrap();
    let slope = fit.slope.unwrap();
    let tail = convergence_rate(&shock.profile, 1.0, &[1e-8, 1e-9, 1e-10, 1e-11]).unwrap().slope.unwrap();
    let growth = global_l1_growth(&shock.profile, 0.1, &[1.0, 10.0, 50.0, 100.0]).unwrap();
    let grows = growth.windows(2).all(|w| w[1].distance > w[0].distance);
    r.line(
        6,
        (slope - 0.125).abs() <= 0.02 && grows,
        format!(
            "slope {slope:.4} on |t| in [1e-4, 1e-1] (asymptotic window [1e-11, 1e-8]: {tail:.4}); global L1 grows {:.3} -> {:.3}",
            growth[0].distance, growth[3].distance
        ),
    );

    let w = wkbj_fit(&shock.profile, -200.0, -20.0).unwrap();
    let a0 = 4.0 * 5f64.powf(-1.25);
    r.line(
        7,
        (w.envelope_exponent + 0.625).abs() <= 0.05
            && (w.phase_exponent - 1.25).abs() <= 0.05
            && (w.phase_constant / a0 - 1.0).abs() <= 0.02,
        format!("envelope {:.4}, phase {:.4}, a0 {:.5} vs {a0:.5}", w.envelope_exponent, w.phase_exponent, w.phase_constant),
    );

    let mut dims_ok = true;
    let mut seen = Vec::new();
    for alpha in [1.0 / 19.0, 1.0 / 9.0, 3.0 / 17.0] {
        let dims: Vec<usize> =
            BundleKind::ALL.iter().map(|&k| bundle_dimension(k, alpha, 1.0).unwrap().dimension).collect();
        dims_ok &= dims == [4, 5, 4, 3, 1, 2];
        seen.push(dims);
    }
    r.line(8, dims_ok, format!("{seen:?}"));

    let w5 = subspace_closure_check(&[1.0, 25.0, 144.0], 5, 8, 7).unwrap();
    let w7 = subspace_closure_check(&[1.0, 77.0, 1876.0, 14400.0], 7, 8, 7).unwrap();
    let off = subspace_closure_check(&[1.0, 25.0, 145.0], 5, 8, 7).unwrap();
    r.line(9, w5 < 1e-10 && w7 < 1e-10 && off > 1e-3, format!("W5 {w5:.1e}, W7 {w7:.1e}, perturbed {off:.2e}"));

    let grid = probe_grid();
    let exact = robustness_probe((25.0, 144.0), &grid).unwrap().minimum_near(PI).unwrap();
    let flat = robustness_probe((0.0, 0.0), &grid).unwrap().minimum;
    let pert = robustness_probe((25.5, 144.0), &grid).unwrap().minimum;
    let third = third_order_match(1.0, (5.0, 7.0)).unwrap();
    r.line(
        10,
        exact.1 < 1e-6 && (exact.0 - PI).abs() < 1e-3 && flat > 1e-3 && pert > 1e-3 && third.mismatch < 1e-8,
        format!(
            "(25,144) {:.1e} at {:.6}; (0,0) {flat:.3e}; (25.5,144) {pert:.3e}; third order {:.1e}",
            exact.1, exact.0, third.mismatch
        ),
    );

    let anti = [[1.3, -0.7, 2.1, 0.4, -5.5], [1e3, 1e-3, -7.0, 0.0, 42.0]]
        .iter()
        .all(|&p| rh_residual(&RHTuple::anti_symmetric(p)) == 0.0);
    let fixed = PartialRh {
        minus: [Some(1.0), Some(0.0), Some(0.0), Some(0.0), Some(3.0)],
        plus: [Some(1.0), Some(0.0), None, Some(0.0), Some(0.0)],
    };
    let sols = rh_solve(&fixed, &[]).unwrap();
    let worst = sols.iter().map(|s| s.residual).fold(0.0, f64::max);
    r.line(11, anti && sols.len() == 2 && worst < 1e-12, format!("anti-symmetric exact: {anti}; {} solutions, residual {worst:.1e}", sols.len()));

    let t5 = t5_shock_profile(1.0, 0.0).unwrap();
    let g50 = t5.profile.interpolate(-50.0).unwrap();
    let t5b = t5_shock_profile(1.0, 1.0).unwrap();
    r.line(
        12,
        t5.positive_on_left && t5.decreasing_on_left && (g50 - 1.0).abs() <= 1e-3 && (t5b.tail_exponent - 1.0).abs() <= 0.05,
        format!(
            "g(-50) = {g50:.6}; B>0 tail {:.4}; B=0 tail {:.4} (displayed {}, discrepancy flagged: {})",
            t5b.tail_exponent, t5.tail_exponent, t5.printed_exponent, t5.tail_discrepancy
        ),
    );

    let minus = delta_entropy_test(Shock::SMinus, &shock.profile, &DEFAULT_DELTAS).unwrap();
    let plus = delta_entropy_test(Shock::SPlus, &shock.profile, &DEFAULT_DELTAS).unwrap();
    let uniform = uniform_profile(60.0, 1.0).unwrap();
    let um = delta_entropy_test(Shock::SMinus, &uniform.profile, &DEFAULT_DELTAS).unwrap();
    let up = delta_entropy_test(Shock::SPlus, &uniform.profile, &DEFAULT_DELTAS).unwrap();
    let monotone = minus.distances.windows(2).all(|w| w[1] <= w[0]);
    r.line(
        13,
        minus.verdict == Verdict::Entropy
            && monotone
            && plus.verdict == Verdict::NonEntropy
            && um.verdict == Verdict::Entropy
            && up.verdict == Verdict::Entropy,
        format!("NDE50 S- {:?} {:?}; S+ {:?}; uniform {:?}/{:?}", minus.verdict, minus.distances, plus.verdict, um.verdict, up.verdict),
    );

    let scan = explore_global_extension(&ModelSpec::global(1.0 / 9.0).unwrap(), &default_scan_grid(), 50.0).unwrap();
    r.line(
        14,
        scan.bounded_candidates == 0,
        format!("{} orbits, {} bounded candidates (evidence: {})", scan.rows.len(), scan.bounded_candidates, scan.note),
    );

    assert!(r.failed.is_empty(), "failed criteria: {:?}", r.failed);
}
