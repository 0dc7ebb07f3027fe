//! Thin adapters from resolved parameters to library calls and artifacts.

use ndelab::asymptotics::{bundle_dimension, char_poly_blowup, linear_kernel, AsymptoticsError, BundleKind};
use ndelab::bvp::{solve_shock_profile, BvpError, BvpProblem, BvpSolution, Closure, Guess, DEFAULT_HALF_LENGTH};
use ndelab::compactons::{
    explicit_profile, robustness_probe, solve_signed_compacton, subspace_closure_check, third_order_match,
    CompactonError, CompactonProfile, ExplicitKind,
};
use ndelab::models::{ModelError, ModelId, ModelSpec, DEFAULT_NU};
use ndelab::riemann::{
    convergence_rate, delta_entropy_test, odd_extension, reflect_to_rarefaction, rh_residual, rh_solve, t5_shock_profile,
    PartialRh, RHTuple, RiemannError, Shock, DEFAULT_DELTAS,
};
use ndelab::shooting::{
    explore_global_extension, shoot_blowup, shoot_d0, shoot_global_curvature, shoot_global_diagonal, ScanRow,
    ShootingError, ShootingOutcome,
};
use serde_json::{json, Value};

use crate::output::{num, Outputs, ENTROPY_HEADER, PROBE_HEADER};
use crate::settings::Params;
use crate::{CliError, Command, ShockArgs};

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<BvpError> for CliError {
    fn from(e: BvpError) -> Self {
        match e {
            BvpError::Diverged { .. }
            | BvpError::RefinementCap { .. }
            | BvpError::Continuation { .. }
            | BvpError::Linear(_) => CliError::NonConvergence(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ShootingError> for CliError {
    fn from(e: ShootingError) -> Self {
        match e {
            ShootingError::Ivp(_) | ShootingError::SameFate(_) | ShootingError::NotDichotomous(_) => {
                CliError::NonConvergence(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CompactonError> for CliError {
    fn from(e: CompactonError) -> Self {
        match e {
            CompactonError::NoConvergence(_) | CompactonError::Ivp(_) => CliError::NonConvergence(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<AsymptoticsError> for CliError {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::KernelQuadrature(_) | AsymptoticsError::TooFewExtrema(_) => {
                CliError::NonConvergence(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<RiemannError> for CliError {
    fn from(e: RiemannError) -> Self {
        match e {
            RiemannError::NoRealSolution | RiemannError::Continuum | RiemannError::Ivp(_) => {
                CliError::NonConvergence(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub fn dispatch(command: &Command, p: &mut Params, out: &mut Outputs) -> Result<(), CliError> {
    match command {
        Command::SolveShock(args) => solve_shock(args, p, out),
        Command::ShootD0 { model, zmax, tol } => {
            let model = p.text("model", model, "nde50");
            if model.parse::<ModelId>()? != ModelId::Nde50 {
                return Err(CliError::Usage(format!("shoot-d0 applies to nde50 only, got {model}")));
            }
            let z_max = p.positive("zmax", zmax, 50.0)?;
            let tol = p.positive("tol", tol, 1e-4)?;
            write_shot(&shoot_d0(z_max, tol)?, out)
        }
        Command::BlowupProfile { alpha, ymax, tol } => {
            let alpha = p.real("alpha", alpha, 1.0 / 9.0)?;
            let y_max = p.positive("ymax", ymax, 50.0)?;
            let tol = p.positive("tol", tol, 1e-4)?;
            write_shot(&shoot_blowup(alpha, y_max, tol)?, out)
        }
        Command::GlobalExtensionScan { alpha, ymax, f4_min, f4_max, f4_step, shoot, tol } => {
            let alpha = p.real("alpha", alpha, 1.0 / 9.0)?;
            let y_max = p.positive("ymax", ymax, 50.0)?;
            if let Some(axis) = shoot {
                let tol = p.positive("tol", tol, 1e-4)?;
                p.note("shoot", json!(axis));
                let outcome = match axis.as_str() {
                    "diagonal" => shoot_global_diagonal(alpha, y_max, tol)?,
                    "curvature" => shoot_global_curvature(alpha, y_max, tol)?,
                    other => return Err(CliError::Usage(format!("--shoot must be diagonal or curvature, got {other}"))),
                };
                return write_shot(&outcome, out);
            }
            let lo = p.real("f4_min", f4_min, -10.0)?;
            let hi = p.real("f4_max", f4_max, 10.0)?;
            let step = p.positive("f4_step", f4_step, 0.1)?;
            if hi < lo {
                return Err(CliError::Usage("f4_max must not be below f4_min".into()));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            let grid: Vec<[f64; 5]> = (0..=n).map(|k| [1.0, -1.0, 0.0, 0.0, lo + k as f64 * step]).collect();
            let report = explore_global_extension(&ModelSpec::global(alpha)?, &grid, y_max)?;
            let rows: Vec<Vec<String>> = report.rows.iter().map(scan_record).collect();
            out.csv(".csv", &["f0", "f1", "f2", "f3", "f4", "fate", "z", "refined"], &rows)?;
            out.json(&json!({
                "model": report.model,
                "alpha": report.alpha,
                "y_max": report.y_max,
                "counts": report.counts,
                "bounded_candidates": report.bounded_candidates,
                "evidence": "numerical evidence only, not a proof",
                "note": report.note,
            }))?;
            Ok(())
        }
        Command::CharRoots { alpha } => {
            let alpha = p.real("alpha", alpha, 1.0 / 9.0)?;
            let roots = char_poly_blowup(alpha)?;
            let real = roots.real_roots(1e-9);
            out.json(&json!({
                "alpha": alpha,
                "root_set": roots,
                "real_roots": real,
                "negative_real_roots": real.iter().filter(|r| **r < 0.0).count(),
            }))?;
            Ok(())
        }
        Command::BundleDims { alpha, c0 } => {
            let alpha = p.real("alpha", alpha, 1.0 / 9.0)?;
            let c0 = p.positive("c0", c0, 1.0)?;
            let counts = BundleKind::ALL
                .iter()
                .map(|&k| bundle_dimension(k, alpha, c0))
                .collect::<Result<Vec<_>, _>>()?;
            out.json(&json!({ "alpha": alpha, "c0": c0, "bundles": counts }))?;
            Ok(())
        }
        Command::Kernel { ymax, points } => {
            let y_max = p.positive("ymax", ymax, 20.0)?;
            let n = p.count("points", points, 801)?;
            if n < 11 {
                return Err(CliError::Usage("kernel needs at least 11 points".into()));
            }
            let grid: Vec<f64> = (0..n).map(|i| -y_max + 2.0 * y_max * i as f64 / (n - 1) as f64).collect();
            let report = linear_kernel(&grid)?;
            out.profile(".csv", &report.profile)?;
            out.json(&json!({
                "mass": report.mass,
                "richardson_spread": report.richardson_spread,
                "converged": report.converged,
            }))?;
            Ok(())
        }
        Command::Compacton { explicit, grid } => {
            let kind = match p.text("explicit", explicit, "q55").as_str() {
                "k22" => ExplicitKind::K22,
                "q55" => ExplicitKind::Q55,
                other => return Err(CliError::Usage(format!("--explicit must be k22 or q55, got {other}"))),
            };
            let points = p.count("grid", grid, 1001)?;
            write_compacton(&explicit_profile(kind, points), out)
        }
        Command::SubspaceCheck { coeffs, order, samples, seed } => {
            let coeffs = p.list("coeffs", coeffs, &[1.0, 25.0, 144.0])?;
            let order = p.count("order", order, 5)?;
            let samples = p.count("samples", samples, 8)?;
            let seed = p.count("seed", seed, 7)? as u64;
            let energy = subspace_closure_check(&coeffs, order, samples, seed)?;
            out.json(&json!({ "coeffs": coeffs, "order": order, "out_of_subspace_energy": energy }))?;
            Ok(())
        }
        Command::RobustnessProbe { b, c, y0_min, y0_max, y0_step, third_order, bracket } => {
            if let Some(raw) = third_order {
                let c3 = p.real("third_order", &Some(raw.clone()), 1.0)?;
                let br = p.list("bracket", bracket, &[5.0, 7.0])?;
                if br.len() != 2 {
                    return Err(CliError::Usage("--bracket takes lo,hi".into()));
                }
                let m = third_order_match(c3, (br[0], br[1]))?;
                out.json(&json!({ "c": c3, "interface": m.interface, "mismatch": m.mismatch }))?;
                return Ok(());
            }
            let b = p.real("b", b, 25.0)?;
            let c = p.real("c", c, 144.0)?;
            let lo = p.positive("y0_min", y0_min, 0.5)?;
            let hi = p.positive("y0_max", y0_max, 20.0)?;
            let step = p.positive("y0_step", y0_step, 0.05)?;
            if hi < lo {
                return Err(CliError::Usage("y0_max must not be below y0_min".into()));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            let grid: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
            let curve = robustness_probe((b, c), &grid)?;
            let rows: Vec<Vec<String>> = curve
                .points
                .iter()
                .map(|(y, m)| vec![num(*y), m.map(num).unwrap_or_default()])
                .collect();
            out.csv(".csv", &PROBE_HEADER, &rows)?;
            out.json(&json!({
                "pert": [b, c],
                "minimum_at": curve.minimum_at,
                "minimum": curve.minimum,
                "local_minima": curve.local_minima,
            }))?;
            Ok(())
        }
        Command::SignedCompacton { branch } => {
            let branch = p.count("branch", branch, 1)?;
            write_compacton(&solve_signed_compacton(branch)?, out)
        }
        Command::ConvergenceRate { shock, l, times } => {
            let l = p.positive("l", l, 1.0)?;
            let times = p.list("times", times, &[1e-1, 1e-2, 1e-3, 1e-4])?;
            let sol = solve_from_args(shock, p)?;
            let fit = convergence_rate(&sol.profile, l, &times)?;
            let rows: Vec<Vec<String>> =
                fit.times.iter().zip(&fit.distances).map(|(t, d)| vec![num(*t), num(*d)]).collect();
            out.csv(".csv", &["t", "distance"], &rows)?;
            out.json(&fit)?;
            Ok(())
        }
        Command::Reflect(args) => {
            let sol = solve_from_args(args, p)?;
            let reflected = reflect_to_rarefaction(&odd_extension(&sol.profile));
            out.profile(".csv", &reflected.profile)?;
            out.json(&json!({
                "branch": reflected.branch,
                "residual": reflected.profile.residual_sup,
                "left_value": reflected.profile.values[0].first(),
                "right_value": reflected.profile.values[0].last(),
            }))?;
            Ok(())
        }
        Command::Rh { minus, plus, sweep } => {
            let minus_raw = p.text("minus", minus, "1,0,0,0,3");
            let plus_raw = p.text("plus", plus, "1,0,?,0,0");
            let sweep = p.list("sweep", sweep, &[])?;
            let fixed = PartialRh { minus: side(&minus_raw)?, plus: side(&plus_raw)? };
            let tuples: Vec<RHTuple> = if fixed.free_axes().is_empty() {
                let t = RHTuple::new(fixed.minus.map(Option::unwrap), fixed.plus.map(Option::unwrap));
                debug_assert_eq!(t.residual, rh_residual(&t));
                vec![t]
            } else {
                rh_solve(&fixed, &sweep)?
            };
            out.json(&json!({ "free_axes": fixed.free_axes(), "tuples": tuples }))?;
            Ok(())
        }
        Command::T5Shock { a, b } => {
            let a = p.positive("A", a, 1.0)?;
            let b = p.real("B", b, 0.0)?;
            let shock = t5_shock_profile(a, b)?;
            out.profile(".csv", &shock.profile)?;
            out.json(&json!({
                "A": a,
                "B": b,
                "far_field": shock.far_field,
                "tail_exponent": shock.tail_exponent,
                "printed_exponent": shock.printed_exponent,
                "tail_discrepancy": shock.tail_discrepancy,
                "positive_on_left": shock.positive_on_left,
                "decreasing_on_left": shock.decreasing_on_left,
                "residual": shock.profile.residual_sup,
            }))?;
            Ok(())
        }
        Command::EntropyTest { shock, solve, deltas } => {
            let kind = match p.text("shock", shock, "minus").as_str() {
                "minus" => Shock::SMinus,
                "plus" => Shock::SPlus,
                other => return Err(CliError::Usage(format!("--shock must be minus or plus, got {other}"))),
            };
            let deltas = p.list("deltas", deltas, &DEFAULT_DELTAS)?;
            let sol = solve_from_args(solve, p)?;
            let report = delta_entropy_test(kind, &sol.profile, &deltas)?;
            let rows: Vec<Vec<String>> =
                report.deltas.iter().zip(&report.distances).map(|(d, v)| vec![num(*d), num(*v)]).collect();
            out.csv(".csv", &ENTROPY_HEADER, &rows)?;
            out.json(&report)?;
            Ok(())
        }
    }
}

/// Five comma-separated entries, `?` for a free one.
fn side(raw: &str) -> Result<[Option<f64>; 5], CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(CliError::Usage(format!("expected 5 coefficients, got {}", parts.len())));
    }
    let mut out = [None; 5];
    for (slot, s) in out.iter_mut().zip(parts) {
        if s != "?" {
            *slot = Some(ndelab::models::parse_real("coefficient", s)?);
        }
    }
    Ok(out)
}

fn scan_record(r: &ScanRow) -> Vec<String> {
    let fate = serde_json::to_value(r.fate).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let mut rec: Vec<String> = r.tuple.iter().map(|v| num(*v)).collect();
    rec.extend([fate, num(r.z), r.refined.to_string()]);
    rec
}

fn write_shot(outcome: &ShootingOutcome, out: &mut Outputs) -> Result<(), CliError> {
    out.profile(".csv", &outcome.profile)?;
    out.json(&json!({
        "param_name": outcome.param_name,
        "converged_param": outcome.converged_param,
        "bracket": [outcome.bracket_lo, outcome.bracket_hi],
        "fate_lo": outcome.fate_lo,
        "fate_hi": outcome.fate_hi,
        "iterations": outcome.iterations,
        "half_launch_param": outcome.half_launch_param,
        "residual": outcome.profile.residual_sup,
    }))?;
    Ok(())
}

fn write_compacton(c: &CompactonProfile, out: &mut Outputs) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = match &c.squared {
        Some(sq) => (0..c.grid.len()).map(|i| vec![num(c.grid[i]), num(c.values[i]), num(sq[i])]).collect(),
        None => (0..c.grid.len()).map(|i| vec![num(c.grid[i]), num(c.values[i])]).collect(),
    };
    let header: &[&str] = if c.squared.is_some() { &["y", "f", "F"] } else { &["y", "f"] };
    out.csv(".csv", header, &rows)?;
    let mut meta = serde_json::to_value(c).map_err(|e| CliError::Output(e.to_string()))?;
    if let Value::Object(map) = &mut meta {
        for key in ["grid", "values", "squared"] {
            map.remove(key);
        }
    }
    out.json(&meta)?;
    Ok(())
}

fn solve_shock(args: &ShockArgs, p: &mut Params, out: &mut Outputs) -> Result<(), CliError> {
    let sol = solve_from_args(args, p)?;
    out.profile(".csv", &sol.profile)?;
    out.json(&json!({ "meta": sol.meta, "nu_history": sol.nu_history, "residual": sol.profile.residual_sup }))?;
    Ok(())
}

/// Odd-symmetric models are solved on [−L, 0] with a far-field closure; the uniform
/// models on [−L, L] with the S₋ far field.
pub fn solve_from_args(args: &ShockArgs, p: &mut Params) -> Result<BvpSolution, CliError> {
    let id: ModelId = p.text("model", &args.model, "nde50").parse()?;
    let full_line = matches!(id, ModelId::UniformDiv | ModelId::UniformNondiv);
    if !id.is_nde() && !full_line {
        return Err(CliError::Usage(format!("no shock problem for model {id}")));
    }
    let domain = p.positive("domain", &args.domain, if full_line { 60.0 } else { DEFAULT_HALF_LENGTH })?;
    let tol = p.positive("tol", &args.tol, if full_line { 1e-6 } else { 1e-4 })?;
    let mut spec = ModelSpec::new(id);
    let problem = if full_line {
        if args.nu.is_some() || args.closure.is_some() {
            return Err(CliError::Usage(format!("--nu and --closure do not apply to {id}")));
        }
        let mut problem = BvpProblem::full_line(spec, domain);
        problem.tol_schedule = vec![tol];
        problem
    } else {
        let nu = p.real("nu", &args.nu, DEFAULT_NU)?;
        if nu < 0.0 {
            return Err(CliError::Usage(format!("nu must be >= 0, got {nu}")));
        }
        spec = spec.with_nu(nu);
        let closure = match p.text("closure", &args.closure, "dirichlet").as_str() {
            "dirichlet" => Closure::Dirichlet,
            "robin" => Closure::Robin,
            other => return Err(CliError::Usage(format!("--closure must be dirichlet or robin, got {other}"))),
        };
        let mut problem = BvpProblem::shock(spec, domain, closure);
        problem.tol_schedule = vec![tol];
        problem
    };
    Ok(solve_shock_profile(&problem, &Guess::Tanh { sign: 1.0 })?)
}
