//! Two-point boundary-value problems by three-point Lobatto collocation
//! (Simpson's rule with a cubic Hermite interpolant, fourth order), damped
//! Newton on a banded Jacobian and residual-driven mesh refinement.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::{BandMatrix, BandedError};
use crate::models::{ModelId, ModelSpec, ProfileSolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BvpError {
    #[error("domain half-length {0} must exceed 10")]
    DomainTooShort(f64),
    #[error("{0} schedule must be non-empty and strictly decreasing")]
    Schedule(&'static str),
    #[error("{got} boundary conditions for an order-{order} system")]
    BoundaryCount { order: usize, got: usize },
    #[error("mesh must be strictly increasing from a to b with at least 3 nodes")]
    Mesh,
    #[error("Newton iteration diverged (20 step halvings) at nu = {nu:e}; residual {residual:e}")]
    Diverged { nu: f64, residual: f64 },
    #[error("mesh refinement cap reached at nu = {nu:e}: {nodes} nodes, residual {residual:e}")]
    RefinementCap { nu: f64, nodes: usize, residual: f64 },
    #[error("continuation failed at nu = {failed_nu:e}; last good nu = {last_good_nu:e}")]
    Continuation { last_good_nu: f64, failed_nu: f64 },
    #[error(transparent)]
    Linear(#[from] BandedError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Left,
    Right,
}

/// Σ coeffs[k]·y⁽ᵏ⁾ = value at one end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearBc {
    pub end: End,
    pub coeffs: Vec<f64>,
    pub value: f64,
}

impl LinearBc {
    pub fn fix(end: End, order: usize, component: usize, value: f64) -> Self {
        let mut coeffs = vec![0.0; order];
        coeffs[component] = 1.0;
        Self { end, coeffs, value }
    }

    fn eval(&self, y: &[f64]) -> f64 {
        self.coeffs.iter().zip(y).map(|(c, v)| c * v).sum::<f64>() - self.value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    /// g(−L) = 1, g′(−L) = 0.
    Dirichlet,
    /// Constant-mode and growing-mode annihilation of the frozen-coefficient tail.
    Robin,
}

/// Far-field conditions at z = −L for a target value `target`.
pub fn far_field_conditions(closure: Closure, half_length: f64, target: f64) -> Vec<LinearBc> {
    match closure {
        Closure::Dirichlet => {
            vec![LinearBc::fix(End::Left, 5, 0, target), LinearBc::fix(End::Left, 5, 1, 0.0)]
        }
        Closure::Robin => {
            // w⁽⁵⁾ = k w′ with k = L/5; modes 1 and e^{λz}, λ⁴ = k
            let k = half_length / 5.0;
            let lam = -k.powf(0.25);
            vec![
                LinearBc { end: End::Left, coeffs: vec![-k, 0.0, 0.0, 0.0, 1.0], value: -k * target },
                LinearBc { end: End::Left, coeffs: vec![0.0, lam.powi(3), lam * lam, lam, 1.0], value: 0.0 },
            ]
        }
    }
}

/// g(0) = g″(0) = g⁗(0) = 0.
pub fn antisymmetry_conditions() -> Vec<LinearBc> {
    vec![
        LinearBc::fix(End::Right, 5, 0, 0.0),
        LinearBc::fix(End::Right, 5, 2, 0.0),
        LinearBc::fix(End::Right, 5, 4, 0.0),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvpProblem {
    pub model: ModelSpec,
    pub a: f64,
    pub b: f64,
    pub half_length: f64,
    pub closure: Option<Closure>,
    pub bcs: Vec<LinearBc>,
    pub mesh: Vec<f64>,
    pub nu_schedule: Vec<f64>,
    pub tol_schedule: Vec<f64>,
    pub max_nodes: usize,
}

pub const DEFAULT_HALF_LENGTH: f64 = 200.0;
pub const DEFAULT_TOL: f64 = 1e-4;

fn uniform_mesh(a: f64, b: f64, nodes: usize) -> Vec<f64> {
    (0..nodes).map(|i| a + (b - a) * i as f64 / (nodes - 1) as f64).collect()
}

impl BvpProblem {
    /// Shock profile on [−L, 0] with anti-symmetry at the origin.
    pub fn shock(model: ModelSpec, half_length: f64, closure: Closure) -> Self {
        let mut bcs = far_field_conditions(closure, half_length, 1.0);
        bcs.extend(antisymmetry_conditions());
        let nu = if model.id.is_degenerate() { model.nu } else { 0.0 };
        Self {
            model,
            a: -half_length,
            b: 0.0,
            half_length,
            closure: Some(closure),
            bcs,
            mesh: uniform_mesh(-half_length, 0.0, (20.0 * half_length) as usize + 1),
            nu_schedule: vec![nu],
            tol_schedule: vec![DEFAULT_TOL],
            max_nodes: 400_000,
        }
    }

    /// Profile on [−L, L] with g(−L) = 1, g′(−L) = 0, g(L) = −1, g′(L) = g″(L) = 0,
    /// for models without odd symmetry.
    pub fn full_line(model: ModelSpec, half_length: f64) -> Self {
        let bcs = vec![
            LinearBc::fix(End::Left, 5, 0, 1.0),
            LinearBc::fix(End::Left, 5, 1, 0.0),
            LinearBc::fix(End::Right, 5, 0, -1.0),
            LinearBc::fix(End::Right, 5, 1, 0.0),
            LinearBc::fix(End::Right, 5, 2, 0.0),
        ];
        Self {
            model,
            a: -half_length,
            b: half_length,
            half_length,
            closure: Some(Closure::Dirichlet),
            bcs,
            mesh: uniform_mesh(-half_length, half_length, (66.0 * half_length) as usize + 1),
            nu_schedule: vec![0.0],
            tol_schedule: vec![1e-6],
            max_nodes: 400_000,
        }
    }

    /// Arbitrary linear conditions on [a, b].
    pub fn with_conditions(model: ModelSpec, a: f64, b: f64, bcs: Vec<LinearBc>, nodes: usize) -> Self {
        Self {
            model,
            a,
            b,
            half_length: 0.5 * (b - a),
            closure: None,
            bcs,
            mesh: uniform_mesh(a, b, nodes.max(3)),
            nu_schedule: vec![model.nu],
            tol_schedule: vec![DEFAULT_TOL],
            max_nodes: 400_000,
        }
    }

    pub fn validate(&self) -> Result<(), BvpError> {
        if self.closure.is_some() && !(self.half_length > 10.0) {
            return Err(BvpError::DomainTooShort(self.half_length));
        }
        let decreasing = |s: &[f64]| !s.is_empty() && s.windows(2).all(|w| w[1] < w[0]);
        if !decreasing(&self.nu_schedule) {
            return Err(BvpError::Schedule("nu"));
        }
        if !decreasing(&self.tol_schedule) || self.tol_schedule.iter().any(|t| !(*t > 0.0)) {
            return Err(BvpError::Schedule("tolerance"));
        }
        let order = self.model.order();
        if self.bcs.len() != order || self.bcs.iter().any(|bc| bc.coeffs.len() != order) {
            return Err(BvpError::BoundaryCount { order, got: self.bcs.len() });
        }
        let m = &self.mesh;
        if m.len() < 3 || m[0] != self.a || m[m.len() - 1] != self.b || m.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BvpError::Mesh);
        }
        Ok(())
    }
}

/// Starting profile for the Newton iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum Guess {
    /// sign·tanh(−z) with its first derivative.
    Tanh { sign: f64 },
    Constant(f64),
    Profile(ProfileSolution),
}

impl Guess {
    fn state(&self, z: f64, order: usize) -> Vec<f64> {
        let mut s = vec![0.0; order];
        match self {
            Guess::Tanh { sign } => {
                let t = (-z).tanh();
                s[0] = sign * t;
                if order > 1 {
                    s[1] = -sign * (1.0 - t * t);
                }
            }
            Guess::Constant(c) => s[0] = *c,
            Guess::Profile(p) => {
                let zc = z.clamp(p.grid[0], p.grid[p.len() - 1]);
                for (k, v) in s.iter_mut().enumerate() {
                    *v = p.interpolate_column(k, zc).unwrap_or(0.0);
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveMeta {
    pub nu: f64,
    pub tol: f64,
    pub a: f64,
    pub b: f64,
    pub closure: Option<Closure>,
    pub nodes: usize,
    pub newton_iterations: usize,
    /// Largest normalized collocation residual after each refinement pass.
    pub refinement_residuals: Vec<f64>,
    pub bc_residual: f64,
    pub continuation_noop: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvpSolution {
    pub profile: ProfileSolution,
    pub meta: SolveMeta,
    pub nu_history: Vec<(f64, f64)>,
}

struct System<'a> {
    spec: ModelSpec,
    bcs: &'a [LinearBc],
    n: usize,
    n_left: usize,
}

impl System<'_> {
    fn f(&self, z: f64, y: &[f64], out: &mut [f64]) {
        self.spec.rhs_into(z, y, out);
    }

    fn jac(&self, z: f64, y: &[f64], f0: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut yp = y.to_vec();
        let mut fp = vec![0.0; n];
        for j in 0..n {
            let h = 1e-7 * (1.0 + y[j].abs());
            yp[j] = y[j] + h;
            self.f(z, &yp, &mut fp);
            for i in 0..n {
                out[i * n + j] = (fp[i] - f0[i]) / h;
            }
            yp[j] = y[j];
        }
    }

    fn residual(&self, mesh: &[f64], y: &[f64], fvals: &mut [f64]) -> Vec<f64> {
        let n = self.n;
        let m = mesh.len();
        for i in 0..m {
            let (lo, hi) = (i * n, (i + 1) * n);
            let mut out = vec![0.0; n];
            self.f(mesh[i], &y[lo..hi], &mut out);
            fvals[lo..hi].copy_from_slice(&out);
        }
        let mut r = Vec::with_capacity(n * m);
        let last = &y[(m - 1) * n..];
        for bc in self.bcs.iter().filter(|b| b.end == End::Left) {
            r.push(bc.eval(&y[..n]));
        }
        let mut ymid = vec![0.0; n];
        let mut fmid = vec![0.0; n];
        for i in 0..m - 1 {
            let h = mesh[i + 1] - mesh[i];
            let (yi, yj) = (&y[i * n..(i + 1) * n], &y[(i + 1) * n..(i + 2) * n]);
            let (fi, fj) = (&fvals[i * n..(i + 1) * n], &fvals[(i + 1) * n..(i + 2) * n]);
            for k in 0..n {
                ymid[k] = 0.5 * (yi[k] + yj[k]) - h / 8.0 * (fj[k] - fi[k]);
            }
            self.f(mesh[i] + 0.5 * h, &ymid, &mut fmid);
            for k in 0..n {
                // divided by h so that short intervals are not under-weighted
                r.push((yj[k] - yi[k]) / h - (fi[k] + 4.0 * fmid[k] + fj[k]) / 6.0);
            }
        }
        for bc in self.bcs.iter().filter(|b| b.end == End::Right) {
            r.push(bc.eval(last));
        }
        r
    }

    fn jacobian(&self, mesh: &[f64], y: &[f64], fvals: &[f64]) -> BandMatrix {
        let n = self.n;
        let m = mesh.len();
        let total = n * m;
        let kl = self.n_left + n - 1;
        let ku = (2 * n - 1 - self.n_left).max(n - 1);
        let mut jm = BandMatrix::zeros(total, kl, ku);
        let mut row = 0;
        for bc in self.bcs.iter().filter(|b| b.end == End::Left) {
            for (k, c) in bc.coeffs.iter().enumerate() {
                jm.set(row, k, *c);
            }
            row += 1;
        }
        let mut jn: Vec<Vec<f64>> = vec![vec![0.0; n * n]; m];
        for i in 0..m {
            self.jac(mesh[i], &y[i * n..(i + 1) * n], &fvals[i * n..(i + 1) * n], &mut jn[i]);
        }
        let mut ymid = vec![0.0; n];
        let mut fmid = vec![0.0; n];
        let mut jmid = vec![0.0; n * n];
        for i in 0..m - 1 {
            let h = mesh[i + 1] - mesh[i];
            let (yi, yj) = (&y[i * n..(i + 1) * n], &y[(i + 1) * n..(i + 2) * n]);
            let (fi, fj) = (&fvals[i * n..(i + 1) * n], &fvals[(i + 1) * n..(i + 2) * n]);
            for k in 0..n {
                ymid[k] = 0.5 * (yi[k] + yj[k]) - h / 8.0 * (fj[k] - fi[k]);
            }
            let zm = mesh[i] + 0.5 * h;
            self.f(zm, &ymid, &mut fmid);
            self.jac(zm, &ymid, &fmid, &mut jmid);
            let (ji, jj) = (&jn[i], &jn[i + 1]);
            for a in 0..n {
                for b in 0..n {
                    // ∂y_mid/∂y_i = I/2 + h/8 J_i, ∂y_mid/∂y_{i+1} = I/2 − h/8 J_{i+1}
                    let mut dmi = 0.0;
                    let mut dmj = 0.0;
                    for c in 0..n {
                        let di = if c == b { 0.5 } else { 0.0 } + h / 8.0 * ji[c * n + b];
                        let dj = if c == b { 0.5 } else { 0.0 } - h / 8.0 * jj[c * n + b];
                        dmi += jmid[a * n + c] * di;
                        dmj += jmid[a * n + c] * dj;
                    }
                    let eye = if a == b { 1.0 } else { 0.0 };
                    let left = -eye / h - (ji[a * n + b] + 4.0 * dmi) / 6.0;
                    let right = eye / h - (jj[a * n + b] + 4.0 * dmj) / 6.0;
                    jm.set(row + a, i * n + b, left);
                    jm.set(row + a, (i + 1) * n + b, right);
                }
            }
            row += n;
        }
        for bc in self.bcs.iter().filter(|b| b.end == End::Right) {
            for (k, c) in bc.coeffs.iter().enumerate() {
                jm.set(row, (m - 1) * n + k, *c);
            }
            row += 1;
        }
        jm
    }

    /// Normalized residual of the cubic Hermite interpolant at two interior points per interval.
    fn interval_residuals(&self, mesh: &[f64], y: &[f64], fvals: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut s = vec![0.0; n];
        let mut ds = vec![0.0; n];
        let mut fs = vec![0.0; n];
        (0..mesh.len() - 1)
            .map(|i| {
                let h = mesh[i + 1] - mesh[i];
                let (yi, yj) = (&y[i * n..(i + 1) * n], &y[(i + 1) * n..(i + 2) * n]);
                let (fi, fj) = (&fvals[i * n..(i + 1) * n], &fvals[(i + 1) * n..(i + 2) * n]);
                let mut worst: f64 = 0.0;
                for t in [0.25, 0.75] {
                    let (t2, t3) = (t * t, t * t * t);
                    let (h00, h10, h01, h11) = (2.0 * t3 - 3.0 * t2 + 1.0, t3 - 2.0 * t2 + t, -2.0 * t3 + 3.0 * t2, t3 - t2);
                    let (d00, d10, d01, d11) = (6.0 * t2 - 6.0 * t, 3.0 * t2 - 4.0 * t + 1.0, -6.0 * t2 + 6.0 * t, 3.0 * t2 - 2.0 * t);
                    for k in 0..n {
                        s[k] = h00 * yi[k] + h10 * h * fi[k] + h01 * yj[k] + h11 * h * fj[k];
                        ds[k] = (d00 * yi[k] + d01 * yj[k]) / h + d10 * fi[k] + d11 * fj[k];
                    }
                    self.f(mesh[i] + t * h, &s, &mut fs);
                    for k in 0..n {
                        let r = (ds[k] - fs[k]).abs() / (1.0 + fs[k].abs());
                        worst = worst.max(if r.is_finite() { r } else { f64::INFINITY });
                    }
                }
                worst
            })
            .collect()
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

const NEWTON_FLOOR: f64 = 1e-7;

/// Damped Newton on a fixed mesh; returns the iteration count.
fn newton(sys: &System<'_>, mesh: &[f64], y: &mut Vec<f64>, nu: f64) -> Result<usize, BvpError> {
    let mut fvals = vec![0.0; y.len()];
    let mut r = sys.residual(mesh, y, &mut fvals);
    let mut norm = inf_norm(&r);
    for iter in 0..60 {
        if norm < 1e-10 {
            return Ok(iter);
        }
        let jm = sys.jacobian(mesh, y, &fvals);
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = jm.factor()?.solve(&neg)?;
        let mut lambda = 1.0;
        let mut halvings = 0;
        loop {
            let trial: Vec<f64> = y.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            let mut ftrial = vec![0.0; y.len()];
            let rt = sys.residual(mesh, &trial, &mut ftrial);
            let nt = inf_norm(&rt);
            if nt.is_finite() && nt < (1.0 - 0.25 * lambda) * norm.max(f64::MIN_POSITIVE) || nt < 1e-12 {
                *y = trial;
                fvals = ftrial;
                r = rt;
                norm = nt;
                break;
            }
            halvings += 1;
            if halvings >= 20 {
                // no descent left: accept if already at the rounding floor
                if norm < NEWTON_FLOOR {
                    return Ok(iter);
                }
                return Err(BvpError::Diverged { nu, residual: norm });
            }
            lambda *= 0.5;
        }
        let scale = 1.0 + inf_norm(y);
        if lambda == 1.0 && inf_norm(&delta) < 1e-10 * scale {
            return Ok(iter + 1);
        }
    }
    if norm < NEWTON_FLOOR {
        Ok(60)
    } else {
        Err(BvpError::Diverged { nu, residual: norm })
    }
}

/// Splits intervals whose residual exceeds `tol`; values at new nodes come from the interpolant.
fn refine(sys: &System<'_>, mesh: &[f64], y: &[f64], fvals: &[f64], res: &[f64], tol: f64) -> (Vec<f64>, Vec<f64>) {
    let n = sys.n;
    let mut new_mesh = vec![mesh[0]];
    let mut new_y = y[..n].to_vec();
    for i in 0..mesh.len() - 1 {
        let pieces = if res[i] > 100.0 * tol { 3 } else if res[i] > tol { 2 } else { 1 };
        let h = mesh[i + 1] - mesh[i];
        let (yi, yj) = (&y[i * n..(i + 1) * n], &y[(i + 1) * n..(i + 2) * n]);
        let (fi, fj) = (&fvals[i * n..(i + 1) * n], &fvals[(i + 1) * n..(i + 2) * n]);
        for p in 1..pieces {
            let t = p as f64 / pieces as f64;
            let (t2, t3) = (t * t, t * t * t);
            new_mesh.push(mesh[i] + t * h);
            for k in 0..n {
                new_y.push(
                    (2.0 * t3 - 3.0 * t2 + 1.0) * yi[k]
                        + (t3 - 2.0 * t2 + t) * h * fi[k]
                        + (-2.0 * t3 + 3.0 * t2) * yj[k]
                        + (t3 - t2) * h * fj[k],
                );
            }
        }
        new_mesh.push(mesh[i + 1]);
        new_y.extend_from_slice(yj);
    }
    (new_mesh, new_y)
}

struct Solved {
    mesh: Vec<f64>,
    y: Vec<f64>,
    newton_iterations: usize,
    refinement_residuals: Vec<f64>,
}

fn solve_at(
    problem: &BvpProblem,
    spec: ModelSpec,
    mesh: Vec<f64>,
    y: Vec<f64>,
    tol: f64,
) -> Result<Solved, BvpError> {
    let n = spec.order();
    let n_left = problem.bcs.iter().filter(|b| b.end == End::Left).count();
    let sys = System { spec, bcs: &problem.bcs, n, n_left };
    let (mut mesh, mut y) = (mesh, y);
    let mut refinement_residuals = Vec::new();
    let mut newton_iterations = 0;
    loop {
        newton_iterations += newton(&sys, &mesh, &mut y, spec.nu)?;
        let mut fvals = vec![0.0; y.len()];
        sys.residual(&mesh, &y, &mut fvals);
        let res = sys.interval_residuals(&mesh, &y, &fvals);
        let worst = res.iter().cloned().fold(0.0, f64::max);
        refinement_residuals.push(worst);
        if worst <= tol {
            return Ok(Solved { mesh, y, newton_iterations, refinement_residuals });
        }
        let (m2, y2) = refine(&sys, &mesh, &y, &fvals, &res, tol);
        if m2.len() > problem.max_nodes {
            return Err(BvpError::RefinementCap { nu: spec.nu, nodes: mesh.len(), residual: worst });
        }
        mesh = m2;
        y = y2;
    }
}

fn to_solution(problem: &BvpProblem, spec: ModelSpec, solved: Solved, tol: f64, noop: bool) -> BvpSolution {
    let n = spec.order();
    let states: Vec<Vec<f64>> = solved.y.chunks(n).map(|c| c.to_vec()).collect();
    let bc_residual = problem
        .bcs
        .iter()
        .map(|bc| bc.eval(if bc.end == End::Left { &states[0] } else { &states[states.len() - 1] }).abs())
        .fold(0.0, f64::max);
    let profile = ProfileSolution::from_states(spec, solved.mesh.clone(), &states);
    BvpSolution {
        meta: SolveMeta {
            nu: spec.nu,
            tol,
            a: problem.a,
            b: problem.b,
            closure: problem.closure,
            nodes: solved.mesh.len(),
            newton_iterations: solved.newton_iterations,
            refinement_residuals: solved.refinement_residuals,
            bc_residual,
            continuation_noop: noop,
        },
        nu_history: vec![(spec.nu, profile.residual_sup)],
        profile,
    }
}

/// Runs the ν and tolerance schedules in order; the last pair is the final answer.
pub fn solve_shock_profile(problem: &BvpProblem, guess: &Guess) -> Result<BvpSolution, BvpError> {
    problem.validate()?;
    let n = problem.model.order();
    let mut mesh = problem.mesh.clone();
    let mut y: Vec<f64> = mesh.iter().flat_map(|&z| guess.state(z, n)).collect();
    let nus: Vec<f64> = if problem.model.id.is_degenerate() { problem.nu_schedule.clone() } else { vec![0.0] };
    let steps = nus.len().max(problem.tol_schedule.len());
    let mut history = Vec::new();
    let mut last = None;
    for s in 0..steps {
        let nu = nus[s.min(nus.len() - 1)];
        let tol = problem.tol_schedule[s.min(problem.tol_schedule.len() - 1)];
        let spec = problem.model.with_nu(nu);
        let solved = solve_at(problem, spec, mesh, y, tol)?;
        mesh = solved.mesh.clone();
        y = solved.y.clone();
        let sol = to_solution(problem, spec, solved, tol, false);
        history.push((nu, sol.profile.residual_sup));
        last = Some(sol);
    }
    let mut sol = last.expect("non-empty schedule");
    sol.nu_history = history;
    Ok(sol)
}

/// Re-solves at each ν of `schedule`, starting from `current`.
pub fn continuation(problem: &BvpProblem, current: &BvpSolution, schedule: &[f64]) -> Result<BvpSolution, BvpError> {
    if !problem.model.id.is_degenerate() || schedule.iter().all(|&nu| nu == current.meta.nu) {
        let mut same = current.clone();
        same.meta.continuation_noop = true;
        return Ok(same);
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(BvpError::Schedule("nu"));
    }
    let n = problem.model.order();
    let tol = current.meta.tol;
    let mut mesh = current.profile.grid.clone();
    let mut y: Vec<f64> = (0..mesh.len()).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| current.profile.values[k][i]).collect();
    let mut history = current.nu_history.clone();
    let mut last_good = current.meta.nu;
    let mut out = current.clone();
    for &nu in schedule {
        if nu == last_good {
            continue;
        }
        let spec = problem.model.with_nu(nu);
        let solved = solve_at(problem, spec, mesh.clone(), y.clone(), tol)
            .map_err(|_| BvpError::Continuation { last_good_nu: last_good, failed_nu: nu })?;
        mesh = solved.mesh.clone();
        y = solved.y.clone();
        out = to_solution(problem, spec, solved, tol, false);
        history.push((nu, out.profile.residual_sup));
        last_good = nu;
    }
    out.nu_history = history;
    Ok(out)
}

/// Largest |a − b| over the nodes of `a` inside [lo, hi].
pub fn sup_difference(a: &ProfileSolution, b: &ProfileSolution, lo: f64, hi: f64) -> f64 {
    a.grid
        .iter()
        .zip(&a.values[0])
        .filter(|(z, _)| **z >= lo && **z <= hi)
        .filter_map(|(&z, &g)| b.interpolate(z).map(|h| (g - h).abs()))
        .fold(0.0, f64::max)
}

/// NDE50 shock profile with the default settings: L = 200, ν = 1e−4, tolerance 1e−4.
pub fn default_shock(closure: Closure) -> Result<BvpSolution, BvpError> {
    let problem = BvpProblem::shock(ModelSpec::nde50(), DEFAULT_HALF_LENGTH, closure);
    solve_shock_profile(&problem, &Guess::Tanh { sign: 1.0 })
}

/// Profile of the uniform non-divergence model on [−L, L].
pub fn uniform_profile(half_length: f64, sign: f64) -> Result<BvpSolution, BvpError> {
    let mut problem = BvpProblem::full_line(ModelSpec::new(ModelId::UniformNondiv), half_length);
    if sign < 0.0 {
        for bc in problem.bcs.iter_mut().filter(|bc| bc.coeffs[0] == 1.0) {
            bc.value = -bc.value;
        }
    }
    solve_shock_profile(&problem, &Guess::Tanh { sign })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_solution_is_exact() {
        let spec = ModelSpec::nde50();
        let bcs = vec![
            LinearBc::fix(End::Left, 5, 0, 1.0),
            LinearBc::fix(End::Left, 5, 1, 0.0),
            LinearBc::fix(End::Right, 5, 0, 1.0),
            LinearBc::fix(End::Right, 5, 2, 0.0),
            LinearBc::fix(End::Right, 5, 4, 0.0),
        ];
        let problem = BvpProblem::with_conditions(spec, -20.0, 0.0, bcs, 101);
        let sol = solve_shock_profile(&problem, &Guess::Constant(1.0)).unwrap();
        assert!(sol.profile.values[0].iter().all(|&g| g == 1.0));
        assert_eq!(sol.profile.residual_sup, 0.0);
        assert_eq!(sol.meta.newton_iterations, 0);
    }

    #[test]
    fn linear_problem_matches_closed_form() {
        let spec = ModelSpec::new(ModelId::LinearKernel);
        let bcs = vec![
            LinearBc::fix(End::Left, 4, 0, 1.0),
            LinearBc::fix(End::Left, 4, 1, 0.0),
            LinearBc::fix(End::Right, 4, 0, 0.5),
            LinearBc::fix(End::Right, 4, 1, -0.25),
        ];
        let mut problem = BvpProblem::with_conditions(spec, 0.0, 2.0, bcs, 41);
        problem.tol_schedule = vec![1e-8];
        let sol = solve_shock_profile(&problem, &Guess::Constant(0.0)).unwrap();
        let p = &sol.profile;
        assert!((p.values[0][0] - 1.0).abs() < 1e-12);
        assert!((p.values[0][p.len() - 1] - 0.5).abs() < 1e-12);
        // shooting the same linear ODE from the solved left state reproduces the right end
        let left: Vec<f64> = (0..4).map(|k| p.values[k][0]).collect();
        let traj = crate::ivp::integrate(
            |z, y, dy| spec.rhs_into(z, y, dy),
            &left,
            (0.0, 2.0),
            &crate::ivp::IntegrationOptions::with_tol(1e-12, 1e-14),
        )
        .unwrap();
        assert!((traj.last_state()[0] - 0.5).abs() < 1e-6);
        assert!((traj.last_state()[1] + 0.25).abs() < 1e-6);
    }

    #[test]
    fn schedules_must_decrease() {
        let mut problem = BvpProblem::shock(ModelSpec::nde50(), 50.0, Closure::Dirichlet);
        problem.nu_schedule = vec![1e-4, 1e-2];
        assert!(matches!(problem.validate(), Err(BvpError::Schedule("nu"))));
        problem.nu_schedule = vec![1e-4];
        problem.half_length = 5.0;
        assert!(matches!(problem.validate(), Err(BvpError::DomainTooShort(_))));
    }

    #[test]
    fn robin_rows_annihilate_their_modes() {
        let bcs = far_field_conditions(Closure::Robin, 200.0, 1.0);
        let k: f64 = 40.0;
        // constant state g = 1 satisfies the first row
        assert!(bcs[0].eval(&[1.0, 0.0, 0.0, 0.0, 0.0]).abs() < 1e-12);
        // the mode e^{μ z} with μ = +k^{1/4} (decaying toward −∞) satisfies the second
        let mu = k.powf(0.25);
        let state: Vec<f64> = (0..5).map(|p| mu.powi(p)).collect();
        let lam = -mu;
        let expect = lam.powi(3) * mu + lam * lam * mu * mu + lam * mu.powi(3) + mu.powi(4);
        assert!((bcs[1].eval(&state) - expect).abs() < 1e-9);
        assert!(expect.abs() < 1e-9);
    }
}
