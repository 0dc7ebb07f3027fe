//! Adaptive Dormand–Prince 5(4) integrator with dense output and event location.
//!
//! Every shooting run and fate classification in the crate goes through
//! [`integrate`] or [`integrate_with_events`]. Integration may run in either
//! direction; the trajectory nodes are then monotone decreasing.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IvpError {
    #[error("degenerate integration span [{0}, {1}]")]
    DegenerateSpan(f64, f64),
    #[error("right-hand side is not finite at the initial state")]
    NonFiniteStart,
    #[error("invalid integration options: {0}")]
    InvalidOptions(&'static str),
    #[error("step limit of {0} exceeded at t = {1}")]
    StepLimit(usize, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest admissible step magnitude.
    pub max_step: f64,
    /// Integration aborts with [`Termination::Blowup`] once any component exceeds this.
    pub blowup_threshold: f64,
    /// Largest distance from the start that will be covered, whatever the span says.
    pub max_span: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: f64::INFINITY,
            blowup_threshold: 1e8,
            max_span: f64::INFINITY,
            max_steps: 2_000_000,
            initial_step: None,
        }
    }
}

impl IntegrationOptions {
    pub fn with_tol(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    pub fn blowup_threshold(mut self, value: f64) -> Self {
        self.blowup_threshold = value;
        self
    }

    pub fn max_step(mut self, value: f64) -> Self {
        self.max_step = value;
        self
    }

    fn validate(&self) -> Result<(), IvpError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(IvpError::InvalidOptions("tolerances must be positive"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(IvpError::InvalidOptions("blowup threshold must be positive"));
        }
        if !(self.max_step > 0.0) || !(self.max_span > 0.0) {
            return Err(IvpError::InvalidOptions("max_step and max_span must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    SpanEnd,
    Event,
    Blowup,
    StepUnderflow,
}

/// Continuous extension of one accepted step (Hairer's five-term form).
#[derive(Debug, Clone)]
struct DenseSegment {
    t0: f64,
    h: f64,
    coeffs: [Vec<f64>; 5],
}

impl DenseSegment {
    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        for i in 0..out.len() {
            out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub nodes: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    segments: Vec<DenseSegment>,
    pub termination: Termination,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    fn forward(&self) -> bool {
        self.nodes.len() < 2 || self.nodes[1] > self.nodes[0]
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = (self.start(), self.end());
        t >= a.min(b) && t <= a.max(b)
    }

    /// Dense evaluation anywhere inside the covered interval.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        if !self.contains(t) {
            return None;
        }
        let mut out = vec![0.0; self.dim()];
        if self.segments.is_empty() {
            out.copy_from_slice(&self.states[0]);
            return Some(out);
        }
        let idx = self.segment_index(t);
        self.segments[idx].eval_into(t, &mut out);
        Some(out)
    }

    fn segment_index(&self, t: f64) -> usize {
        let n = self.segments.len();
        let fwd = self.forward();
        // nodes[i] .. nodes[i+1] covers segment i
        let pos = if fwd {
            self.nodes.partition_point(|&x| x <= t)
        } else {
            self.nodes.partition_point(|&x| x >= t)
        };
        pos.saturating_sub(1).min(n - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Any,
    Rising,
    Falling,
}

/// Scalar event function of (abscissa, state); a hit is a sign change.
pub struct Event<'a> {
    func: Box<dyn Fn(f64, &[f64]) -> f64 + Send + Sync + 'a>,
    pub terminal: bool,
    pub crossing: Crossing,
}

impl<'a> Event<'a> {
    pub fn new(func: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'a) -> Self {
        Self { func: Box::new(func), terminal: false, crossing: Crossing::Any }
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }

    pub fn crossing(mut self, crossing: Crossing) -> Self {
        self.crossing = crossing;
        self
    }

    pub fn value(&self, t: f64, y: &[f64]) -> f64 {
        (self.func)(t, y)
    }

    fn triggered(&self, before: f64, after: f64) -> bool {
        let change = (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0);
        if !change {
            return false;
        }
        match self.crossing {
            Crossing::Any => true,
            Crossing::Rising => after > before,
            Crossing::Falling => after < before,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventHit {
    pub event: usize,
    pub t: f64,
    pub state: Vec<f64>,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI controller constants
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

pub fn integrate<F>(
    rhs: F,
    y0: &[f64],
    span: (f64, f64),
    opts: &IntegrationOptions,
) -> Result<Trajectory, IvpError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    integrate_with_events(rhs, y0, span, opts, &[]).map(|(traj, _)| traj)
}

pub fn integrate_with_events<F>(
    mut rhs: F,
    y0: &[f64],
    span: (f64, f64),
    opts: &IntegrationOptions,
    events: &[Event<'_>],
) -> Result<(Trajectory, Vec<EventHit>), IvpError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    opts.validate()?;
    let (t_start, mut t_end) = span;
    if !(t_start.is_finite() && t_end.is_finite()) || t_start == t_end {
        return Err(IvpError::DegenerateSpan(t_start, t_end));
    }
    let dir = (t_end - t_start).signum();
    if (t_end - t_start).abs() > opts.max_span {
        t_end = t_start + dir * opts.max_span;
    }
    let n = y0.len();
    let mut k1 = vec![0.0; n];
    rhs(t_start, y0, &mut k1);
    if k1.iter().any(|v| !v.is_finite()) || y0.iter().any(|v| !v.is_finite()) {
        return Err(IvpError::NonFiniteStart);
    }

    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];

    let mut traj = Trajectory {
        nodes: vec![t_start],
        states: vec![y0.to_vec()],
        segments: Vec::new(),
        termination: Termination::SpanEnd,
        rejected_steps: 0,
    };
    let mut hits = Vec::new();
    let mut event_vals: Vec<f64> = events.iter().map(|e| e.value(t_start, y0)).collect();

    let mut t = t_start;
    let mut y = y0.to_vec();
    let span_len = (t_end - t_start).abs();
    let hmax = opts.max_step.min(span_len);
    let mut h = match opts.initial_step {
        Some(h0) => h0.abs().min(hmax),
        None => initial_step(&mut rhs, t, &y, &k1, dir, hmax, opts),
    };
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        let remaining = (t_end - t).abs();
        if remaining <= 1e-14 * span_len.max(t.abs()) {
            traj.termination = Termination::SpanEnd;
            break;
        }
        let floor = 16.0 * f64::EPSILON * t.abs().max(1e-3 * span_len).max(f64::MIN_POSITIVE);
        if h < floor {
            traj.termination = Termination::StepUnderflow;
            break;
        }
        let mut last_step = false;
        if h >= remaining {
            h = remaining;
            last_step = true;
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(IvpError::StepLimit(opts.max_steps, t));
        }
        let hs = dir * h;

        for i in 0..n {
            ytmp[i] = y[i] + hs * A21 * k1[i];
        }
        rhs(t + C2 * hs, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * hs, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * hs, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * hs, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] = y[i]
                + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last_step { t_end } else { t + hs };
        rhs(t_new, &ytmp, &mut k6);
        for i in 0..n {
            ynew[i] = y[i]
                + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(t_new, &ynew, &mut k7);

        let mut err = 0.0;
        for i in 0..n {
            let e = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(ynew[i].abs());
            err += (e / sc).powi(2);
        }
        err = (err / n as f64).sqrt();
        if !err.is_finite() || ynew.iter().chain(k7.iter()).any(|v| !v.is_finite()) {
            h *= FAC_MIN;
            last_rejected = true;
            traj.rejected_steps += 1;
            continue;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_next = (h / fac).min(hmax);
            if last_rejected {
                h_next = h_next.min(h);
            }
            fac_old = err.max(1e-4);
            last_rejected = false;

            let mut seg = DenseSegment {
                t0: t,
                h: hs,
                coeffs: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            };
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = hs * k1[i] - ydiff;
                seg.coeffs[0][i] = y[i];
                seg.coeffs[1][i] = ydiff;
                seg.coeffs[2][i] = bspl;
                seg.coeffs[3][i] = ydiff - hs * k7[i] - bspl;
                seg.coeffs[4][i] = hs
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }

            // events: locate every crossing inside this step, stop at the first terminal one
            let mut stop: Option<(f64, Vec<f64>)> = None;
            if !events.is_empty() {
                let mut found: Vec<(f64, usize, Vec<f64>)> = Vec::new();
                for (idx, ev) in events.iter().enumerate() {
                    let after = ev.value(t_new, &ynew);
                    if ev.triggered(event_vals[idx], after) {
                        let (te, ye) = locate(ev, &seg, t, t_new, event_vals[idx], n);
                        found.push((te, idx, ye));
                    }
                    event_vals[idx] = after;
                }
                found.sort_by(|a, b| (dir * a.0).partial_cmp(&(dir * b.0)).unwrap());
                for (te, idx, ye) in found {
                    hits.push(EventHit { event: idx, t: te, state: ye.clone() });
                    if events[idx].terminal {
                        stop = Some((te, ye));
                        break;
                    }
                }
            }

            traj.segments.push(seg);
            if let Some((te, ye)) = stop {
                traj.nodes.push(te);
                traj.states.push(ye);
                traj.termination = Termination::Event;
                break;
            }
            traj.nodes.push(t_new);
            traj.states.push(ynew.clone());
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);

            if y.iter().any(|v| v.abs() > opts.blowup_threshold) {
                traj.termination = Termination::Blowup;
                break;
            }
            if last_step {
                traj.termination = Termination::SpanEnd;
                break;
            }
            h = h_next;
        } else {
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            last_rejected = true;
            traj.rejected_steps += 1;
        }
    }
    Ok((traj, hits))
}

/// Bisection on the dense output, to 1e-12 of the step width.
fn locate(
    ev: &Event<'_>,
    seg: &DenseSegment,
    t_lo: f64,
    t_hi: f64,
    v_lo: f64,
    n: usize,
) -> (f64, Vec<f64>) {
    let mut a = t_lo;
    let mut b = t_hi;
    let mut fa = v_lo;
    let mut buf = vec![0.0; n];
    let width = (t_hi - t_lo).abs();
    while (b - a).abs() > 1e-12 * width {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        seg.eval_into(m, &mut buf);
        let fm = ev.value(m, &buf);
        if fm == 0.0 {
            b = m;
            break;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let te = b;
    seg.eval_into(te, &mut buf);
    (te, buf)
}

fn initial_step<F>(
    rhs: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    dir: f64,
    hmax: f64,
    opts: &IntegrationOptions,
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let sc: Vec<f64> = y.iter().map(|v| opts.abs_tol + opts.rel_tol * v.abs()).collect();
    let dnf: f64 = (0..n).map(|i| (f0[i] / sc[i]).powi(2)).sum::<f64>() / n as f64;
    let dny: f64 = (0..n).map(|i| (y[i] / sc[i]).powi(2)).sum::<f64>() / n as f64;
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
    h = h.min(hmax);
    let y1: Vec<f64> = (0..n).map(|i| y[i] + dir * h * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    rhs(t + dir * h, &y1, &mut f1);
    let der2 = ((0..n).map(|i| ((f1[i] - f0[i]) / sc[i]).powi(2)).sum::<f64>() / n as f64).sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12.is_finite() && der12 > 1e-15 {
        (0.01 / der12).powf(0.2)
    } else {
        (h * 1e-3).max(1e-6)
    };
    (100.0 * h).min(h1).min(hmax)
}
