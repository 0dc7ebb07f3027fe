//! Orbit-fate classification and bisection shooting along one parameter axis.
//!
//! Fates are decided by explicit event predicates while integrating from the
//! launch point toward `−z_max`:
//!
//! * zero: `g` reaches `1e−9` (same sign as at launch), or the integration
//!   stalls (step underflow or derivative blow-up) while `|g| ≤ 1e−3` or
//!   `|g′| ≥ 100|g|`, the square-root vanishing profile. NDE models report `ZeroCrossing`, the
//!   α-families `Extinction`.
//! * growth: `±g ≥ 3·target(z) + offset` and `±g ≥ g*(z)/3`, where `g*` is the
//!   explicit growth branch (`|z|⁵/120` for the NDE, `|y|⁵/15120` for the
//!   α-families). The test is armed only where `g*/3` itself exceeds the first
//!   threshold, so a transient hump near the origin is never read as capture.
//! * bounded: the orbit reaches `−z_max` with no event. For the NDE it must also
//!   lie inside `|g − target| ≤ band·target`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ivp::{integrate_with_events, Crossing, Event, IntegrationOptions, IvpError, Termination, Trajectory};
use crate::models::{series_init, ModelError, ModelId, ModelSpec, ProfileSolution, SeriesParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShootingError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ivp(#[from] IvpError),
    #[error("z_max = {0} must exceed 1")]
    DomainTooShort(f64),
    #[error("bracket [{0}, {1}] is empty or not finite")]
    BadBracket(f64, f64),
    #[error("bracket ends share fate {0:?}")]
    SameFate(FateTag),
    #[error("bracket end fate {0:?} is not part of the growth/vanishing dichotomy")]
    NotDichotomous(FateTag),
    #[error("tolerance {0} must be positive")]
    BadTolerance(f64),
    #[error("axis {0} does not apply to model {1}")]
    AxisMismatch(&'static str, ModelId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FateTag {
    GrowthPlus,
    ZeroCrossing,
    BoundedCandidate,
    Extinction,
    GrowthMinus,
    Indeterminate,
}

/// Which side of the shooting dichotomy a fate falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FateClass {
    Growth,
    Vanishing,
}

impl FateTag {
    pub fn class(self) -> Option<FateClass> {
        match self {
            FateTag::GrowthPlus | FateTag::GrowthMinus => Some(FateClass::Growth),
            FateTag::ZeroCrossing | FateTag::Extinction => Some(FateClass::Vanishing),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FateTag::GrowthPlus => "GROWTH_PLUS",
            FateTag::ZeroCrossing => "ZERO_CROSSING",
            FateTag::BoundedCandidate => "BOUNDED_CANDIDATE",
            FateTag::Extinction => "EXTINCTION",
            FateTag::GrowthMinus => "GROWTH_MINUS",
            FateTag::Indeterminate => "INDETERMINATE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fate {
    pub tag: FateTag,
    /// Abscissa of the deciding event (the domain end for bounded orbits).
    pub z: f64,
    /// g at that point.
    pub value: f64,
}

/// Initial data of an orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Launch {
    /// Origin series evaluated at `z_eps`.
    Series { params: SeriesParams, z_eps: f64 },
    /// Full state given at a point.
    State { at: f64, state: Vec<f64> },
}

impl Launch {
    pub fn series(params: SeriesParams) -> Self {
        Launch::Series { params, z_eps: DEFAULT_Z_EPS }
    }

    fn start(&self, spec: &ModelSpec) -> Result<(f64, Vec<f64>), ShootingError> {
        match self {
            Launch::Series { params, z_eps } => Ok((*z_eps, series_init(spec, *params, *z_eps)?)),
            Launch::State { at, state } => {
                if state.len() != spec.order() {
                    return Err(ModelError::WrongOrder { expected: spec.order(), got: state.len() }.into());
                }
                Ok((*at, state.clone()))
            }
        }
    }
}

pub const DEFAULT_Z_EPS: f64 = -1e-2;
pub const DEFAULT_BAND: f64 = 0.5;
const ZERO_LEVEL: f64 = 1e-9;
const UNDERFLOW_SMALL: f64 = 1e-3;
/// |g′|/|g| beyond which a stalled orbit is taken to be on the vanishing bundle.
const STEEP_RATIO: f64 = 100.0;

fn shooting_options() -> IntegrationOptions {
    IntegrationOptions::with_tol(1e-11, 1e-13).blowup_threshold(1e12)
}

/// Target equilibrium and growth branch for a model.
#[derive(Debug, Clone, Copy)]
struct FateRule {
    target_amp: f64,
    target_exp: f64,
    offset: f64,
    branch_coeff: f64,
    relative_band: bool,
    /// Signs (+, −) for which ±g* solves the equation.
    branches: (bool, bool),
}

impl FateRule {
    fn for_model(spec: &ModelSpec, launch: &Launch) -> Self {
        match spec.id {
            ModelId::BlowupAlpha | ModelId::GlobalAlpha => {
                let alpha = spec.alpha.unwrap_or(0.0);
                let beta = spec.beta.unwrap_or(0.2);
                Self {
                    target_amp: spec.c0,
                    target_exp: alpha / beta,
                    offset: 10.0,
                    branch_coeff: 1.0 / 15120.0,
                    relative_band: false,
                    // −y⁵/15120 solves the blow-up ODE, +y⁵/15120 the global one
                    branches: if spec.id == ModelId::BlowupAlpha { (true, false) } else { (false, true) },
                }
            }
            _ => {
                // g → |C|^{5/4} under the scaling that normalizes C = −1
                let amp = match launch {
                    Launch::Series { params: SeriesParams::Shock { c, .. }, .. } => c.abs().powf(1.25),
                    _ => 1.0,
                };
                Self {
                    target_amp: amp,
                    target_exp: 0.0,
                    offset: 0.0,
                    branch_coeff: 1.0 / 120.0,
                    relative_band: true,
                    branches: (true, true),
                }
            }
        }
    }

    fn target(&self, z: f64) -> f64 {
        self.target_amp * z.abs().powf(self.target_exp)
    }

    /// Positive once g is above both thresholds, and only where the branch
    /// itself dominates the target band (|z| large enough for capture to mean growth).
    fn growth_gap(&self, z: f64, g: f64) -> f64 {
        let threshold = 3.0 * self.target(z) + self.offset;
        let branch = self.branch_coeff * z.abs().powi(5) / 3.0;
        if branch < threshold {
            return -1.0;
        }
        g - branch
    }
}

fn zero_tag(id: ModelId) -> FateTag {
    if matches!(id, ModelId::BlowupAlpha | ModelId::GlobalAlpha) {
        FateTag::Extinction
    } else {
        FateTag::ZeroCrossing
    }
}

/// Integrates one orbit and classifies it; returns the trajectory as well.
pub fn shoot_orbit(
    spec: &ModelSpec,
    launch: &Launch,
    z_max: f64,
    band: f64,
) -> Result<(Fate, Trajectory), ShootingError> {
    if !(z_max > 1.0) {
        return Err(ShootingError::DomainTooShort(z_max));
    }
    // the degenerate equations are shot unregularized
    let spec = spec.with_nu(0.0);
    let rule = FateRule::for_model(&spec, launch);
    let (z0, y0) = launch.start(&spec)?;
    let sign0 = if y0[0] < 0.0 { -1.0 } else { 1.0 };
    let events = [
        Event::new(move |_, y| sign0 * y[0] - ZERO_LEVEL).terminal().crossing(Crossing::Falling),
        Event::new(move |z, y| if rule.branches.0 { rule.growth_gap(z, y[0]) } else { -1.0 })
            .terminal()
            .crossing(Crossing::Rising),
        Event::new(move |z, y| if rule.branches.1 { rule.growth_gap(z, -y[0]) } else { -1.0 })
            .terminal()
            .crossing(Crossing::Rising),
    ];
    let (traj, hits) =
        integrate_with_events(|z, y, dy| spec.rhs_into(z, y, dy), &y0, (z0, -z_max), &shooting_options(), &events)?;
    let fate = if let Some(hit) = hits.last() {
        let tag = match hit.event {
            0 => zero_tag(spec.id),
            1 => FateTag::GrowthPlus,
            _ => FateTag::GrowthMinus,
        };
        Fate { tag, z: hit.t, value: hit.state[0] }
    } else {
        let end = traj.end();
        let g = traj.last_state()[0];
        let tag = match traj.termination {
            Termination::StepUnderflow | Termination::Blowup
                if g.abs() <= UNDERFLOW_SMALL || traj.last_state()[1].abs() >= STEEP_RATIO * g.abs() =>
            {
                zero_tag(spec.id)
            }
            Termination::SpanEnd => {
                let inside = if rule.relative_band {
                    (g - rule.target(end)).abs() <= band * rule.target(end)
                } else {
                    sign0 * g > 0.0
                };
                if inside {
                    FateTag::BoundedCandidate
                } else {
                    FateTag::Indeterminate
                }
            }
            _ => FateTag::Indeterminate,
        };
        Fate { tag, z: end, value: g }
    };
    Ok((fate, traj))
}

pub fn classify_fate(spec: &ModelSpec, launch: &Launch, z_max: f64, band: f64) -> Result<Fate, ShootingError> {
    shoot_orbit(spec, launch, z_max, band).map(|(fate, _)| fate)
}

/// One-parameter families of initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamAxis {
    /// D in g = Cz + Dz³ + … (NDE50).
    ShockCubic { c: f64 },
    /// f‴(0) with f′(0) fixed (α-families).
    OddThird { f1: f64 },
    /// F′(0) = F‴(0) = p in the outward coordinate s = −y, with F(0) = f0, F″ = F⁗ = 0.
    GlobalDiagonal { f0: f64 },
    /// F″(0) = p with F(0) = f0 and the other derivatives zero.
    GlobalCurvature { f0: f64 },
    /// Straight line between two full states at y = 0.
    Segment { from: Vec<f64>, to: Vec<f64> },
}

impl ParamAxis {
    pub fn name(&self) -> &'static str {
        match self {
            ParamAxis::ShockCubic { .. } => "D",
            ParamAxis::OddThird { .. } => "f3",
            ParamAxis::GlobalDiagonal { .. } => "F1=F3 (outward)",
            ParamAxis::GlobalCurvature { .. } => "F2",
            ParamAxis::Segment { .. } => "theta",
        }
    }

    pub fn launch(&self, p: f64, z_eps: f64) -> Launch {
        match self {
            ParamAxis::ShockCubic { c } => Launch::Series { params: SeriesParams::Shock { c: *c, d: p }, z_eps },
            ParamAxis::OddThird { f1 } => Launch::Series { params: SeriesParams::Odd { f1: *f1, f3: p }, z_eps },
            // d/dy = −d/ds flips the odd derivatives
            ParamAxis::GlobalDiagonal { f0 } => Launch::State { at: 0.0, state: vec![*f0, -p, 0.0, -p, 0.0] },
            ParamAxis::GlobalCurvature { f0 } => Launch::State { at: 0.0, state: vec![*f0, 0.0, p, 0.0, 0.0] },
            ParamAxis::Segment { from, to } => Launch::State {
                at: 0.0,
                state: from.iter().zip(to).map(|(a, b)| a + p * (b - a)).collect(),
            },
        }
    }

    fn check(&self, spec: &ModelSpec) -> Result<(), ShootingError> {
        let ok = match self {
            ParamAxis::ShockCubic { .. } => spec.id == ModelId::Nde50,
            ParamAxis::OddThird { .. } => matches!(spec.id, ModelId::BlowupAlpha | ModelId::GlobalAlpha),
            ParamAxis::GlobalDiagonal { .. } | ParamAxis::GlobalCurvature { .. } | ParamAxis::Segment { .. } => {
                spec.order() == 5
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ShootingError::AxisMismatch(self.name(), spec.id))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingOutcome {
    pub param_name: String,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub fate_lo: FateTag,
    pub fate_hi: FateTag,
    pub converged_param: f64,
    pub iterations: usize,
    /// Converged parameter with the series launched at half the distance.
    pub half_launch_param: Option<f64>,
    pub profile: ProfileSolution,
}

/// Number of halvings needed to shrink `width` below `tol`.
pub fn bisection_iterations(width: f64, tol: f64) -> usize {
    if width <= tol {
        0
    } else {
        (width / tol).log2().ceil() as usize
    }
}

/// Fate of a midpoint probe, extending the domain when the orbit has not yet decided.
fn decisive_fate(spec: &ModelSpec, launch: &Launch, z_max: f64, band: f64) -> Result<Fate, ShootingError> {
    let mut reach = z_max;
    loop {
        let fate = classify_fate(spec, launch, reach, band)?;
        if fate.tag.class().is_some() || reach >= 8.0 * z_max {
            return Ok(fate);
        }
        reach *= 2.0;
    }
}

fn bisect_core(
    spec: &ModelSpec,
    axis: &ParamAxis,
    bracket: (f64, f64),
    z_max: f64,
    tol: f64,
    z_eps: f64,
) -> Result<(f64, f64, FateTag, FateTag, usize), ShootingError> {
    let (mut lo, mut hi) = bracket;
    let band = DEFAULT_BAND;
    let fate_lo = decisive_fate(spec, &axis.launch(lo, z_eps), z_max, band)?.tag;
    let fate_hi = decisive_fate(spec, &axis.launch(hi, z_eps), z_max, band)?.tag;
    let class_lo = fate_lo.class().ok_or(ShootingError::NotDichotomous(fate_lo))?;
    let class_hi = fate_hi.class().ok_or(ShootingError::NotDichotomous(fate_hi))?;
    if class_lo == class_hi {
        return Err(ShootingError::SameFate(fate_lo));
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fate = decisive_fate(spec, &axis.launch(mid, z_eps), z_max, band)?;
        iterations += 1;
        match fate.tag.class() {
            Some(c) if c == class_lo => lo = mid,
            Some(_) => hi = mid,
            // still undecided after extending the domain: the midpoint is as good as it gets
            None => {
                lo = mid;
                hi = mid;
            }
        }
    }
    Ok((lo, hi, fate_lo, fate_hi, iterations))
}

/// Prepends origin-series nodes between the launch point and z = 0.
fn profile_from_orbit(spec: &ModelSpec, launch: &Launch, traj: &Trajectory) -> Result<ProfileSolution, ShootingError> {
    let mut grid: Vec<f64> = Vec::new();
    let mut states: Vec<Vec<f64>> = Vec::new();
    if let Launch::Series { params, z_eps } = launch {
        for k in 0..8 {
            let z = z_eps * k as f64 / 8.0;
            grid.push(z);
            states.push(series_init(spec, *params, z)?);
        }
    }
    grid.extend_from_slice(&traj.nodes);
    states.extend(traj.states.iter().cloned());
    Ok(ProfileSolution::from_states(spec.with_nu(0.0), grid, &states))
}

pub fn bisect_parameter(
    spec: &ModelSpec,
    axis: &ParamAxis,
    bracket: (f64, f64),
    z_max: f64,
    tol: f64,
) -> Result<ShootingOutcome, ShootingError> {
    if !(bracket.0.is_finite() && bracket.1.is_finite() && bracket.0 < bracket.1) {
        return Err(ShootingError::BadBracket(bracket.0, bracket.1));
    }
    if !(tol > 0.0) {
        return Err(ShootingError::BadTolerance(tol));
    }
    if !(z_max > 1.0) {
        return Err(ShootingError::DomainTooShort(z_max));
    }
    axis.check(spec)?;
    let (lo, hi, fate_lo, fate_hi, iterations) = bisect_core(spec, axis, bracket, z_max, tol, DEFAULT_Z_EPS)?;
    let converged = 0.5 * (lo + hi);
    let half_launch_param = match axis {
        ParamAxis::ShockCubic { .. } | ParamAxis::OddThird { .. } => {
            let (l2, h2, ..) = bisect_core(spec, axis, bracket, z_max, tol, 0.5 * DEFAULT_Z_EPS)?;
            Some(0.5 * (l2 + h2))
        }
        _ => None,
    };
    let launch = axis.launch(converged, DEFAULT_Z_EPS);
    let (fate, traj) = shoot_orbit(spec, &launch, z_max, DEFAULT_BAND)?;
    let mut profile = profile_from_orbit(spec, &launch, &traj)?;
    profile.shoot_params = Some(vec![converged]);
    profile.fate = Some(fate.tag);
    Ok(ShootingOutcome {
        param_name: axis.name().to_string(),
        bracket_lo: lo,
        bracket_hi: hi,
        fate_lo,
        fate_hi,
        converged_param: converged,
        iterations,
        half_launch_param,
        profile,
    })
}

/// NDE50 shock profile by shooting on D with C = −1.
pub fn shoot_d0(z_max: f64, tol: f64) -> Result<ShootingOutcome, ShootingError> {
    bisect_parameter(&ModelSpec::nde50(), &ParamAxis::ShockCubic { c: -1.0 }, (-1.0, 1.0), z_max, tol)
}

/// Blow-up profile of the α-family on the f′(0) = −1 branch, shooting f‴(0).
pub fn shoot_blowup(alpha: f64, y_max: f64, tol: f64) -> Result<ShootingOutcome, ShootingError> {
    bisect_parameter(&ModelSpec::blowup(alpha)?, &ParamAxis::OddThird { f1: -1.0 }, (-1.0, 1.0), y_max, tol)
}

/// Global extension with F(0) = −1 along the outward diagonal F′ = F‴.
pub fn shoot_global_diagonal(alpha: f64, y_max: f64, tol: f64) -> Result<ShootingOutcome, ShootingError> {
    bisect_parameter(&ModelSpec::global(alpha)?, &ParamAxis::GlobalDiagonal { f0: -1.0 }, (-0.25, 0.0), y_max, tol)
}

/// Companion run on F″(0) with F(0) = −1.
pub fn shoot_global_curvature(alpha: f64, y_max: f64, tol: f64) -> Result<ShootingOutcome, ShootingError> {
    bisect_parameter(&ModelSpec::global(alpha)?, &ParamAxis::GlobalCurvature { f0: -1.0 }, (-0.2, -0.1), y_max, tol)
}

/// Jump of the collapsing shock, [u](0, t) = 2 f₀ (−t)^α for t < 0.
pub fn collapse_jump(f0: f64, t: f64, alpha: f64) -> f64 {
    2.0 * f0 * (-t).powf(alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub tuple: [f64; 5],
    pub fate: FateTag,
    pub z: f64,
    /// True for orbits produced by refining a fate transition between grid neighbours.
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub model: ModelId,
    pub alpha: f64,
    pub y_max: f64,
    pub rows: Vec<ScanRow>,
    pub counts: Vec<(FateTag, usize)>,
    pub bounded_candidates: usize,
    pub note: String,
}

/// The (1, −1, 0, 0, F₄) family with F₄ on [−10, 10] in steps of 0.1.
pub fn default_scan_grid() -> Vec<[f64; 5]> {
    (-100..=100).map(|k| [1.0, -1.0, 0.0, 0.0, k as f64 / 10.0]).collect()
}

fn scan_row(spec: &ModelSpec, tuple: [f64; 5], y_max: f64) -> Result<ScanRow, ShootingError> {
    if !(tuple[0] > 0.0 && tuple[1] < 0.0) {
        return Ok(ScanRow { tuple, fate: FateTag::Indeterminate, z: 0.0, refined: false });
    }
    let fate = classify_fate(spec, &Launch::State { at: 0.0, state: tuple.to_vec() }, y_max, DEFAULT_BAND)?;
    Ok(ScanRow { tuple, fate: fate.tag, z: fate.z, refined: false })
}

/// Classifies every tuple, then refines each fate transition between consecutive
/// grid points by bisection on the joining segment and classifies the limit orbit.
pub fn explore_global_extension(
    spec: &ModelSpec,
    grid: &[[f64; 5]],
    y_max: f64,
) -> Result<ScanReport, ShootingError> {
    let alpha = spec.alpha.ok_or(ModelError::MissingParameter(spec.id, "alpha"))?;
    spec.validate()?;
    let mut rows: Vec<ScanRow> =
        grid.par_iter().map(|&t| scan_row(spec, t, y_max)).collect::<Result<Vec<_>, _>>()?;

    let transitions: Vec<(usize, usize)> = (1..rows.len())
        .filter(|&i| {
            let (a, b) = (rows[i - 1].fate.class(), rows[i].fate.class());
            a.is_some() && b.is_some() && a != b
        })
        .map(|i| (i - 1, i))
        .collect();
    let refined: Vec<ScanRow> = transitions
        .par_iter()
        .map(|&(i, j)| {
            let axis = ParamAxis::Segment { from: rows[i].tuple.to_vec(), to: rows[j].tuple.to_vec() };
            let (lo, hi, ..) = bisect_core(spec, &axis, (0.0, 1.0), y_max, 1e-13, DEFAULT_Z_EPS)?;
            let theta = 0.5 * (lo + hi);
            let launch = axis.launch(theta, DEFAULT_Z_EPS);
            let fate = classify_fate(spec, &launch, y_max, DEFAULT_BAND)?;
            let state = match launch {
                Launch::State { state, .. } => state,
                Launch::Series { .. } => unreachable!(),
            };
            Ok(ScanRow { tuple: [state[0], state[1], state[2], state[3], state[4]], fate: fate.tag, z: fate.z, refined: true })
        })
        .collect::<Result<Vec<_>, ShootingError>>()?;
    rows.extend(refined);

    let mut counts: Vec<(FateTag, usize)> = Vec::new();
    for row in &rows {
        match counts.iter_mut().find(|c| c.0 == row.fate) {
            Some(c) => c.1 += 1,
            None => counts.push((row.fate, 1)),
        }
    }
    let bounded_candidates = rows.iter().filter(|r| r.fate == FateTag::BoundedCandidate).count();
    Ok(ScanReport {
        model: spec.id,
        alpha,
        y_max,
        rows,
        counts,
        bounded_candidates,
        note: "numerical evidence on a finite grid and a finite domain, not a proof".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nde_launch(d: f64) -> Launch {
        Launch::series(SeriesParams::Shock { c: -1.0, d })
    }

    #[test]
    fn nde50_dichotomy_extremes() {
        let spec = ModelSpec::nde50();
        assert_eq!(classify_fate(&spec, &nde_launch(-1.0), 50.0, 0.5).unwrap().tag, FateTag::GrowthPlus);
        assert_eq!(classify_fate(&spec, &nde_launch(1.0), 50.0, 0.5).unwrap().tag, FateTag::ZeroCrossing);
    }

    #[test]
    fn iteration_count_formula() {
        assert_eq!(bisection_iterations(2.0, 1e-4), 15);
        assert_eq!(bisection_iterations(1e-5, 1e-4), 0);
    }

    #[test]
    fn bisection_meets_tolerance() {
        let out = shoot_d0(50.0, 1e-4).unwrap();
        assert!(out.bracket_hi - out.bracket_lo <= 1e-4);
        assert_eq!(out.iterations, bisection_iterations(2.0, 1e-4));
        assert_ne!(out.fate_lo.class(), out.fate_hi.class());
        assert!((out.converged_param - 0.0692916).abs() < 2e-4);
    }

    #[test]
    fn same_fate_bracket_rejected() {
        let err = bisect_parameter(&ModelSpec::nde50(), &ParamAxis::ShockCubic { c: -1.0 }, (0.5, 1.0), 50.0, 1e-3);
        assert!(matches!(err, Err(ShootingError::SameFate(_))));
    }

    #[test]
    fn axis_must_match_model() {
        let err = bisect_parameter(&ModelSpec::nde50(), &ParamAxis::OddThird { f1: -1.0 }, (-1.0, 1.0), 50.0, 1e-3);
        assert!(matches!(err, Err(ShootingError::AxisMismatch(..))));
    }

    #[test]
    fn collapse_formula() {
        assert!((collapse_jump(10.0, -0.25, 0.5) - 10.0).abs() < 1e-15);
        assert_eq!(collapse_jump(10.0, -1.0, 1.0 / 9.0), 20.0);
    }

    #[test]
    fn invalid_scan_tuples_are_indeterminate() {
        let spec = ModelSpec::global(1.0 / 9.0).unwrap();
        let report = explore_global_extension(&spec, &[[0.0; 5]], 10.0).unwrap();
        assert_eq!(report.rows[0].fate, FateTag::Indeterminate);
        assert!(report.note.contains("not a proof"));
    }
}
