//! ODE reductions as first-order systems.
//!
//! Every model is written as `lead(z, y) · y⁽ⁿ⁾ = balance(z, y)` with the
//! state `y = (g, g′, …, g⁽ⁿ⁻¹⁾)`. The right-hand side divides by `lead`,
//! regularized as `sign(lead)/√(ν² + lead²)` for the degenerate models when
//! `ν > 0`; the residual oracle works with the multiplied-out form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::shooting::FateTag;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("alpha = {0} outside (0, 1/4)")]
    AlphaOutOfRange(f64),
    #[error("model {0} needs parameter {1}")]
    MissingParameter(ModelId, &'static str),
    #[error("invalid parameter {0}: {1}")]
    InvalidParameter(&'static str, String),
    #[error("division by zero: leading coefficient {0:e} at z = {1}")]
    DivisionByZero(f64, f64),
    #[error("state has length {got}, model order is {expected}")]
    WrongOrder { expected: usize, got: usize },
    #[error("|z_eps| = {0} exceeds the series validity radius 0.5")]
    SeriesRadius(f64),
    #[error("no origin series for model {0}")]
    NoSeries(ModelId),
    #[error("model {0} has no scaling symmetry")]
    NoScaling(ModelId),
    #[error("rescale factor must be nonzero")]
    ZeroScale,
    #[error("grid too coarse: {0} nodes, need at least 11")]
    GridTooCoarse(usize),
    #[error("unknown model name {0:?}")]
    UnknownModel(String),
    #[error("malformed config line {0:?}")]
    MalformedConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelId {
    Nde50,
    Nde41,
    Nde32,
    Nde23,
    Nde14,
    UniformDiv,
    UniformNondiv,
    BlowupAlpha,
    GlobalAlpha,
    T5Phase,
    CompactonQuintic,
    CompactonSigned,
    LinearKernel,
}

impl ModelId {
    pub const ALL: [ModelId; 13] = [
        ModelId::Nde50,
        ModelId::Nde41,
        ModelId::Nde32,
        ModelId::Nde23,
        ModelId::Nde14,
        ModelId::UniformDiv,
        ModelId::UniformNondiv,
        ModelId::BlowupAlpha,
        ModelId::GlobalAlpha,
        ModelId::T5Phase,
        ModelId::CompactonQuintic,
        ModelId::CompactonSigned,
        ModelId::LinearKernel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Nde50 => "nde50",
            ModelId::Nde41 => "nde41",
            ModelId::Nde32 => "nde32",
            ModelId::Nde23 => "nde23",
            ModelId::Nde14 => "nde14",
            ModelId::UniformDiv => "uniform_div",
            ModelId::UniformNondiv => "uniform_nondiv",
            ModelId::BlowupAlpha => "blowup_alpha",
            ModelId::GlobalAlpha => "global_alpha",
            ModelId::T5Phase => "t5_phase",
            ModelId::CompactonQuintic => "compacton_quintic",
            ModelId::CompactonSigned => "compacton_signed",
            ModelId::LinearKernel => "linear_kernel",
        }
    }

    /// Order of the first-order system.
    pub fn order(self) -> usize {
        match self {
            ModelId::T5Phase => 1,
            ModelId::CompactonQuintic | ModelId::CompactonSigned | ModelId::LinearKernel => 4,
            _ => 5,
        }
    }

    /// Models whose leading coefficient is the unknown itself.
    pub fn is_degenerate(self) -> bool {
        matches!(
            self,
            ModelId::Nde50
                | ModelId::Nde41
                | ModelId::Nde32
                | ModelId::Nde23
                | ModelId::Nde14
                | ModelId::BlowupAlpha
                | ModelId::GlobalAlpha
        )
    }

    pub fn is_nde(self) -> bool {
        matches!(
            self,
            ModelId::Nde50 | ModelId::Nde41 | ModelId::Nde32 | ModelId::Nde23 | ModelId::Nde14
        )
    }

    /// Invariance under g(z) ↦ −g(−z).
    pub fn has_odd_symmetry(self) -> bool {
        self.is_nde() || matches!(self, ModelId::BlowupAlpha | ModelId::GlobalAlpha)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ModelId::ALL
            .iter()
            .copied()
            .find(|m| m.name() == key)
            .ok_or_else(|| ModelError::UnknownModel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: ModelId,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub c0: f64,
    pub a: f64,
    pub b: f64,
    pub nu: f64,
    pub pert: (f64, f64),
}

pub const DEFAULT_NU: f64 = 1e-4;

impl ModelSpec {
    pub fn new(id: ModelId) -> Self {
        Self {
            id,
            alpha: None,
            beta: None,
            c0: 1.0,
            a: 1.0,
            b: 0.0,
            nu: if id.is_degenerate() { DEFAULT_NU } else { 0.0 },
            pert: (0.0, 0.0),
        }
    }

    pub fn nde50() -> Self {
        Self::new(ModelId::Nde50)
    }

    pub fn alpha_family(id: ModelId, alpha: f64) -> Result<Self, ModelError> {
        if !(alpha > 0.0 && alpha < 0.25) {
            return Err(ModelError::AlphaOutOfRange(alpha));
        }
        let mut spec = Self::new(id);
        spec.alpha = Some(alpha);
        spec.beta = Some((1.0 + alpha) / 5.0);
        Ok(spec)
    }

    pub fn blowup(alpha: f64) -> Result<Self, ModelError> {
        Self::alpha_family(ModelId::BlowupAlpha, alpha)
    }

    pub fn global(alpha: f64) -> Result<Self, ModelError> {
        Self::alpha_family(ModelId::GlobalAlpha, alpha)
    }

    pub fn t5(a: f64, b: f64) -> Result<Self, ModelError> {
        if !(a > 0.0) {
            return Err(ModelError::InvalidParameter("A", format!("{a} must be positive")));
        }
        let mut spec = Self::new(ModelId::T5Phase);
        spec.a = a;
        spec.b = b;
        Ok(spec)
    }

    pub fn quintic_compacton(b: f64, c: f64) -> Self {
        let mut spec = Self::new(ModelId::CompactonQuintic);
        spec.pert = (b, c);
        spec
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn order(&self) -> usize {
        self.id.order()
    }

    fn alpha_beta(&self) -> (f64, f64) {
        (self.alpha.unwrap_or(0.0), self.beta.unwrap_or(0.2))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.nu >= 0.0) {
            return Err(ModelError::InvalidParameter("nu", format!("{} must be >= 0", self.nu)));
        }
        if matches!(self.id, ModelId::BlowupAlpha | ModelId::GlobalAlpha) {
            let alpha = self.alpha.ok_or(ModelError::MissingParameter(self.id, "alpha"))?;
            if !(alpha > 0.0 && alpha < 0.25) {
                return Err(ModelError::AlphaOutOfRange(alpha));
            }
            let beta = self.beta.ok_or(ModelError::MissingParameter(self.id, "beta"))?;
            if (beta - (1.0 + alpha) / 5.0).abs() > 1e-15 {
                return Err(ModelError::InvalidParameter("beta", format!("{beta} != (1+alpha)/5")));
            }
        }
        if self.id == ModelId::T5Phase && !(self.a > 0.0) {
            return Err(ModelError::InvalidParameter("A", format!("{} must be positive", self.a)));
        }
        Ok(())
    }

    /// Leading coefficient and balance: `lead · y⁽ⁿ⁾ = balance`.
    pub fn lead_balance(&self, z: f64, y: &[f64]) -> (f64, f64) {
        let g = y[0];
        match self.id {
            ModelId::Nde50 => (g, -0.2 * y[1] * z),
            ModelId::Nde41 => (g, -0.2 * y[1] * z - y[1] * y[4]),
            ModelId::Nde32 => (g, -0.2 * y[1] * z - y[2] * y[3] - 2.0 * y[1] * y[4]),
            ModelId::Nde23 => (g, -0.2 * y[1] * z - 4.0 * y[2] * y[3] - 3.0 * y[1] * y[4]),
            ModelId::Nde14 => (g, -0.2 * y[1] * z - 5.0 * y[1] * y[4] - 10.0 * y[2] * y[3]),
            ModelId::UniformDiv => {
                let (g1, g2, g3, g4) = (y[1], y[2], y[3], y[4]);
                (
                    1.0 + g * g,
                    -0.2 * g1 * z
                        - 10.0 * g * g1 * g4
                        - 20.0 * g1 * g1 * g3
                        - 20.0 * g * g2 * g3
                        - 30.0 * g1 * g2 * g2,
                )
            }
            ModelId::UniformNondiv => (1.0 + g * g, -0.2 * y[1] * z),
            ModelId::BlowupAlpha => {
                let (alpha, beta) = self.alpha_beta();
                (g, -5.0 * y[1] * y[4] - 10.0 * y[2] * y[3] - beta * y[1] * z + alpha * g)
            }
            ModelId::GlobalAlpha => {
                let (alpha, beta) = self.alpha_beta();
                (g, -5.0 * y[1] * y[4] - 10.0 * y[2] * y[3] + beta * y[1] * z - alpha * g)
            }
            ModelId::T5Phase => (g - z.powi(5), self.a * z + self.b * z.powi(3)),
            ModelId::CompactonQuintic => {
                let (b, c) = self.pert;
                (1.0, g.max(0.0).sqrt() - b * y[2] - c * g)
            }
            ModelId::CompactonSigned => (1.0, g - 2.0 * g.signum() * g.abs().sqrt()),
            ModelId::LinearKernel => (1.0, g * z / 5.0),
        }
    }

    /// Reciprocal of the leading coefficient, regularized for degenerate models.
    fn inverse_lead(&self, lead: f64) -> f64 {
        if self.id.is_degenerate() && self.nu > 0.0 {
            if lead == 0.0 {
                0.0
            } else {
                lead.signum() / (self.nu * self.nu + lead * lead).sqrt()
            }
        } else {
            1.0 / lead
        }
    }

    /// Highest derivative `y⁽ⁿ⁾` at (z, y).
    pub fn top_derivative(&self, z: f64, y: &[f64]) -> f64 {
        let (lead, balance) = self.lead_balance(z, y);
        balance * self.inverse_lead(lead)
    }

    /// In-place right-hand side for the integrator; division by an exact zero yields ±inf or NaN.
    pub fn rhs_into(&self, z: f64, y: &[f64], dy: &mut [f64]) {
        let n = y.len();
        dy[..n - 1].copy_from_slice(&y[1..]);
        dy[n - 1] = self.top_derivative(z, y);
    }

    /// Checked right-hand side.
    pub fn rhs(&self, z: f64, y: &[f64]) -> Result<Vec<f64>, ModelError> {
        if y.len() != self.order() {
            return Err(ModelError::WrongOrder { expected: self.order(), got: y.len() });
        }
        let (lead, _) = self.lead_balance(z, y);
        let unregularized = !(self.id.is_degenerate() && self.nu > 0.0);
        if unregularized && lead.abs() < f64::MIN_POSITIVE {
            return Err(ModelError::DivisionByZero(lead, z));
        }
        let mut dy = vec![0.0; y.len()];
        self.rhs_into(z, y, &mut dy);
        Ok(dy)
    }

    /// Defect of the multiplied-out ODE given the full derivative list `d[0..=n]`,
    /// together with the magnitude of its terms (for relative measures).
    pub fn defect(&self, z: f64, d: &[f64]) -> (f64, f64) {
        let n = self.order();
        let (lead, balance) = self.lead_balance(z, &d[..n]);
        let lhs = lead * d[n];
        (lhs - balance, lhs.abs() + balance.abs())
    }

    /// Flat key=value form.
    pub fn to_config(&self) -> String {
        let mut out = format!("model={}\n", self.id);
        if let Some(alpha) = self.alpha {
            out.push_str(&format!("alpha={alpha:?}\n"));
        }
        out.push_str(&format!("c0={:?}\nnu={:?}\nA={:?}\nB={:?}\n", self.c0, self.nu, self.a, self.b));
        out.push_str(&format!("pert_b={:?}\npert_c={:?}\n", self.pert.0, self.pert.1));
        out
    }

    pub fn from_config(text: &str) -> Result<Self, ModelError> {
        let map = parse_key_values(text)?;
        Self::from_map(&map)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ModelError> {
        let id: ModelId = map
            .get("model")
            .ok_or(ModelError::MalformedConfig("missing model key".into()))?
            .parse()?;
        let mut spec = match map.get("alpha") {
            Some(raw) => Self::alpha_family(id, parse_real("alpha", raw)?)?,
            None => Self::new(id),
        };
        if let Some(raw) = map.get("c0") {
            spec.c0 = parse_real("c0", raw)?;
        }
        if let Some(raw) = map.get("nu") {
            spec.nu = parse_real("nu", raw)?;
        }
        if let Some(raw) = map.get("A") {
            spec.a = parse_real("A", raw)?;
        }
        if let Some(raw) = map.get("B") {
            spec.b = parse_real("B", raw)?;
        }
        if let Some(raw) = map.get("pert_b") {
            spec.pert.0 = parse_real("pert_b", raw)?;
        }
        if let Some(raw) = map.get("pert_c") {
            spec.pert.1 = parse_real("pert_c", raw)?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, ModelError> {
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ModelError::MalformedConfig(line.to_string()))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Real number or exact fraction `p/q`.
pub fn parse_real(name: &'static str, raw: &str) -> Result<f64, ModelError> {
    let raw = raw.trim();
    if let Some((p, q)) = raw.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| ModelError::InvalidParameter(name, raw.into()))?;
        let q: i64 = q.trim().parse().map_err(|_| ModelError::InvalidParameter(name, raw.into()))?;
        if q == 0 {
            return Err(ModelError::InvalidParameter(name, raw.into()));
        }
        return Ok(p as f64 / q as f64);
    }
    raw.parse().map_err(|_| ModelError::InvalidParameter(name, raw.into()))
}

/// Free constants of an origin expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SeriesParams {
    /// g = Cz + Dz³ + … for the NDE50 blow-up profile.
    Shock { c: f64, d: f64 },
    /// Odd expansion with f′(0) and f‴(0) for the α-families.
    Odd { f1: f64, f3: f64 },
    /// Phase-plane shock, constants taken from the model.
    Phase,
}

pub const SERIES_RADIUS: f64 = 0.5;

/// Coefficients a_m of the odd α-family series, indices 0..=max_power.
pub fn alpha_series_coefficients(spec: &ModelSpec, f1: f64, f3: f64, max_power: usize) -> Vec<f64> {
    let (alpha, beta) = spec.alpha_beta();
    let sign = if spec.id == ModelId::GlobalAlpha { -1.0 } else { 1.0 };
    let mut a = vec![0.0; max_power + 6];
    a[1] = f1;
    a[3] = f3 / 6.0;
    let mut m = 1;
    while m + 4 <= max_power {
        let n = m + 5;
        let k = m + 4;
        let fac: f64 = ((m + 1)..=n).map(|v| v as f64).product();
        let mut partial = 0.0;
        for i in 1..n {
            let j = n - i;
            if i == 1 || i == k || j == 1 || j == k {
                continue;
            }
            partial += a[i] * a[j];
        }
        let linear = sign * (alpha - beta * m as f64) * a[m];
        a[k] = (linear - 0.5 * fac * partial) / (fac * f1);
        m += 2;
    }
    a.truncate(max_power + 1);
    a
}

fn poly_derivatives(coeffs: &[f64], z: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|d| {
            coeffs
                .iter()
                .enumerate()
                .skip(d)
                .map(|(k, c)| {
                    let falling: f64 = ((k - d + 1)..=k).map(|v| v as f64).product();
                    c * falling * z.powi((k - d) as i32)
                })
                .sum()
        })
        .collect()
}

/// State at `z_eps` from the truncated origin series.
pub fn series_init(spec: &ModelSpec, params: SeriesParams, z_eps: f64) -> Result<Vec<f64>, ModelError> {
    if z_eps.abs() > SERIES_RADIUS {
        return Err(ModelError::SeriesRadius(z_eps.abs()));
    }
    match (spec.id, params) {
        (ModelId::Nde50, SeriesParams::Shock { c, d }) => {
            if c == 0.0 {
                return Err(ModelError::InvalidParameter("C", "must be nonzero".into()));
            }
            let coeffs = [0.0, c, 0.0, d, 0.0, -1.0 / 600.0, 0.0, -d / (6300.0 * c)];
            Ok(poly_derivatives(&coeffs, z_eps, 5))
        }
        (ModelId::BlowupAlpha | ModelId::GlobalAlpha, SeriesParams::Odd { f1, f3 }) => {
            if f1 == 0.0 {
                return Err(ModelError::InvalidParameter("f1", "must be nonzero".into()));
            }
            let coeffs = alpha_series_coefficients(spec, f1, f3, 19);
            Ok(poly_derivatives(&coeffs, z_eps, 5))
        }
        (ModelId::T5Phase, _) => {
            let c1 = -spec.a.sqrt();
            let c3 = spec.b / (4.0 * c1);
            Ok(vec![c1 * z_eps + c3 * z_eps.powi(3)])
        }
        (id, _) => Err(ModelError::NoSeries(id)),
    }
}

/// A solved profile on an increasing grid, with derivative columns 0..=4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSolution {
    pub model: ModelSpec,
    pub grid: Vec<f64>,
    pub values: [Vec<f64>; 5],
    pub shoot_params: Option<Vec<f64>>,
    pub fate: Option<FateTag>,
    pub residual_sup: f64,
}

impl ProfileSolution {
    /// Builds a profile from states of the first-order system; missing derivative
    /// columns come from the ODE (next order) and finite differences (beyond).
    pub fn from_states(model: ModelSpec, grid: Vec<f64>, states: &[Vec<f64>]) -> Self {
        let mut grid = grid;
        let mut states = states.to_vec();
        if grid.len() > 1 && grid[0] > grid[grid.len() - 1] {
            grid.reverse();
            states.reverse();
        }
        let n = model.order();
        let len = grid.len();
        let mut values: [Vec<f64>; 5] = Default::default();
        for (k, col) in values.iter_mut().enumerate() {
            if k < n {
                *col = states.iter().map(|s| s[k]).collect();
            } else if k == n {
                *col = grid.iter().zip(&states).map(|(&z, s)| model.top_derivative(z, s)).collect();
            } else {
                *col = vec![0.0; len];
            }
        }
        for k in (n + 1)..5 {
            values[k] = differentiate(&grid, &values[k - 1]);
        }
        let mut profile =
            Self { model, grid, values, shoot_params: None, fate: None, residual_sup: f64::NAN };
        profile.residual_sup = residual(&model, &profile).unwrap_or(f64::NAN);
        profile
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Row `i` as (g, g′, g″, g‴, g⁗).
    pub fn row(&self, i: usize) -> [f64; 5] {
        [self.values[0][i], self.values[1][i], self.values[2][i], self.values[3][i], self.values[4][i]]
    }

    /// Piecewise-cubic Hermite interpolation of g using the g′ column.
    pub fn interpolate(&self, z: f64) -> Option<f64> {
        self.interpolate_column(0, z)
    }

    pub fn interpolate_column(&self, k: usize, z: f64) -> Option<f64> {
        let n = self.grid.len();
        if n == 0 || z < self.grid[0] || z > self.grid[n - 1] {
            return None;
        }
        let i = self.grid.partition_point(|&x| x <= z).saturating_sub(1).min(n.saturating_sub(2));
        if n == 1 {
            return Some(self.values[k][0]);
        }
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let t = (z - x0) / h;
        let (y0, y1) = (self.values[k][i], self.values[k][i + 1]);
        if k == 4 {
            return Some(y0 + t * (y1 - y0));
        }
        let (d0, d1) = (self.values[k + 1][i] * h, self.values[k + 1][i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        Some(
            (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                + (t3 - 2.0 * t2 + t) * d0
                + (-2.0 * t3 + 3.0 * t2) * y1
                + (t3 - t2) * d1,
        )
    }

    /// Restricts to nodes inside [lo, hi].
    pub fn window(&self, lo: f64, hi: f64) -> ProfileSolution {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.grid[i] >= lo && self.grid[i] <= hi).collect();
        let pick = |col: &Vec<f64>| idx.iter().map(|&i| col[i]).collect::<Vec<f64>>();
        ProfileSolution {
            model: self.model,
            grid: pick(&self.grid),
            values: [
                pick(&self.values[0]),
                pick(&self.values[1]),
                pick(&self.values[2]),
                pick(&self.values[3]),
                pick(&self.values[4]),
            ],
            shoot_params: self.shoot_params.clone(),
            fate: self.fate,
            residual_sup: self.residual_sup,
        }
    }
}

/// Five-point finite-difference weights (Fornberg) for the first derivative at `x0`.
pub fn fd_weights(nodes: &[f64], x0: f64, order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[order]).collect()
}

/// Fourth-order first derivative on a nonuniform grid (five-point stencils).
pub fn differentiate(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n < 5 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2).min(n - 5);
            let w = fd_weights(&grid[lo..lo + 5], grid[i], 1);
            (0..5).map(|j| w[j] * values[lo + j]).sum()
        })
        .collect()
}

/// Sup-norm of the ODE defect, with the top derivative rebuilt by finite
/// differences of the highest stored state column; relative to the size of the
/// equation's terms when those exceed one.
pub fn residual(spec: &ModelSpec, profile: &ProfileSolution) -> Result<f64, ModelError> {
    let len = profile.grid.len();
    if len < 11 {
        return Err(ModelError::GridTooCoarse(len));
    }
    let n = spec.order();
    let top = differentiate(&profile.grid, &profile.values[n - 1]);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 2..len - 2 {
        let mut d: Vec<f64> = (0..n).map(|k| profile.values[k][i]).collect();
        d.push(top[i]);
        let (defect, size) = spec.defect(profile.grid[i], &d);
        worst = worst.max(defect.abs());
        scale = scale.max(size);
    }
    Ok(worst / scale.max(1.0))
}

/// gₐ(z) = a⁵ g(z/a); derivative k scales by a⁵⁻ᵏ.
pub fn rescale(profile: &ProfileSolution, a: f64) -> Result<ProfileSolution, ModelError> {
    if a == 0.0 {
        return Err(ModelError::ZeroScale);
    }
    if !profile.model.id.is_nde() {
        return Err(ModelError::NoScaling(profile.model.id));
    }
    let mut grid: Vec<f64> = profile.grid.iter().map(|z| a * z).collect();
    let mut values = profile.values.clone();
    for (k, col) in values.iter_mut().enumerate() {
        let factor = a.powi(5 - k as i32);
        col.iter_mut().for_each(|v| *v *= factor);
    }
    if a < 0.0 {
        grid.reverse();
        values.iter_mut().for_each(|c| c.reverse());
    }
    let mut out = ProfileSolution {
        model: profile.model,
        grid,
        values,
        shoot_params: profile.shoot_params.clone(),
        fate: profile.fate,
        residual_sup: f64::NAN,
    };
    out.residual_sup = residual(&out.model, &out).unwrap_or(f64::NAN);
    Ok(out)
}
