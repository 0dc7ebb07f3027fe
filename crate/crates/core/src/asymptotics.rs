//! Local and far-field expansions, characteristic polynomials, bundle counting,
//! tail fitting and the fundamental kernel of the linear dispersion equation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ivp::{integrate, IntegrationOptions};
use crate::models::{ModelId, ModelSpec, ProfileSolution};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("z = {0} outside the envelope range z <= -1")]
    EnvelopeRange(f64),
    #[error("alpha = {0} outside (0, 1/4)")]
    AlphaOutOfRange(f64),
    #[error("C0 = {0} must be positive")]
    Amplitude(f64),
    #[error("model {0} has no finite-interface branch")]
    NoInterface(ModelId),
    #[error("kernel grid exceeds |y| <= 20")]
    KernelRange,
    #[error("kernel quadrature did not converge: {0}")]
    KernelQuadrature(String),
    #[error("not enough extrema for a tail fit ({0})")]
    TooFewExtrema(usize),
    #[error("polynomial of degree zero has no roots")]
    ConstantPolynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Center {
    Finite(f64),
    MinusInfinity,
    PlusInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub coefficient: f64,
    pub exponent: f64,
    pub log_power: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesExpansion {
    pub center: Center,
    pub terms: Vec<SeriesTerm>,
    pub validity: String,
}

impl SeriesExpansion {
    /// Leading-order value at distance `s` from the center (|ln s| for log terms).
    pub fn eval(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * s.powf(t.exponent) * s.ln().abs().powi(t.log_power))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    /// Coefficients in ascending degree.
    pub poly: Vec<f64>,
    pub roots: Vec<Complex64>,
    pub residual_bound: f64,
    pub note: Option<String>,
}

impl RootSet {
    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn max_residual(&self) -> f64 {
        self.roots.iter().map(|r| poly_eval(&self.poly, *r).norm()).fold(0.0, f64::max)
    }

    pub fn real_roots(&self, tol: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self.roots.iter().filter(|r| r.im.abs() <= tol).map(|r| r.re).collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

pub fn poly_eval(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

/// Product of (m + r) for the given shifts, ascending coefficients.
fn poly_from_shifts(shifts: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &r in shifts {
        let mut next = vec![0.0; p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            next[k] += r * c;
            next[k + 1] += c;
        }
        p = next;
    }
    p
}

/// Companion-matrix eigenvalues followed by one Newton polish step per root.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>, AsymptoticsError> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
        coeffs.pop();
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Err(AsymptoticsError::ConstantPolynomial);
    }
    let lead = coeffs[n];
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -coeffs[i] / lead;
    }
    let eig = companion.complex_eigenvalues();
    let deriv = poly_derivative(&coeffs);
    let mut roots: Vec<Complex64> = eig
        .iter()
        .map(|&r| {
            let d = poly_eval(&deriv, r);
            if d.norm() > 0.0 {
                let polished = r - poly_eval(&coeffs, r) / d;
                if poly_eval(&coeffs, polished).norm() <= poly_eval(&coeffs, r).norm() {
                    return polished;
                }
            }
            r
        })
        .collect();
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    Ok(roots)
}

fn root_set(poly: Vec<f64>, note: Option<String>) -> RootSet {
    let roots = polynomial_roots(&poly).expect("non-constant polynomial");
    let mut set = RootSet { poly, roots, residual_bound: 1e-10, note };
    set.residual_bound = set.residual_bound.max(set.max_residual());
    set
}

/// h_α(m) = (m+1)(m+2)(m+3)(m+4)(m+5)/15120 − βm + α.
pub fn char_poly_blowup(alpha: f64) -> Result<RootSet, AsymptoticsError> {
    if !(alpha > 0.0 && alpha < 0.25) {
        return Err(AsymptoticsError::AlphaOutOfRange(alpha));
    }
    let beta = (1.0 + alpha) / 5.0;
    let mut poly: Vec<f64> = poly_from_shifts(&[1.0, 2.0, 3.0, 4.0, 5.0]).iter().map(|c| c / 15120.0).collect();
    poly[0] += alpha;
    poly[1] -= beta;
    let note = format!(
        "h(-5) = 5*beta + alpha = {:.6}, so m = -5 is not a root of this polynomial; \
         only three roots are real. Five negative real roots (one near -5) belong to \
         (m+1)...(m+5) - beta*m + alpha without the 1/15120 factor, which is not the linearization",
        5.0 * beta + alpha
    );
    Ok(root_set(poly, Some(note)))
}

/// m(m−1)(m−2)(m−3) − 840, the interface Euler polynomial.
pub fn euler_roots_compacton() -> RootSet {
    let mut poly = poly_from_shifts(&[0.0, -1.0, -2.0, -3.0]);
    poly[0] -= 840.0;
    root_set(poly, None)
}

/// Finite-difference oracle for h_α(m): linearizes ½(f²)⁽⁵⁾ = −βyf′ + αf about
/// f* = −y⁵/15120 with the perturbation Y = (−y)ᵐ at y = −2, returning
/// −[(f*Y)⁽⁵⁾ + βyY′ − αY]/Y.
pub fn growth_linearization_oracle(alpha: f64, m: f64) -> f64 {
    let beta = (1.0 + alpha) / 5.0;
    let y: f64 = -2.0;
    let h = 0.05;
    let pert = |x: f64| (-x).powf(m);
    let product = |x: f64| -x.powi(5) / 15120.0 * pert(x);
    let pts: Vec<f64> = (-6..=6).map(|j| y + j as f64 * h).collect();
    let w5 = crate::models::fd_weights(&pts, y, 5);
    let w1 = crate::models::fd_weights(&pts, y, 1);
    let d5: f64 = pts.iter().zip(&w5).map(|(&x, w)| w * product(x)).sum();
    let d1: f64 = pts.iter().zip(&w1).map(|(&x, w)| w * pert(x)).sum();
    -(d5 + beta * y * d1 - alpha * pert(y)) / pert(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BundleKind {
    FarfieldBlowup,
    Growth,
    Vanishing,
    FarfieldGlobal,
    InterfaceNonneg,
    InterfaceSigned,
}

impl std::str::FromStr for BundleKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "FARFIELD_BLOWUP" => Ok(BundleKind::FarfieldBlowup),
            "GROWTH" => Ok(BundleKind::Growth),
            "VANISHING" => Ok(BundleKind::Vanishing),
            "FARFIELD_GLOBAL" => Ok(BundleKind::FarfieldGlobal),
            "INTERFACE_NONNEG" => Ok(BundleKind::InterfaceNonneg),
            "INTERFACE_SIGNED" => Ok(BundleKind::InterfaceSigned),
            other => Err(format!("unknown bundle kind {other:?}")),
        }
    }
}

impl BundleKind {
    pub const ALL: [BundleKind; 6] = [
        BundleKind::FarfieldBlowup,
        BundleKind::Growth,
        BundleKind::Vanishing,
        BundleKind::FarfieldGlobal,
        BundleKind::InterfaceNonneg,
        BundleKind::InterfaceSigned,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleCount {
    pub kind: BundleKind,
    pub dimension: usize,
    /// Characteristic roots or exponents that were counted.
    pub counted: Vec<Complex64>,
    /// Free parameters added on top of the counted directions.
    pub free_parameters: usize,
    /// Roots whose real part sits on the counting boundary (|Re − bound| ≤ 1e-9).
    pub ties: usize,
}

const TIE_TOL: f64 = 1e-9;

/// Far-field exponent γ = 1 + (1 − α/β)/4 of the WKBJ modes.
pub fn wkbj_gamma(alpha: f64) -> f64 {
    let beta = (1.0 + alpha) / 5.0;
    1.0 + 0.25 * (1.0 - alpha / beta)
}

/// Roots a of C₀(γa)⁴ = rhs.
fn quartic_wkbj_roots(c0: f64, gamma: f64, rhs: f64) -> Vec<Complex64> {
    let radius = (rhs.abs() / c0).powf(0.25) / gamma;
    let base = if rhs >= 0.0 { 0.0 } else { std::f64::consts::FRAC_PI_4 };
    (0..4)
        .map(|k| Complex64::from_polar(radius, base + k as f64 * std::f64::consts::FRAC_PI_2))
        .collect()
}

pub fn bundle_dimension(kind: BundleKind, alpha: f64, c0: f64) -> Result<BundleCount, AsymptoticsError> {
    let needs_alpha = matches!(kind, BundleKind::FarfieldBlowup | BundleKind::FarfieldGlobal | BundleKind::Growth);
    if needs_alpha && !(alpha > 0.0 && alpha < 0.25) {
        return Err(AsymptoticsError::AlphaOutOfRange(alpha));
    }
    if matches!(kind, BundleKind::FarfieldBlowup | BundleKind::FarfieldGlobal) && !(c0 > 0.0) {
        return Err(AsymptoticsError::Amplitude(c0));
    }
    let beta = (1.0 + alpha) / 5.0;
    let count = |roots: Vec<Complex64>, keep: &dyn Fn(f64) -> bool, bound: f64, free: usize| {
        let ties = roots.iter().filter(|r| (r.re - bound).abs() <= TIE_TOL).count();
        let counted: Vec<Complex64> = roots.into_iter().filter(|r| keep(r.re)).collect();
        BundleCount { kind, dimension: counted.len() + free, counted, free_parameters: free, ties }
    };
    let out = match kind {
        BundleKind::FarfieldBlowup => {
            // Re a ≤ 0: decaying or oscillatory; the two imaginary roots are ties
            let roots = quartic_wkbj_roots(c0, wkbj_gamma(alpha), beta);
            count(roots, &|re| re <= TIE_TOL, 0.0, 1)
        }
        BundleKind::FarfieldGlobal => {
            let roots = quartic_wkbj_roots(c0, wkbj_gamma(alpha), -beta);
            count(roots, &|re| re < -TIE_TOL, 0.0, 1)
        }
        BundleKind::Growth => {
            let set = char_poly_blowup(alpha)?;
            count(set.roots, &|re| re < 5.0 - TIE_TOL, 5.0, 0)
        }
        BundleKind::Vanishing => {
            // √s·Y is a polynomial of degree ≤ 4: exponents k − 1/2, beyond the leading 1/2
            let roots = (0..5).map(|k| Complex64::new(k as f64 - 0.5, 0.0)).collect();
            count(roots, &|re| re > 0.5 + TIE_TOL, 0.5, 1)
        }
        BundleKind::InterfaceNonneg => {
            let set = euler_roots_compacton();
            count(set.roots, &|re| re > 8.0 + TIE_TOL, 8.0, 1)
        }
        BundleKind::InterfaceSigned => {
            // interface position and the phase of the periodic oscillatory factor
            BundleCount { kind, dimension: 2, counted: Vec::new(), free_parameters: 2, ties: 0 }
        }
    };
    Ok(out)
}

/// Leading interface behaviour for models with a finite-interface branch.
/// For NDE50 the coefficient is z₀/30 (direct substitution), which differs from
/// the 6z₀/5 that circulates in print; the note records both.
pub fn interface_expansion(model: ModelId, z0: f64) -> Result<SeriesExpansion, AsymptoticsError> {
    match model {
        ModelId::Nde14 => Ok(SeriesExpansion {
            center: Center::Finite(z0),
            terms: vec![SeriesTerm { coefficient: -z0 / 4200.0, exponent: 4.0, log_power: 0 }],
            validity: "z -> z0^-, distance s = z0 - z".into(),
        }),
        ModelId::Nde50 => Ok(SeriesExpansion {
            center: Center::Finite(z0),
            terms: vec![SeriesTerm { coefficient: z0 / 30.0, exponent: 4.0, log_power: 1 }],
            validity: "z -> z0^-, distance s = z0 - z; substitution gives z0/30 (printed elsewhere as 6*z0/5)"
                .into(),
        }),
        ModelId::CompactonQuintic => Ok(SeriesExpansion {
            center: Center::Finite(z0),
            terms: vec![SeriesTerm { coefficient: 1.0 / (840.0 * 840.0), exponent: 8.0, log_power: 0 }],
            validity: "F'''' = 2 sqrt(F), y -> y0^-".into(),
        }),
        other => Err(AsymptoticsError::NoInterface(other)),
    }
}

/// Far-field power law C₀|y|^{α/β} of the α-families.
pub fn far_field_expansion(alpha: f64, c0: f64) -> SeriesExpansion {
    let beta = (1.0 + alpha) / 5.0;
    SeriesExpansion {
        center: Center::MinusInfinity,
        terms: vec![SeriesTerm { coefficient: c0, exponent: alpha / beta, log_power: 0 }],
        validity: "y -> -infinity, argument |y|".into(),
    }
}

/// a₀ = (4⁴/5⁵)^{1/4} = 4·5^{−5/4}.
pub fn wkbj_phase_constant() -> f64 {
    (256.0f64 / 3125.0).powf(0.25)
}

/// Envelope C₀|z|^{−5/8} and phase a₀|z|^{5/4} of the oscillatory tail.
pub fn wkbj_envelope(z: f64, c0: f64) -> Result<(f64, f64), AsymptoticsError> {
    if !(z <= -1.0) {
        return Err(AsymptoticsError::EnvelopeRange(z));
    }
    let r = -z;
    Ok((c0 * r.powf(-0.625), wkbj_phase_constant() * r.powf(1.25)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub envelope_exponent: f64,
    pub phase_exponent: f64,
    pub phase_constant: f64,
    pub extrema: usize,
}

/// Least-squares slope and intercept.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Extrema of g − target inside [lo, hi]: abscissae and |g − target| there.
pub fn extrema(profile: &ProfileSolution, lo: f64, hi: f64, target: f64) -> Vec<(f64, f64)> {
    let z = &profile.grid;
    let d = &profile.values[1];
    let mut out = Vec::new();
    for i in 0..z.len().saturating_sub(1) {
        if z[i] < lo || z[i + 1] > hi {
            continue;
        }
        if d[i] == 0.0 || (d[i] < 0.0) != (d[i + 1] < 0.0) {
            let t = if d[i] == d[i + 1] { 0.0 } else { d[i] / (d[i] - d[i + 1]) };
            let zc = z[i] + t * (z[i + 1] - z[i]);
            if let Some(g) = profile.interpolate(zc) {
                out.push((zc, (g - target).abs()));
            }
        }
    }
    out.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9);
    out
}

/// Fits envelope |g − 1| ∝ |z|^e at the extrema and the phase kπ = a|z_k|^p + c.
pub fn wkbj_fit(profile: &ProfileSolution, lo: f64, hi: f64) -> Result<TailFit, AsymptoticsError> {
    let ext: Vec<(f64, f64)> = extrema(profile, lo, hi, 1.0).into_iter().filter(|e| e.1 > 1e-12).collect();
    if ext.len() < 6 {
        return Err(AsymptoticsError::TooFewExtrema(ext.len()));
    }
    let lx: Vec<f64> = ext.iter().map(|e| (-e.0).ln()).collect();
    let ly: Vec<f64> = ext.iter().map(|e| e.1.ln()).collect();
    let (envelope_exponent, _) = linear_fit(&lx, &ly);

    // extrema ordered by |z| increasing; phase advances by π per extremum
    let mut r: Vec<f64> = ext.iter().map(|e| -e.0).collect();
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let theta: Vec<f64> = (0..r.len()).map(|k| k as f64 * std::f64::consts::PI).collect();
    let misfit = |p: f64| -> (f64, f64) {
        let x: Vec<f64> = r.iter().map(|v| v.powf(p)).collect();
        let (a, c) = linear_fit(&x, &theta);
        let sse: f64 = x.iter().zip(&theta).map(|(xi, t)| (a * xi + c - t).powi(2)).sum();
        (sse, a)
    };
    let (mut lo_p, mut hi_p) = (0.5, 2.0);
    let mut best = (f64::INFINITY, 1.0);
    let steps = 300;
    for i in 0..=steps {
        let p = lo_p + (hi_p - lo_p) * i as f64 / steps as f64;
        let (sse, _) = misfit(p);
        if sse < best.0 {
            best = (sse, p);
        }
    }
    let width = (hi_p - lo_p) / steps as f64;
    lo_p = best.1 - width;
    hi_p = best.1 + width;
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi_p - golden * (hi_p - lo_p);
        let b = lo_p + golden * (hi_p - lo_p);
        if misfit(a).0 < misfit(b).0 {
            hi_p = b;
        } else {
            lo_p = a;
        }
    }
    let p = 0.5 * (lo_p + hi_p);
    let (_, a) = misfit(p);
    Ok(TailFit { envelope_exponent, phase_exponent: p, phase_constant: a.abs(), extrema: ext.len() })
}

/// ∫_{−Z}^{−1} |g − 1| for each Z, by trapezoid on the profile nodes plus the interpolant.
pub fn partial_l1_mass(profile: &ProfileSolution, windows: &[f64]) -> Vec<f64> {
    windows
        .iter()
        .map(|&zw| {
            crate::quadrature::adaptive_simpson_panels(
                |z| (profile.interpolate(z).unwrap_or(1.0) - 1.0).abs(),
                -zw,
                -1.0,
                ((zw - 1.0) * 4.0).ceil() as usize,
                1e-9,
            )
        })
        .collect()
}

/// Fundamental kernel with derivative columns, on a grid inside |y| ≤ 20.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub profile: ProfileSolution,
    /// ∫F over the grid plus both tails.
    pub mass: f64,
    /// Largest gap between the extrapolated values and the undamped ray integral.
    pub richardson_spread: f64,
    pub converged: bool,
}

const KERNEL_DAMPING: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Rotated ray k = r·e^{−iπ/10}, on which e^{−ik⁵} = e^{−r⁵}.
fn kernel_ray() -> Complex64 {
    Complex64::from_polar(1.0, -std::f64::consts::PI / 10.0)
}

/// (1/π) Re ∫₀^∞ (ik)^j e^{iky − ik⁵ − εk²} dk along the rotated ray.
fn damped_kernel_derivative(y: f64, j: u32, eps: f64, nodes: &[(f64, f64)]) -> f64 {
    let w = kernel_ray();
    let i = Complex64::new(0.0, 1.0);
    let sum: Complex64 = nodes
        .iter()
        .map(|&(r, wt)| {
            let k = w * r;
            let phase = i * k * y - i * k.powu(5) - eps * k * k;
            (i * k).powu(j) * phase.exp() * wt
        })
        .sum();
    (sum * w).re / std::f64::consts::PI
}

/// ∫_{−∞}^y F = 2/5 + (1/π) Im ∫₀^∞ e^{−ik⁵}(e^{iky} − 1)/k dk; the constant is
/// 1/2 + (1/π) Im ∫₀^∞ (e^{−ik⁵} − e^{−k})/k dk = 1/2 − 1/10.
fn kernel_cumulative(y: f64, nodes: &[(f64, f64)]) -> f64 {
    let w = kernel_ray();
    let i = Complex64::new(0.0, 1.0);
    let sum: Complex64 = nodes
        .iter()
        .map(|&(r, wt)| {
            let k = w * r;
            let f = if r < 1e-12 { i * y } else { (-i * k.powu(5)).exp() * ((i * k * y).exp() - 1.0) / k };
            f * wt
        })
        .sum();
    0.4 + (sum * w).im / std::f64::consts::PI
}

fn ray_nodes(y_max: f64) -> Vec<(f64, f64)> {
    // e^{−r⁵ + |y| r sin(π/10)} is below 1e-18 well before this radius
    let reach = (45.0 + y_max * 0.32 * 3.0f64).powf(0.2) + 1.0;
    let panels = 40;
    let gl = gauss_legendre(20);
    let h = reach / panels as f64;
    let mut nodes = Vec::with_capacity(panels * gl.len());
    for p in 0..panels {
        let a = p as f64 * h;
        for &(x, w) in &gl {
            nodes.push((a + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    nodes
}

fn kernel_value(y: f64, j: u32, nodes: &[(f64, f64)]) -> (f64, f64) {
    let v: Vec<f64> = KERNEL_DAMPING.iter().map(|&e| damped_kernel_derivative(y, j, e, nodes)).collect();
    // error is linear in ε to leading order; two Richardson steps
    let r1 = 2.0 * v[1] - v[0];
    let r2 = 2.0 * v[2] - v[1];
    let second = (4.0 * r2 - r1) / 3.0;
    // on the rotated ray the undamped integral converges too, so it serves as the check
    let direct = damped_kernel_derivative(y, j, 0.0, nodes);
    (second, (second - direct).abs())
}

pub fn linear_kernel(grid: &[f64]) -> Result<KernelReport, AsymptoticsError> {
    if grid.iter().any(|y| y.abs() > 20.0) {
        return Err(AsymptoticsError::KernelRange);
    }
    let y_max = grid.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let nodes = ray_nodes(y_max);
    let mut spread: f64 = 0.0;
    let mut states = Vec::with_capacity(grid.len());
    for &y in grid {
        let mut s = Vec::with_capacity(4);
        for j in 0..4 {
            let (v, sp) = kernel_value(y, j, &nodes);
            spread = spread.max(sp);
            s.push(v);
        }
        states.push(s);
    }
    let mut sorted: Vec<(f64, Vec<f64>)> = grid.iter().copied().zip(states).collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (g, s): (Vec<f64>, Vec<Vec<f64>>) = sorted.into_iter().unzip();
    let profile = ProfileSolution::from_states(ModelSpec::new(ModelId::LinearKernel), g.clone(), &s);

    let inner = crate::quadrature::trapezoid_hermite(&profile.grid, &profile.values[0], &profile.values[1]);
    let lo = kernel_cumulative(g[0], &nodes);
    let hi = 1.0 - kernel_cumulative(*g.last().unwrap(), &nodes);
    let mass = inner + lo + hi;
    let converged = spread < 1e-6 && (mass - 1.0).abs() < 1e-6;
    Ok(KernelReport { profile, mass, richardson_spread: spread, converged })
}

/// Independent kernel: shoot the integrated ODE F⁗ = yF/5 from the decaying side
/// and remove the mode that grows as y → +∞; scaled to match `value_at_zero`.
pub fn kernel_by_ode(grid: &[f64], value_at_zero: f64) -> Vec<f64> {
    let start = -14.0;
    let stop = 14.0;
    let spec = ModelSpec::new(ModelId::LinearKernel);
    // modes decaying toward −∞: λ⁴ = y/5 < 0 with Re λ > 0
    let k = (-start / 5.0f64).powf(0.25);
    let lam = [
        Complex64::from_polar(k, std::f64::consts::FRAC_PI_4),
        Complex64::from_polar(k, -std::f64::consts::FRAC_PI_4),
    ];
    let basis: Vec<Vec<f64>> = vec![
        (0..4).map(|p| lam[0].powu(p).re).collect(),
        (0..4).map(|p| lam[0].powu(p).im).collect(),
    ];
    let _ = lam[1];
    let opts = IntegrationOptions::with_tol(1e-12, 1e-14).blowup_threshold(1e300);
    let runs: Vec<_> = basis
        .iter()
        .map(|y0| integrate(|z, y, dy| spec.rhs_into(z, y, dy), y0, (start, stop), &opts).expect("kernel shoot"))
        .collect();
    // growing mode at the right end: λ = +(y/5)^{1/4}, left eigenvector (λ³, λ², λ, 1)
    let lr = (stop / 5.0f64).powf(0.25);
    let proj = |s: &[f64]| lr.powi(3) * s[0] + lr * lr * s[1] + lr * s[2] + s[3];
    let p0 = proj(runs[0].last_state());
    let p1 = proj(runs[1].last_state());
    let (c0, c1) = (p1, -p0);
    let combined = |y: f64| {
        let a = runs[0].eval(y).unwrap();
        let b = runs[1].eval(y).unwrap();
        c0 * a[0] + c1 * b[0]
    };
    let scale = value_at_zero / combined(0.0);
    grid.iter().map(|&y| scale * combined(y)).collect()
}
