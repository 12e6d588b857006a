//! Characteristic functions of the linearization about `L0`, purely
//! imaginary roots, critical delays and transversality.
//!
//! Two kernel cases are supported: point lags on both populations
//! ("Dirac-Dirac") and a point lag on `x` with a weak exponential kernel on
//! `y` ("Dirac-weak"). `tau1` is the bifurcation parameter in both.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{self, ModelError, ModelParams};
use crate::roots::{self, ComplexFn, Region, ScanOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("g(omega) has a pole at omega = 0")]
    Pole,
    #[error("no crossing: {0}")]
    NoCrossing(String),
    #[error("degenerate crossing at omega = {omega}: Re dlambda/dtau1 = {d_re:e}")]
    Degenerate { omega: f64, d_re: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Characteristic function for point lags `tau1` on `x` and `tau2` on `y`:
/// `lambda^2 + b3 lambda - a2 b2 x0 + a1 b1 x0 e^(-lambda tau1) - lambda b1 x0 e^(-lambda tau2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracDirac {
    pub params: ModelParams,
    pub x0: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl DiracDirac {
    pub fn new(params: &ModelParams, tau1: f64, tau2: f64) -> Result<Self, CharError> {
        check_lag("tau1", tau1)?;
        check_lag("tau2", tau2)?;
        Ok(Self { params: *params, x0: model::interior_x0(params)?, tau1, tau2 })
    }

    pub fn with_tau1(&self, tau1: f64) -> Self {
        Self { tau1, ..*self }
    }

    /// `a1 b1 x0`, the gain of the `tau1` term.
    pub fn delayed_gain(&self) -> f64 {
        self.params.a1 * self.params.b1 * self.x0
    }

    /// Derivative of the characteristic function with respect to `tau1`.
    pub fn d_dtau1(&self, lambda: Complex64) -> Complex64 {
        -lambda * self.delayed_gain() * (-lambda * self.tau1).exp()
    }

    /// Value with the `tau1` term removed; crossings need
    /// `|rest(i omega)| = a1 b1 x0`.
    fn without_tau1_term(&self, lambda: Complex64) -> Complex64 {
        let p = &self.params;
        lambda * lambda + p.b3 * lambda - c(p.a2 * p.b2 * self.x0)
            - lambda * p.b1 * self.x0 * (-lambda * self.tau2).exp()
    }

    /// Both crossing equations (real and imaginary balance) at `i omega`
    /// for the current `tau1`.
    pub fn crossing_residuals(&self, omega: f64) -> [f64; 2] {
        let p = &self.params;
        let x0 = self.x0;
        let (s1, c1) = (omega * self.tau1).sin_cos();
        let (s2, c2) = (omega * self.tau2).sin_cos();
        [
            omega * omega + p.a2 * p.b2 * x0 - p.a1 * p.b1 * x0 * c1 + p.b1 * x0 * omega * s2,
            p.b3 * omega - p.a1 * p.b1 * x0 * s1 - p.b1 * x0 * omega * c2,
        ]
    }

    /// `d lambda / d tau1` at `i omega` from the real/imaginary split
    /// `l1 + i l2` of the lambda-derivative.
    pub fn transversality(&self, omega: f64) -> Complex64 {
        let p = &self.params;
        let x0 = self.x0;
        let g = self.delayed_gain();
        let (s1, c1) = (omega * self.tau1).sin_cos();
        let (s2, c2) = (omega * self.tau2).sin_cos();
        let l1 = p.b3 - g * self.tau1 * c1 - p.b1 * x0 * c2 + p.b1 * x0 * self.tau2 * omega * s2;
        let l2 = 2.0 * omega + g * self.tau1 * s1 + p.b1 * x0 * s2 + p.b1 * x0 * self.tau2 * omega * c2;
        let den = l1 * l1 + l2 * l2;
        Complex64::new(g * omega * (s1 * l1 + c1 * l2) / den, g * omega * (c1 * l1 - s1 * l2) / den)
    }
}

impl ComplexFn for DiracDirac {
    fn value(&self, lambda: Complex64) -> Complex64 {
        self.without_tau1_term(lambda) + self.delayed_gain() * (-lambda * self.tau1).exp()
    }

    fn derivative(&self, lambda: Complex64) -> Complex64 {
        let p = &self.params;
        let x0 = self.x0;
        2.0 * lambda + p.b3 - self.delayed_gain() * self.tau1 * (-lambda * self.tau1).exp()
            - p.b1 * x0 * (1.0 - lambda * self.tau2) * (-lambda * self.tau2).exp()
    }
}

/// Coefficients of `lambda^3 + p2 lambda^2 + p1 lambda + p0 + (r1 lambda + r0) e^(-lambda tau1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakCoeffs {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub r0: f64,
    pub r1: f64,
}

impl WeakCoeffs {
    pub fn new(p: &ModelParams, x0: f64, q2: f64) -> Self {
        Self {
            p2: q2 + p.b3,
            p1: q2 * p.b3 - p.a2 * p.b2 * x0 - p.b1 * x0 * q2,
            p0: -q2 * p.a2 * p.b2 * x0,
            r1: p.a1 * p.b1 * x0,
            r0: p.a1 * p.b1 * x0 * q2,
        }
    }

    fn poly(&self, l: Complex64) -> Complex64 {
        ((l + self.p2) * l + self.p1) * l + self.p0
    }

    fn dpoly(&self, l: Complex64) -> Complex64 {
        (3.0 * l + 2.0 * self.p2) * l + self.p1
    }

    fn delayed(&self, l: Complex64) -> Complex64 {
        self.r1 * l + self.r0
    }

    /// Coefficients `[c2, c1, c0]` of the cubic in `omega^2` whose positive
    /// roots are the squared crossing frequencies:
    /// `|P(i omega)|^2 - |Q(i omega)|^2 = 0`.
    pub fn sextic(&self) -> [f64; 3] {
        let Self { p0, p1, p2, r0, r1 } = *self;
        [p2 * p2 - 2.0 * p1, p1 * p1 - 2.0 * p0 * p2 - r1 * r1, p0 * p0 - r0 * r0]
    }
}

/// Characteristic function for a point lag `tau1` on `x` and the weak
/// kernel `q2 e^(-q2 s)` on `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracWeak {
    pub params: ModelParams,
    pub x0: f64,
    pub tau1: f64,
    pub q2: f64,
    pub coeffs: WeakCoeffs,
}

impl DiracWeak {
    pub fn new(params: &ModelParams, tau1: f64, q2: f64) -> Result<Self, CharError> {
        check_lag("tau1", tau1)?;
        if !(q2.is_finite() && q2 > 0.0) {
            return Err(CharError::InvalidArgument(format!("q2 must be positive, got {q2}")));
        }
        let x0 = model::interior_x0(params)?;
        Ok(Self { params: *params, x0, tau1, q2, coeffs: WeakCoeffs::new(params, x0, q2) })
    }

    pub fn with_tau1(&self, tau1: f64) -> Self {
        Self { tau1, ..*self }
    }

    pub fn d_dtau1(&self, lambda: Complex64) -> Complex64 {
        -lambda * self.coeffs.delayed(lambda) * (-lambda * self.tau1).exp()
    }

    /// Real and imaginary balance at `i omega` for the current `tau1`.
    pub fn crossing_residuals(&self, omega: f64) -> [f64; 2] {
        let WeakCoeffs { p0, p1, p2, r0, r1 } = self.coeffs;
        let (s, co) = (omega * self.tau1).sin_cos();
        [
            p0 - p2 * omega * omega + r0 * co + r1 * omega * s,
            -omega.powi(3) + p1 * omega + r1 * omega * co - r0 * s,
        ]
    }

    /// `d lambda / d tau1` at `i omega` from the split `m1 + i m2` of the
    /// lambda-derivative, with the numerator reduced through the crossing
    /// equations.
    pub fn transversality(&self, omega: f64) -> Complex64 {
        let WeakCoeffs { p0, p1, p2, r0, r1 } = self.coeffs;
        let tau = self.tau1;
        let w = omega;
        let (s, co) = (w * tau).sin_cos();
        let m1 = p1 - 3.0 * w * w + (r1 - tau * r0) * co - tau * r1 * w * s;
        let m2 = 2.0 * p2 * w - (r1 - tau * r0) * s - tau * r1 * w * co;
        let n_re = w * (p1 * w - w.powi(3));
        let n_im = w * (p2 * w * w - p0);
        let den = m1 * m1 + m2 * m2;
        Complex64::new((n_re * m1 + n_im * m2) / den, (n_im * m1 - n_re * m2) / den)
    }
}

impl ComplexFn for DiracWeak {
    fn value(&self, lambda: Complex64) -> Complex64 {
        self.coeffs.poly(lambda) + self.coeffs.delayed(lambda) * (-lambda * self.tau1).exp()
    }

    fn derivative(&self, lambda: Complex64) -> Complex64 {
        let k = &self.coeffs;
        let e = (-lambda * self.tau1).exp();
        k.dpoly(lambda) + (k.r1 - self.tau1 * k.delayed(lambda)) * e
    }
}

fn check_lag(name: &str, tau: f64) -> Result<(), CharError> {
    if tau.is_finite() && tau >= 0.0 {
        Ok(())
    } else {
        Err(CharError::InvalidArgument(format!("{name} must be finite and >= 0, got {tau}")))
    }
}

/// Sum of lags below which `L0` is asymptotically stable in the
/// Dirac-Dirac case: `(b3 + b1 x0) / (a1 b1 x0)`.
pub fn stability_bound_dd(p: &ModelParams) -> Result<f64, CharError> {
    Ok(stability_bound_at(p, model::interior_x0(p)?))
}

/// The same bound for an explicitly supplied `x0`.
pub fn stability_bound_at(p: &ModelParams, x0: f64) -> f64 {
    (p.b3 + p.b1 * x0) / (p.a1 * p.b1 * x0)
}

/// Printed quartic `x^4 - (b1^2 x0^2 - b3^2 - 2 a2 b2 x0) x^2 + (a2^2 b2^2 - a1^2 b1^2) x0^2`
/// as `[c1, c0]` of the quadratic in `x^2`.
fn quartic_coeffs(p: &ModelParams, x0: f64) -> [f64; 2] {
    [
        -(p.b1 * p.b1 * x0 * x0 - p.b3 * p.b3 - 2.0 * p.a2 * p.b2 * x0),
        (p.a2 * p.a2 * p.b2 * p.b2 - p.a1 * p.a1 * p.b1 * p.b1) * x0 * x0,
    ]
}

/// Evaluates the printed quartic at `omega`.
pub fn quartic(p: &ModelParams, x0: f64, omega: f64) -> f64 {
    let [c1, c0] = quartic_coeffs(p, x0);
    let w2 = omega * omega;
    (w2 + c1) * w2 + c0
}

/// `g(omega) = quartic(omega) / (2 a1 b1^2 x0^2 omega)`.
pub fn g_of_omega(p: &ModelParams, x0: f64, omega: f64) -> Result<f64, CharError> {
    if omega == 0.0 {
        return Err(CharError::Pole);
    }
    Ok(quartic(p, x0, omega) / (2.0 * p.a1 * p.b1 * p.b1 * x0 * x0 * omega))
}

/// Positive roots of the printed quartic, ascending.
///
/// This quartic drops the `tau2`-dependent terms of the modulus condition
/// and is kept for comparison with the reference values. Certified crossings
/// come from [`crossing_frequencies_dd`].
pub fn omega_candidates_dd(p: &ModelParams, x0: f64) -> Vec<f64> {
    let [c1, c0] = quartic_coeffs(p, x0);
    roots::real_quadratic_roots(1.0, c1, c0)
        .into_iter()
        .filter(|&x2| x2 > 0.0)
        .map(f64::sqrt)
        .collect()
}

/// Critical delay from the reference recipe `k pi / omega + tau2`.
pub fn printed_tau10(omega: f64, tau2: f64, k: u32) -> f64 {
    k as f64 * PI / omega + tau2
}

/// Modulus condition for a Dirac-Dirac crossing at `i omega`:
/// `|rest(i omega)|^2 - (a1 b1 x0)^2`, independent of `tau1`.
pub fn modulus_condition_dd(case: &DiracDirac, omega: f64) -> f64 {
    case.without_tau1_term(I * omega).norm_sqr() - case.delayed_gain().powi(2)
}

/// Frequency interval outside of which no Dirac-Dirac crossing exists.
pub fn crossing_frequency_bound_dd(case: &DiracDirac) -> f64 {
    let p = &case.params;
    let x0 = case.x0;
    // |rest(i w)| >= w^2 - (b3 + b1 x0) w - a2 b2 x0
    let b = p.b3 + p.b1 * x0;
    let k = p.a2 * p.b2 * x0 + case.delayed_gain();
    0.5 * (b + (b * b + 4.0 * k).sqrt())
}

/// Tolerances and limits for crossing searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingOptions {
    /// Certification threshold for `|Delta(i omega)|` and both balance equations.
    pub residual_tol: f64,
    /// Crossings with `|Re dlambda/dtau1|` below this are degenerate.
    pub degenerate_tol: f64,
    /// Largest branch index searched.
    pub k_max: u32,
    /// Grid resolution of the frequency scan.
    pub scan_steps: usize,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-9, degenerate_tol: 1e-12, k_max: 64, scan_steps: 20_000 }
    }
}

/// Positive frequencies where the Dirac-Dirac characteristic function can
/// have a root `i omega` for some `tau1`, ascending. Found by a sign-change
/// scan of the modulus condition refined by bisection.
pub fn crossing_frequencies_dd(case: &DiracDirac, opts: &CrossingOptions) -> Vec<f64> {
    let hi = 1.05 * crossing_frequency_bound_dd(case) + 1e-6;
    let lo = hi * 1e-9;
    roots::sign_change_roots(|w| modulus_condition_dd(case, w), lo, hi, opts.scan_steps, 1e-15)
        .into_iter()
        .filter(|&w| w > 0.0)
        .map(|w| polish_real(|x| modulus_condition_dd(case, x), w))
        .collect()
}

/// Secant polish of a bracketed real root; falls back to the input.
fn polish_real<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let mut a = x * (1.0 - 1e-9);
    let mut b = x;
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..20 {
        if fb == 0.0 || fb == fa {
            break;
        }
        let next = b - fb * (b - a) / (fb - fa);
        if !next.is_finite() || (next - x).abs() > 1e-6 * (1.0 + x.abs()) {
            return x;
        }
        a = b;
        fa = fb;
        b = next;
        fb = f(b);
        if (b - a).abs() <= 1e-16 * b.abs() {
            break;
        }
    }
    if f(b).abs() <= f(x).abs() {
        b
    } else {
        x
    }
}

/// Which kernel configuration a crossing belongs to, with the fixed
/// secondary parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum HopfCase {
    DiracDirac { tau2: f64 },
    DiracWeak { q2: f64 },
}

impl fmt::Display for HopfCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HopfCase::DiracDirac { tau2 } => write!(f, "dirac-dirac (tau2 = {tau2})"),
            HopfCase::DiracWeak { q2 } => write!(f, "dirac-weak (q2 = {q2})"),
        }
    }
}

/// A certified purely imaginary root crossing as `tau1` varies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub case: HopfCase,
    pub omega: f64,
    pub tau_crit: f64,
    /// 1-based rank of this crossing among all crossings ordered by `tau1`.
    pub branch: u32,
    pub d_re: f64,
    pub d_im: f64,
    /// `|Delta(i omega, tau_crit)|`.
    pub residual: f64,
    /// The two real balance equations at the crossing.
    pub balance: [f64; 2],
}

impl HopfPoint {
    pub fn lambda(&self) -> Complex64 {
        I * self.omega
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn transversality(&self) -> Complex64 {
        Complex64::new(self.d_re, self.d_im)
    }

    /// Characteristic function of this point's case at `tau1 = tau_crit`.
    pub fn char_fn(&self, params: &ModelParams) -> Result<Box<dyn ComplexFn>, CharError> {
        Ok(match self.case {
            HopfCase::DiracDirac { tau2 } => Box::new(DiracDirac::new(params, self.tau_crit, tau2)?),
            HopfCase::DiracWeak { q2 } => Box::new(DiracWeak::new(params, self.tau_crit, q2)?),
        })
    }
}

/// Smallest `tau >= 0` with `e^(-i omega tau) = target / |target|`.
fn base_delay(target: Complex64, omega: f64) -> f64 {
    let phase = -target.arg();
    phase.rem_euclid(2.0 * PI) / omega
}

/// All Dirac-Dirac crossings with `tau2 < tau1 <= ` the `k_max`-th lift,
/// ordered by critical delay. Each candidate is certified against
/// `|Delta(i omega)|` and both balance equations.
pub fn hopf_points_dd(p: &ModelParams, tau2: f64, opts: &CrossingOptions) -> Result<Vec<HopfPoint>, CharError> {
    let base = DiracDirac::new(p, 0.0, tau2)?;
    let freqs = crossing_frequencies_dd(&base, opts);
    if freqs.is_empty() {
        return Err(CharError::NoCrossing("modulus condition has no positive root".into()));
    }
    let mut candidates = Vec::new();
    for &w in &freqs {
        let target = -base.without_tau1_term(I * w) / base.delayed_gain();
        let tau0 = base_delay(target, w);
        for k in 0..opts.k_max {
            let tau1 = tau0 + k as f64 * 2.0 * PI / w;
            if tau1 <= tau2 {
                continue;
            }
            let case = base.with_tau1(tau1);
            let residual = case.value(I * w).norm();
            let balance = case.crossing_residuals(w);
            if residual >= opts.residual_tol || balance.iter().any(|r| r.abs() >= opts.residual_tol) {
                log::debug!("candidate omega={w} tau1={tau1} rejected: residual {residual:e}");
                continue;
            }
            let d = case.transversality(w);
            candidates.push(HopfPoint {
                case: HopfCase::DiracDirac { tau2 },
                omega: w,
                tau_crit: tau1,
                branch: 0,
                d_re: d.re,
                d_im: d.im,
                residual,
                balance,
            });
        }
    }
    finish_candidates(candidates)
}

fn finish_candidates(mut candidates: Vec<HopfPoint>) -> Result<Vec<HopfPoint>, CharError> {
    if candidates.is_empty() {
        return Err(CharError::NoCrossing("no candidate passed certification".into()));
    }
    candidates.sort_by(|a, b| a.tau_crit.total_cmp(&b.tau_crit));
    for (i, hp) in candidates.iter_mut().enumerate() {
        hp.branch = i as u32 + 1;
    }
    Ok(candidates)
}

/// The `k`-th Dirac-Dirac crossing (1-based, ordered by `tau1`).
pub fn hopf_point_dd(p: &ModelParams, tau2: f64, k: u32, opts: &CrossingOptions) -> Result<HopfPoint, CharError> {
    if k == 0 {
        return Err(CharError::InvalidArgument("branch index starts at 1".into()));
    }
    let all = hopf_points_dd(p, tau2, opts)?;
    let hp = *all
        .get(k as usize - 1)
        .ok_or_else(|| CharError::NoCrossing(format!("only {} crossings within k_max", all.len())))?;
    check_nondegenerate(hp, opts)
}

fn check_nondegenerate(hp: HopfPoint, opts: &CrossingOptions) -> Result<HopfPoint, CharError> {
    if hp.d_re.abs() < opts.degenerate_tol {
        Err(CharError::Degenerate { omega: hp.omega, d_re: hp.d_re })
    } else {
        Ok(hp)
    }
}

/// Positive crossing frequencies of the Dirac-weak case, ascending.
pub fn crossing_frequencies_dw(coeffs: &WeakCoeffs) -> Vec<f64> {
    let [c2, c1, c0] = coeffs.sextic();
    roots::real_cubic_roots(c2, c1, c0)
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(f64::sqrt)
        .collect()
}

/// `tan(omega tau11)` from the crossing equations, as `(numerator, denominator)`.
pub fn tau11_tangent(coeffs: &WeakCoeffs, omega: f64) -> (f64, f64) {
    let WeakCoeffs { p0, p1, p2, r0, r1 } = *coeffs;
    let a = p2 * omega * omega - p0;
    let b = omega.powi(3) - p1 * omega;
    (r1 * omega * a - r0 * b, r0 * a + r1 * omega * b)
}

/// Smallest positive critical delay for the crossing frequency `omega`:
/// the principal arctangent lifted by multiples of `pi / omega` until both
/// balance equations hold.
pub fn tau11_for(case: &DiracWeak, omega: f64, opts: &CrossingOptions) -> Option<f64> {
    let (num, den) = tau11_tangent(&case.coeffs, omega);
    let principal = (num / den).atan() / omega;
    let step = PI / omega;
    let mut m = if principal > 0.0 { 0 } else { 1 };
    while m <= 2 * opts.k_max as i64 {
        let tau = principal + m as f64 * step;
        let trial = case.with_tau1(tau);
        let bal = trial.crossing_residuals(omega);
        if tau > 0.0 && bal.iter().all(|r| r.abs() < opts.residual_tol) {
            return Some(tau);
        }
        m += 1;
    }
    None
}

/// Dirac-weak crossings for fixed `q2`, one per crossing frequency, ordered
/// by critical delay.
pub fn hopf_points_dw(p: &ModelParams, q2: f64, opts: &CrossingOptions) -> Result<Vec<HopfPoint>, CharError> {
    let base = DiracWeak::new(p, 0.0, q2)?;
    let freqs = crossing_frequencies_dw(&base.coeffs);
    if freqs.is_empty() {
        return Err(CharError::NoCrossing("crossing sextic has no positive root".into()));
    }
    let mut candidates = Vec::new();
    for w in freqs {
        let Some(tau) = tau11_for(&base, w, opts) else {
            log::warn!("omega = {w}: no lift of the arctangent satisfies both balance equations");
            continue;
        };
        let case = base.with_tau1(tau);
        let residual = case.value(I * w).norm();
        if residual >= opts.residual_tol {
            continue;
        }
        let d = case.transversality(w);
        candidates.push(HopfPoint {
            case: HopfCase::DiracWeak { q2 },
            omega: w,
            tau_crit: tau,
            branch: 0,
            d_re: d.re,
            d_im: d.im,
            residual,
            balance: case.crossing_residuals(w),
        });
    }
    finish_candidates(candidates)
}

/// First (smallest-delay) Dirac-weak crossing.
pub fn hopf_point_dw(p: &ModelParams, q2: f64, opts: &CrossingOptions) -> Result<HopfPoint, CharError> {
    let all = hopf_points_dw(p, q2, opts)?;
    if all.len() > 1 {
        log::info!("{} crossing frequencies for q2 = {q2}; using the smallest delay", all.len());
    }
    check_nondegenerate(all[0], opts)
}

/// Why the weak-kernel stability window is not reported as two bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum WindowUnavailable {
    /// `4 (a1 b1 - a2 b2)^2 < a2 b3 (b1 b4 - a2 b3)` fails.
    InequalityFails { lhs: f64, rhs: f64 },
    /// The bounding quadratic has no real roots.
    ComplexRoots,
    /// Both roots are nonpositive, so the union of intervals covers every
    /// `q2 > 0`.
    NonpositiveRoots { q21: f64, q22: f64 },
}

impl fmt::Display for WindowUnavailable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowUnavailable::InequalityFails { lhs, rhs } => {
                write!(f, "4(a1b1-a2b2)^2 = {lhs} is not below a2b3(b1b4-a2b3) = {rhs}")
            }
            WindowUnavailable::ComplexRoots => f.write_str("bounding quadratic has complex roots (every q2 > 0 qualifies)"),
            WindowUnavailable::NonpositiveRoots { q21, q22 } => {
                write!(f, "bounding quadratic roots {q21} and {q22} are nonpositive (every q2 > 0 qualifies)")
            }
        }
    }
}

/// Bounds `(q21, q22)` such that `L0` is stable at `tau1 = 0` for
/// `q2 in (0, q21) u (q22, inf)`.
pub fn q2_stability_window(p: &ModelParams) -> Result<Result<(f64, f64), WindowUnavailable>, CharError> {
    let x0 = model::interior_x0(p)?;
    let lhs = 4.0 * (p.a1 * p.b1 - p.a2 * p.b2).powi(2);
    let rhs = p.a2 * p.b3 * (p.b1 * p.b4 - p.a2 * p.b3);
    if lhs >= rhs {
        return Ok(Err(WindowUnavailable::InequalityFails { lhs, rhs }));
    }
    Ok(match window_quadratic_roots(p, x0) {
        None => Err(WindowUnavailable::ComplexRoots),
        Some((q21, q22)) if q22 <= 0.0 => Err(WindowUnavailable::NonpositiveRoots { q21, q22 }),
        Some(bounds) => Ok(bounds),
    })
}

/// Roots of `(b3 - b1 x0) q^2 + b3 (b3 - b1 x0) q + b3 (a1 b1 - a2 b2) x0`.
pub fn window_quadratic_roots(p: &ModelParams, x0: f64) -> Option<(f64, f64)> {
    let lead = p.b3 - p.b1 * x0;
    let r = roots::real_quadratic_roots(lead, p.b3 * lead, p.b3 * (p.a1 * p.b1 - p.a2 * p.b2) * x0);
    match r.as_slice() {
        [a, b] => Some((*a, *b)),
        [a] => Some((*a, *a)),
        _ => None,
    }
}

/// Roots of a characteristic function in `region`, via [`roots::root_scan`].
pub fn root_scan<F: ComplexFn + ?Sized>(f: &F, region: Region, opts: &ScanOptions) -> Vec<Complex64> {
    roots::root_scan(f, region, opts)
}

/// Largest real part among roots found in `region`, if any.
pub fn spectral_abscissa<F: ComplexFn + ?Sized>(f: &F, region: Region, opts: &ScanOptions) -> Option<f64> {
    root_scan(f, region, opts).first().map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_x0() -> f64 {
        model::interior_x0(&ModelParams::reference()).unwrap()
    }

    #[test]
    fn delta_dd_at_zero_is_delay_independent() {
        let p = ModelParams::reference();
        for (t1, t2) in [(0.0, 0.0), (3.0, 0.01), (10.0, 7.0)] {
            let cf = DiracDirac::new(&p, t1, t2).unwrap();
            let v = cf.value(Complex64::new(0.0, 0.0));
            assert_relative_eq!(v.re, p.a1 * p.b3 - p.a2 * p.b4, epsilon = 1e-14);
            assert_relative_eq!(v.re, 0.375, epsilon = 1e-14);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn delta_dw_at_zero() {
        let p = ModelParams::reference();
        let cf = DiracWeak::new(&p, 4.0, 0.1).unwrap();
        let v = cf.value(Complex64::new(0.0, 0.0)).re;
        assert_relative_eq!(v, 0.1 * cf.x0 * (p.a1 * p.b1 - p.a2 * p.b2), epsilon = 1e-15);
        assert!(v > 0.0);
    }

    #[test]
    fn weak_coefficients_match_closed_forms() {
        let p = ModelParams::reference();
        let x0 = reference_x0();
        let k = WeakCoeffs::new(&p, x0, 0.1);
        assert_relative_eq!(k.p2, 1.05, epsilon = 1e-15);
        assert_relative_eq!(k.p1, 0.1 * 0.95 - 0.4 * x0 - x0 * 0.1, epsilon = 1e-15);
        assert_relative_eq!(k.p0, -0.1 * 0.4 * x0, epsilon = 1e-15);
        assert_relative_eq!(k.r1, 2.5 * x0, epsilon = 1e-15);
        assert_relative_eq!(k.r0, 0.25 * x0, epsilon = 1e-15);
        assert!(k.p0 * k.p0 < k.r0 * k.r0);
    }

    #[test]
    fn stability_bound_reference() {
        let p = ModelParams::reference();
        let x0 = reference_x0();
        let b = stability_bound_dd(&p).unwrap();
        assert_relative_eq!(b, (0.95 + x0) / (2.5 * x0), epsilon = 1e-14);
        assert!((b - 2.528).abs() < 1e-3);
        // monotone in b3 once x0 is held fixed (x0 itself depends on b3)
        let mut prev = 0.0;
        for b3 in [0.5, 0.95, 1.5, 3.0] {
            let bound = stability_bound_at(&ModelParams { b3, ..p }, x0);
            assert!(bound > prev);
            prev = bound;
        }
    }

    #[test]
    fn quartic_root_and_g() {
        let p = ModelParams::reference();
        let x0 = reference_x0();
        let roots = omega_candidates_dd(&p, x0);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.40598).abs() < 1e-5, "{roots:?}");
        assert!(g_of_omega(&p, x0, roots[0]).unwrap().abs() < 1e-9);
        assert!(g_of_omega(&p, x0, 1e-6).unwrap() < -1e3);
        assert!(matches!(g_of_omega(&p, x0, 0.0), Err(CharError::Pole)));
        let mut prev = f64::NEG_INFINITY;
        for i in 0..1000 {
            let w = 0.01 + i as f64 * (10.0 - 0.01) / 999.0;
            let g = g_of_omega(&p, x0, w).unwrap();
            assert!(g > prev);
            prev = g;
        }
    }

    #[test]
    fn printed_recipe_does_not_certify() {
        // kept for the discrepancy report: the quartic root with k pi / omega
        // never lands on a root of the full characteristic function
        let p = ModelParams::reference();
        let w = omega_candidates_dd(&p, reference_x0())[0];
        for k in 1..4 {
            let cf = DiracDirac::new(&p, printed_tau10(w, 0.01, k), 0.01).unwrap();
            assert!(cf.value(I * w).norm() > 1e-2);
        }
    }

    #[test]
    fn reference_dd_crossing() {
        let hp = hopf_point_dd(&ModelParams::reference(), 0.01, 1, &CrossingOptions::default()).unwrap();
        assert!(hp.residual < 1e-9);
        assert!(hp.tau_crit > 0.01);
        assert!((hp.omega - 0.453428).abs() < 1e-5, "{hp:?}");
        assert!((hp.tau_crit - 1.985584).abs() < 1e-5, "{hp:?}");
        assert!(hp.d_re > 0.0);
        assert_eq!(hp.branch, 1);
    }

    #[test]
    fn reference_dw_crossing() {
        let hp = hopf_point_dw(&ModelParams::reference(), 0.1, &CrossingOptions::default()).unwrap();
        assert!(hp.residual < 1e-9);
        assert!((hp.omega - 0.396817).abs() < 1e-5, "{hp:?}");
        assert!((hp.tau_crit - 2.489909).abs() < 1e-5, "{hp:?}");
        assert!(hp.d_re > 0.0);
    }

    #[test]
    fn window_for_reference_is_unavailable() {
        match q2_stability_window(&ModelParams::reference()).unwrap() {
            Err(WindowUnavailable::InequalityFails { lhs, rhs }) => {
                assert_relative_eq!(lhs, 17.64, epsilon = 1e-12);
                assert_relative_eq!(rhs, 0.9975, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn branch_zero_is_rejected() {
        let r = hopf_point_dd(&ModelParams::reference(), 0.01, 0, &CrossingOptions::default());
        assert!(matches!(r, Err(CharError::InvalidArgument(_))));
    }
}
