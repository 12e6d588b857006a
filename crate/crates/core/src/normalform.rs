//! Center-manifold normal form at a Hopf crossing.
//!
//! At a crossing `lambda1 = i omega` the flow on the center manifold reads
//! `z' = lambda1 z + g20 z^2/2 + g11 z zbar + g02 zbar^2/2 + g21 z^2 zbar/2 + ...`.
//! The coefficients follow from the eigenvector `h` of the generator, the
//! eigenvector `h*` of its adjoint normalized by the bilinear pairing, and
//! the quadratic nonlinearity of the translated system. From them come the
//! first Lyapunov-type coefficient `C1(0)` and the direction, stability and
//! period quantities `mu2`, `beta2`, `T2`.
//!
//! Every function used here is an exponential polynomial in `theta`, so all
//! profiles are stored as `(vector, rate)` pieces and evaluated lazily.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chareq::{self, CharError, CrossingOptions, HopfCase, HopfPoint, WeakCoeffs};
use crate::model::{self, Equilibrium, ModelParams};

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalFormError {
    #[error(transparent)]
    Char(#[from] CharError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error("hopf point belongs to {found}, expected the {expected} case")]
    WrongCase { expected: &'static str, found: HopfCase },
    #[error("singular eigenvector: {0}")]
    SingularEigenvector(String),
    #[error("singular E-vector system ({0}); resonance at 2 lambda1 or 0")]
    SingularE(String),
    #[error("zero denominator in dlambda/dtau1")]
    ZeroDenominator,
    #[error("Re lambda'(0) vanishes; the crossing is not transversal")]
    DegenerateTransversality,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `phi(theta) = coeff * e^(rate theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpProfile {
    pub coeff: CVec,
    pub rate: Complex64,
}

impl ExpProfile {
    pub fn new(coeff: CVec, rate: Complex64) -> Self {
        Self { coeff, rate }
    }

    pub fn constant(coeff: CVec) -> Self {
        Self { coeff, rate: ZERO }
    }

    pub fn eval(&self, theta: f64) -> CVec {
        &self.coeff * (self.rate * theta).exp()
    }

    pub fn component(&self, i: usize, theta: f64) -> Complex64 {
        self.coeff[i] * (self.rate * theta).exp()
    }

    pub fn conj(&self) -> Self {
        Self { coeff: self.coeff.map(|z| z.conj()), rate: self.rate.conj() }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self { coeff: &self.coeff * s, rate: self.rate }
    }
}

/// Sum of exponential pieces; used for `w20` and `w11`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpSum {
    pub pieces: Vec<ExpProfile>,
}

impl ExpSum {
    pub fn component(&self, i: usize, theta: f64) -> Complex64 {
        self.pieces.iter().map(|p| p.component(i, theta)).sum()
    }

    pub fn eval(&self, theta: f64) -> Option<CVec> {
        let mut it = self.pieces.iter();
        let first = it.next()?.eval(theta);
        Some(it.fold(first, |acc, p| acc + p.eval(theta)))
    }
}

/// Linear retarded functional `L(phi) = A phi(0) + sum_j B_j phi(-tau_j)`,
/// i.e. a matrix measure with point masses at `0` and `-tau_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayMeasure {
    pub at_zero: CMat,
    pub lagged: Vec<(f64, CMat)>,
}

impl DelayMeasure {
    pub fn dim(&self) -> usize {
        self.at_zero.nrows()
    }

    pub fn max_lag(&self) -> f64 {
        self.lagged.iter().map(|(t, _)| *t).fold(0.0, f64::max)
    }

    /// `lambda I - A - sum_j B_j e^(-lambda tau_j)`.
    pub fn char_matrix(&self, lambda: Complex64) -> CMat {
        let n = self.dim();
        let mut m = CMat::identity(n, n) * lambda - &self.at_zero;
        for (tau, b) in &self.lagged {
            m -= b * (-lambda * *tau).exp();
        }
        m
    }

    /// Derivative of [`char_matrix`](Self::char_matrix) in `lambda`.
    pub fn char_matrix_derivative(&self, lambda: Complex64) -> CMat {
        let n = self.dim();
        let mut m = CMat::identity(n, n);
        for (tau, b) in &self.lagged {
            m += b * (*tau * (-lambda * *tau).exp());
        }
        m
    }

    /// `L` applied to an exponential profile.
    pub fn apply(&self, phi: &ExpProfile) -> CVec {
        let mut out = &self.at_zero * phi.eval(0.0);
        for (tau, b) in &self.lagged {
            out += b * phi.eval(-*tau);
        }
        out
    }
}

fn to_cmat<const N: usize>(m: &[[f64; N]; N]) -> CMat {
    CMat::from_fn(N, N, |i, j| c(m[i][j]))
}

/// `int_{-tau}^0 e^(a xi) d xi`.
fn exp_integral(a: Complex64, tau: f64) -> Complex64 {
    if a.norm() * tau < 1e-8 {
        // series keeps small rates accurate
        c(tau) - a * (tau * tau / 2.0) + a * a * (tau.powi(3) / 6.0)
    } else {
        (ONE - (-a * tau).exp()) / a
    }
}

/// Bilinear pairing between an adjoint profile `psi` on `[0, tau]` and a
/// state profile `phi` on `[-tau, 0]`:
/// `psibar(0)^T phi(0) + sum_j int_{-tau_j}^0 psibar(xi + tau_j)^T B_j phi(xi) d xi`.
/// Conjugate-linear in `psi`, linear in `phi`.
pub fn bilinear(psi: &ExpProfile, phi: &ExpProfile, measure: &DelayMeasure) -> Complex64 {
    let psi_bar = psi.coeff.map(|z| z.conj());
    let rate_bar = psi.rate.conj();
    let mut out = psi_bar.dot(&phi.coeff);
    for (tau, b) in &measure.lagged {
        let inner = psi_bar.dot(&(b * &phi.coeff));
        out += inner * (rate_bar * *tau).exp() * exp_integral(phi.rate + rate_bar, *tau);
    }
    out
}

/// Eigenvector of the generator at `lambda1` and the matching adjoint
/// eigenvector, normalized so that `<h*, h> = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigPair {
    pub h: ExpProfile,
    pub h_star: ExpProfile,
    pub lambda1: Complex64,
    /// The closed-form normalizer used as the starting point.
    pub eta_seed: Complex64,
    /// `<h*, h>` before the numerical correction was applied.
    pub seed_pairing: Complex64,
}

impl EigPair {
    /// Multiplies both vectors by `e^(i phi)`; the pairing is unchanged.
    pub fn rephased(&self, phi: f64) -> Self {
        let s = Complex64::from_polar(1.0, phi);
        Self { h: self.h.scaled(s), h_star: self.h_star.scaled(s), ..self.clone() }
    }

    pub fn v(&self) -> &CVec {
        &self.h.coeff
    }

    pub fn w(&self) -> &CVec {
        &self.h_star.coeff
    }
}

/// Rescales `h*` so that `<h*, h> = 1`.
fn normalize(h: ExpProfile, w_seed: CVec, lambda1: Complex64, eta_seed: Complex64, measure: &DelayMeasure) -> EigPair {
    let h_star = ExpProfile::new(w_seed, lambda1);
    let s = bilinear(&h_star, &h, measure);
    let h_star = h_star.scaled(ONE / s.conj());
    EigPair { h, h_star, lambda1, eta_seed, seed_pairing: s }
}

fn expect_dd(hp: &HopfPoint) -> Result<f64, NormalFormError> {
    match hp.case {
        HopfCase::DiracDirac { tau2 } => Ok(tau2),
        found => Err(NormalFormError::WrongCase { expected: "dirac-dirac", found }),
    }
}

fn expect_dw(hp: &HopfPoint) -> Result<f64, NormalFormError> {
    match hp.case {
        HopfCase::DiracWeak { q2 } => Ok(q2),
        found => Err(NormalFormError::WrongCase { expected: "dirac-weak", found }),
    }
}

fn interior(p: &ModelParams) -> Result<Equilibrium, NormalFormError> {
    Ok(model::equilibria(p)?.0)
}

/// Linear functional of the translated Dirac-Dirac system at `tau1`.
pub fn measure_dd(p: &ModelParams, tau1: f64, tau2: f64) -> Result<DelayMeasure, NormalFormError> {
    let l0 = interior(p)?;
    let (a, b1, b2) = model::linear_part(p, &l0);
    Ok(DelayMeasure { at_zero: to_cmat(&a), lagged: vec![(tau1, to_cmat(&b1)), (tau2, to_cmat(&b2))] })
}

/// Linear functional of the (corrected) chain system at `tau1`.
pub fn measure_dw(p: &ModelParams, tau1: f64, q2: f64) -> Result<DelayMeasure, NormalFormError> {
    let l0 = interior(p)?;
    let (a1, c1) = model::chain_linear_part(p, &l0, q2, model::ChainForm::Corrected);
    Ok(DelayMeasure { at_zero: to_cmat(&a1), lagged: vec![(tau1, to_cmat(&c1))] })
}

/// Eigenvectors for the Dirac-Dirac case.
///
/// `h = (1, v2) e^(lambda1 theta)` with `v2` from the second row of the
/// characteristic matrix, and `h* = (f1, 1) e^(lambda1 s) / eta`.
pub fn eig_pair_dd(p: &ModelParams, hp: &HopfPoint) -> Result<EigPair, NormalFormError> {
    let tau2 = expect_dd(hp)?;
    let l0 = interior(p)?;
    let (x0, y0) = (l0.x, l0.y);
    let tau1 = hp.tau_crit;
    let l1 = hp.lambda();
    let l2 = l1.conj();

    let den = p.a2 * (p.b3 + l1 - p.b1 * x0 * (l2 * tau2).exp());
    if den.norm() < SINGULAR_TOL {
        return Err(NormalFormError::SingularEigenvector("b3 + lambda1 - b1 x0 e^(lambda2 tau2) = 0".into()));
    }
    let v1 = ONE;
    let v2 = (p.a1 * p.b1 * (l2 * tau1).exp() - p.a2 * p.b2) / den;

    let f1 = (p.a2 * p.b2 - p.a1 * p.b1 * (l1 * tau1).exp()) / (p.a2 * l1);
    let mut eta = (f1 + p.b1 * y0 * tau1 * (l1 * tau1).exp()) + v2.conj() * (ONE + tau2 * p.b2 * x0 * (l1 * tau2).exp());
    if eta.norm() < SINGULAR_TOL {
        eta = ONE;
    }
    let h = ExpProfile::new(CVec::from_vec(vec![v1, v2]), l1);
    let w = CVec::from_vec(vec![f1 / eta, ONE / eta]);
    Ok(normalize(h, w, l1, eta, &measure_dd(p, tau1, tau2)?))
}

/// Eigenvectors for the Dirac-weak case (corrected chain).
///
/// `h = (v1, -b2 (lambda1 + q2), -b2 q2) e^(lambda1 theta)` and
/// `h* = (f1, 1, f3) e^(lambda1 s) / eta`.
pub fn eig_pair_dw(p: &ModelParams, hp: &HopfPoint) -> Result<EigPair, NormalFormError> {
    let q2 = expect_dw(hp)?;
    let l0 = interior(p)?;
    let (x0, y0) = (l0.x, l0.y);
    let tau = hp.tau_crit;
    let l1 = hp.lambda();
    let l2 = l1.conj();
    if l2.norm() < SINGULAR_TOL || (l2 + q2).norm() < SINGULAR_TOL {
        return Err(NormalFormError::SingularEigenvector("lambda2 = 0 or lambda2 = -q2".into()));
    }
    let den = p.b2 - p.b1 * y0 * (l2 * tau).exp();
    if den.norm() < SINGULAR_TOL {
        return Err(NormalFormError::SingularEigenvector("b2 - b1 y0 e^(lambda2 tau1) = 0".into()));
    }
    let v2 = -p.b2 * (l1 + q2);
    let v3 = c(-p.b2 * q2);
    let v1 = p.b2 * ((l1 + p.b3) * (l1 + q2) - p.b1 * x0 * q2) / den;

    let f1 = -(p.b2 - p.b1 * y0 * (l1 * tau).exp()) / l2;
    let f3 = p.b1 * x0 / (l2 + q2);
    let mut eta = f1 * v1.conj()
        + v2.conj() * (ONE - p.b1 * y0 / (l2 * l2) * (ONE - (l1 * tau).exp() - l2 * tau * p.b2 * (l1 * tau).exp()))
        + f3 * v3.conj();
    if eta.norm() < SINGULAR_TOL {
        eta = ONE;
    }
    let h = ExpProfile::new(CVec::from_vec(vec![v1, v2, v3]), l1);
    let w = CVec::from_vec(vec![f1 / eta, ONE / eta, f3 / eta]);
    Ok(normalize(h, w, l1, eta, &measure_dw(p, tau, q2)?))
}

/// One product term `coeff * X[a.0](-lags[a.1]) * X[b.0](-lags[b.1])`
/// in component `component` of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTerm {
    pub component: usize,
    pub coeff: f64,
    pub a: (usize, usize),
    pub b: (usize, usize),
}

/// Purely quadratic nonlinearity of a delay system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub dim: usize,
    /// Lag table; index 0 is the current time.
    pub lags: Vec<f64>,
    pub terms: Vec<QuadraticTerm>,
}

impl Nonlinearity {
    /// Same structure with every coefficient set to zero.
    pub fn zeroed(&self) -> Self {
        let terms = self.terms.iter().map(|t| QuadraticTerm { coeff: 0.0, ..*t }).collect();
        Self { terms, ..self.clone() }
    }
}

/// `-a2 x1 x2` and `b1 x1(t - tau1) x2(t - tau2)`.
pub fn nonlinearity_dd(p: &ModelParams, tau1: f64, tau2: f64) -> Nonlinearity {
    Nonlinearity {
        dim: 2,
        lags: vec![0.0, tau1, tau2],
        terms: vec![
            QuadraticTerm { component: 0, coeff: -p.a2, a: (0, 0), b: (1, 0) },
            QuadraticTerm { component: 1, coeff: p.b1, a: (0, 1), b: (1, 2) },
        ],
    }
}

/// `-a2 x1 x2` and `b1 x3 x1(t - tau1)` (corrected chain).
pub fn nonlinearity_dw(p: &ModelParams, tau1: f64) -> Nonlinearity {
    Nonlinearity {
        dim: 3,
        lags: vec![0.0, tau1],
        terms: vec![
            QuadraticTerm { component: 0, coeff: -p.a2, a: (0, 0), b: (1, 0) },
            QuadraticTerm { component: 1, coeff: p.b1, a: (2, 0), b: (0, 1) },
        ],
    }
}

/// Taylor coefficients of the nonlinearity restricted to the center
/// manifold: `F = f20 z^2/2 + f11 z zbar + f02 zbar^2/2 + f21 z^2 zbar/2 + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct FTerms {
    pub f20: CVec,
    pub f11: CVec,
    pub f02: CVec,
    pub f21: CVec,
}

fn quadratic_f_terms(nl: &Nonlinearity, h: &ExpProfile) -> (CVec, CVec, CVec) {
    let hb = h.conj();
    let (mut f20, mut f11, mut f02) = (CVec::zeros(nl.dim), CVec::zeros(nl.dim), CVec::zeros(nl.dim));
    for t in &nl.terms {
        let (ta, tb) = (-nl.lags[t.a.1], -nl.lags[t.b.1]);
        let (ha, hb_) = (h.component(t.a.0, ta), h.component(t.b.0, tb));
        let (ca, cb) = (hb.component(t.a.0, ta), hb.component(t.b.0, tb));
        f20[t.component] += 2.0 * t.coeff * ha * hb_;
        f11[t.component] += t.coeff * (ha * cb + ca * hb_);
        f02[t.component] += 2.0 * t.coeff * ca * cb;
    }
    (f20, f11, f02)
}

fn cubic_f_term(nl: &Nonlinearity, h: &ExpProfile, w20: &ExpSum, w11: &ExpSum) -> CVec {
    let hb = h.conj();
    let mut f21 = CVec::zeros(nl.dim);
    for t in &nl.terms {
        let (ta, tb) = (-nl.lags[t.a.1], -nl.lags[t.b.1]);
        let (ia, ib) = (t.a.0, t.b.0);
        f21[t.component] += t.coeff
            * (2.0 * h.component(ia, ta) * w11.component(ib, tb)
                + hb.component(ia, ta) * w20.component(ib, tb)
                + 2.0 * w11.component(ia, ta) * h.component(ib, tb)
                + w20.component(ia, ta) * hb.component(ib, tb));
    }
    f21
}

/// Normal-form coefficients with the intermediate data used to build them.
#[derive(Debug, Clone, PartialEq)]
pub struct GCoeffs {
    pub g20: Complex64,
    pub g11: Complex64,
    pub g02: Complex64,
    pub g21: Complex64,
    pub f: FTerms,
    pub e1: CVec,
    pub e2: CVec,
    pub w20: ExpSum,
    pub w11: ExpSum,
}

fn project(w: &CVec, f: &CVec) -> Complex64 {
    w.iter().zip(f.iter()).map(|(wi, fi)| wi.conj() * fi).sum()
}

/// E-vectors from closed forms: `E1` solves
/// `(2 lambda1 I - L(e^(2 lambda1 .))) E1 = f20` and `E2` solves `-L(1) E2 = f11`.
type ESolver<'a> = dyn Fn(&CVec, &CVec) -> Result<(CVec, CVec), NormalFormError> + 'a;

fn g_coeffs_generic(pair: &EigPair, nl: &Nonlinearity, solve_e: &ESolver<'_>) -> Result<GCoeffs, NormalFormError> {
    let h = &pair.h;
    let w = pair.w();
    let l1 = pair.lambda1;
    let (f20, f11, f02) = quadratic_f_terms(nl, h);
    let g20 = project(w, &f20);
    let g11 = project(w, &f11);
    let g02 = project(w, &f02);

    let (e1, e2) = solve_e(&f20, &f11)?;
    let v = &h.coeff;
    let vb = v.map(|z| z.conj());
    let w20 = ExpSum {
        pieces: vec![
            ExpProfile::new(v * (-g20 / l1), l1),
            ExpProfile::new(&vb * (-g02.conj() / (3.0 * l1)), l1.conj()),
            ExpProfile::new(e1.clone(), 2.0 * l1),
        ],
    };
    let w11 = ExpSum {
        pieces: vec![
            ExpProfile::new(v * (g11 / l1), l1),
            ExpProfile::new(&vb * (-g11.conj() / l1), l1.conj()),
            ExpProfile::constant(e2.clone()),
        ],
    };
    let f21 = cubic_f_term(nl, h, &w20, &w11);
    let g21 = project(w, &f21);
    Ok(GCoeffs { g20, g11, g02, g21, f: FTerms { f20, f11, f02, f21 }, e1, e2, w20, w11 })
}

fn guard(z: Complex64, what: &str) -> Result<Complex64, NormalFormError> {
    if z.norm() < SINGULAR_TOL {
        Err(NormalFormError::SingularE(what.to_string()))
    } else {
        Ok(z)
    }
}

/// Closed-form `E1`, `E2` for the Dirac-Dirac case.
pub fn e_vectors_dd(
    p: &ModelParams,
    l0: &Equilibrium,
    tau1: f64,
    tau2: f64,
    lambda1: Complex64,
    f20: &CVec,
    f11: &CVec,
) -> Result<(CVec, CVec), NormalFormError> {
    let (x0, y0) = (l0.x, l0.y);
    let two_l = 2.0 * lambda1;
    let m21 = p.b2 - p.b1 * y0 * (-two_l * tau1).exp();
    let m22 = two_l + p.b3 - p.b1 * x0 * (-two_l * tau2).exp();
    let det = guard(two_l * m22 - p.a2 * x0 * m21, "2 lambda1 (2 lambda1 + b3 - b1 x0 e^(-2 lambda1 tau2)) - a2 x0 (b2 - b1 y0 e^(-2 lambda1 tau1))")?;
    let e11 = (m22 * f20[0] - p.a2 * x0 * f20[1]) / det;
    let e12 = (two_l * f20[1] - m21 * f20[0]) / det;

    let e22 = f11[0] / (p.a2 * x0);
    let e21 = (f11[1] - (p.b3 - p.b1 * x0) * e22) / guard(c(p.b2 - p.b1 * y0), "b2 - b1 y0")?;
    Ok((CVec::from_vec(vec![e11, e12]), CVec::from_vec(vec![e21, e22])))
}

/// Closed-form `E1`, `E2` for the Dirac-weak case.
pub fn e_vectors_dw(
    p: &ModelParams,
    l0: &Equilibrium,
    tau1: f64,
    q2: f64,
    lambda1: Complex64,
    f20: &CVec,
    f11: &CVec,
) -> Result<(CVec, CVec), NormalFormError> {
    let (x0, y0) = (l0.x, l0.y);
    let two_l = 2.0 * lambda1;
    let k = guard(two_l + q2, "2 lambda1 + q2")?;
    let m21 = p.b2 - p.b1 * y0 * (-two_l * tau1).exp();
    let den = guard(
        two_l * (two_l + p.b3 - p.b1 * x0 * q2 / k) - p.a2 * x0 * m21,
        "2 lambda1 (2 lambda1 + b3 - b1 x0 q2 / (2 lambda1 + q2)) - a2 x0 (b2 - b1 y0 e^(-2 lambda1 tau1))",
    )?;
    let e12 = (two_l * f20[1] - m21 * f20[0]) / den;
    let e11 = (f20[0] - p.a2 * x0 * e12) / two_l;
    let e13 = q2 * e12 / k;

    let e22 = f11[0] / (p.a2 * x0);
    let e23 = e22;
    let e21 = (f11[1] - (p.b3 - p.b1 * x0) * e22) / guard(c(p.b2 - p.b1 * y0), "b2 - b1 y0")?;
    Ok((CVec::from_vec(vec![e11, e12, e13]), CVec::from_vec(vec![e21, e22, e23])))
}

/// E-vectors by direct LU solves of their defining systems.
pub fn e_vectors_direct(measure: &DelayMeasure, lambda1: Complex64, f20: &CVec, f11: &CVec) -> Option<(CVec, CVec)> {
    let m1 = measure.char_matrix(2.0 * lambda1);
    let m2 = measure.char_matrix(ZERO);
    let e1 = m1.lu().solve(f20)?;
    let e2 = m2.lu().solve(f11)?;
    Some((e1, e2))
}

pub fn g_coeffs_dd(p: &ModelParams, pair: &EigPair, hp: &HopfPoint) -> Result<GCoeffs, NormalFormError> {
    let tau2 = expect_dd(hp)?;
    g_coeffs_dd_with(p, pair, hp, &nonlinearity_dd(p, hp.tau_crit, tau2))
}

/// As [`g_coeffs_dd`] with a caller-supplied nonlinearity (e.g. zeroed).
pub fn g_coeffs_dd_with(p: &ModelParams, pair: &EigPair, hp: &HopfPoint, nl: &Nonlinearity) -> Result<GCoeffs, NormalFormError> {
    let tau2 = expect_dd(hp)?;
    let l0 = interior(p)?;
    let solve = |f20: &CVec, f11: &CVec| e_vectors_dd(p, &l0, hp.tau_crit, tau2, pair.lambda1, f20, f11);
    g_coeffs_generic(pair, nl, &solve)
}

pub fn g_coeffs_dw(p: &ModelParams, pair: &EigPair, hp: &HopfPoint) -> Result<GCoeffs, NormalFormError> {
    expect_dw(hp)?;
    g_coeffs_dw_with(p, pair, hp, &nonlinearity_dw(p, hp.tau_crit))
}

pub fn g_coeffs_dw_with(p: &ModelParams, pair: &EigPair, hp: &HopfPoint, nl: &Nonlinearity) -> Result<GCoeffs, NormalFormError> {
    let q2 = expect_dw(hp)?;
    let l0 = interior(p)?;
    let solve = |f20: &CVec, f11: &CVec| e_vectors_dw(p, &l0, hp.tau_crit, q2, pair.lambda1, f20, f11);
    g_coeffs_generic(pair, nl, &solve)
}

/// `d lambda / d tau1` for the Dirac-Dirac case at an arbitrary `lambda`.
pub fn lambda_prime_dd_at(p: &ModelParams, x0: f64, lambda: Complex64, tau1: f64, tau2: f64) -> Result<Complex64, NormalFormError> {
    let g = p.a1 * p.b1 * x0;
    let e1 = (-lambda * tau1).exp();
    let den = p.b3 + 2.0 * lambda - g * tau1 * e1 - p.b1 * x0 * (1.0 - lambda * tau2) * (-lambda * tau2).exp();
    if den.norm() < SINGULAR_TOL {
        return Err(NormalFormError::ZeroDenominator);
    }
    Ok(g * lambda * e1 / den)
}

/// `d lambda / d tau1` for the Dirac-weak case at an arbitrary `lambda`.
pub fn lambda_prime_dw_at(k: &WeakCoeffs, lambda: Complex64, tau1: f64) -> Result<Complex64, NormalFormError> {
    let e = (-lambda * tau1).exp();
    let q = k.r1 * lambda + k.r0;
    let den = 3.0 * lambda * lambda + 2.0 * k.p2 * lambda + k.p1 + (k.r1 - tau1 * q) * e;
    if den.norm() < SINGULAR_TOL {
        return Err(NormalFormError::ZeroDenominator);
    }
    Ok(lambda * q * e / den)
}

pub fn lambda_prime_dd(p: &ModelParams, hp: &HopfPoint) -> Result<Complex64, NormalFormError> {
    let tau2 = expect_dd(hp)?;
    lambda_prime_dd_at(p, model::interior_x0(p)?, hp.lambda(), hp.tau_crit, tau2)
}

pub fn lambda_prime_dw(p: &ModelParams, hp: &HopfPoint) -> Result<Complex64, NormalFormError> {
    let q2 = expect_dw(hp)?;
    let k = WeakCoeffs::new(p, model::interior_x0(p)?, q2);
    lambda_prime_dw_at(&k, hp.lambda(), hp.tau_crit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Supercritical,
    Subcritical,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitStability {
    OrbitallyStable,
    OrbitallyUnstable,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeriodTrend {
    Increases,
    Decreases,
    Degenerate,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Supercritical => "supercritical",
            Direction::Subcritical => "subcritical",
            Direction::Degenerate => "degenerate",
        })
    }
}

impl fmt::Display for OrbitStability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrbitStability::OrbitallyStable => "orbitally stable",
            OrbitStability::OrbitallyUnstable => "orbitally unstable",
            OrbitStability::Degenerate => "degenerate",
        })
    }
}

impl fmt::Display for PeriodTrend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PeriodTrend::Increases => "period increases",
            PeriodTrend::Decreases => "period decreases",
            PeriodTrend::Degenerate => "period trend degenerate",
        })
    }
}

/// `C1(0)`, `mu2`, `beta2`, `T2` and their qualitative reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFormResult {
    pub omega: f64,
    pub g20: Complex64,
    pub g11: Complex64,
    pub g02: Complex64,
    pub g21: Complex64,
    pub c1: Complex64,
    pub lambda_prime: Complex64,
    pub mu2: f64,
    pub beta2: f64,
    pub t2: f64,
    pub direction: Direction,
    pub stability: OrbitStability,
    pub period_trend: PeriodTrend,
}

impl NormalFormResult {
    pub fn verdict(&self) -> String {
        format!("{}, {}, {}", self.direction, self.stability, self.period_trend)
    }
}

/// The four coefficients only; what [`hopf_quantities`] needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GValues {
    pub g20: Complex64,
    pub g11: Complex64,
    pub g02: Complex64,
    pub g21: Complex64,
}

impl From<&GCoeffs> for GValues {
    fn from(g: &GCoeffs) -> Self {
        Self { g20: g.g20, g11: g.g11, g02: g.g02, g21: g.g21 }
    }
}

pub fn hopf_quantities(g: GValues, lambda_prime: Complex64, omega: f64) -> Result<NormalFormResult, NormalFormError> {
    if lambda_prime.re == 0.0 || !lambda_prime.re.is_finite() {
        return Err(NormalFormError::DegenerateTransversality);
    }
    let GValues { g20, g11, g02, g21 } = g;
    let c1 = I / (2.0 * omega) * (g20 * g11 - 2.0 * g11.norm_sqr() - g02.norm_sqr() / 3.0) + g21 / 2.0;
    let mu2 = -c1.re / lambda_prime.re;
    let beta2 = 2.0 * c1.re;
    let t2 = -(c1.im + mu2 * lambda_prime.im) / omega;
    let direction = match mu2.partial_cmp(&0.0) {
        Some(std::cmp::Ordering::Greater) => Direction::Supercritical,
        Some(std::cmp::Ordering::Less) => Direction::Subcritical,
        _ => Direction::Degenerate,
    };
    let stability = match beta2.partial_cmp(&0.0) {
        Some(std::cmp::Ordering::Less) => OrbitStability::OrbitallyStable,
        Some(std::cmp::Ordering::Greater) => OrbitStability::OrbitallyUnstable,
        _ => OrbitStability::Degenerate,
    };
    let period_trend = match t2.partial_cmp(&0.0) {
        Some(std::cmp::Ordering::Greater) => PeriodTrend::Increases,
        Some(std::cmp::Ordering::Less) => PeriodTrend::Decreases,
        _ => PeriodTrend::Degenerate,
    };
    Ok(NormalFormResult {
        omega,
        g20,
        g11,
        g02,
        g21,
        c1,
        lambda_prime,
        mu2,
        beta2,
        t2,
        direction,
        stability,
        period_trend,
    })
}

/// Residual checks attached to every computed normal form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `|<h*, h> - 1|`.
    pub pairing_error: f64,
    /// `|<h*, conj h>|`.
    pub cross_pairing: f64,
    /// `|Delta(lambda1) v|`.
    pub eigen_residual: f64,
    /// `|Delta(lambda1)^T conj(w)|`.
    pub adjoint_residual: f64,
    /// Largest difference between closed-form and directly solved E-vectors.
    pub e_vector_error: f64,
    /// `|<h*, h> - 1|` with the closed-form normalizer alone.
    pub eta_seed_error: f64,
    /// `|d lambda/d tau1|` mismatch between the split form and the quotient.
    pub transversality_gap: f64,
}

/// A full normal-form computation at one Hopf point.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormReport {
    pub hopf: HopfPoint,
    pub pair: EigPair,
    pub g: GCoeffs,
    pub result: NormalFormResult,
    pub diagnostics: Diagnostics,
    /// Differences between the derived coefficient terms and the printed
    /// closed forms, one line each.
    pub printed_mismatches: Vec<String>,
}

fn diagnostics(pair: &EigPair, g: &GCoeffs, measure: &DelayMeasure, hp: &HopfPoint, lambda_prime: Complex64) -> Diagnostics {
    let m = measure.char_matrix(pair.lambda1);
    let wbar = pair.w().map(|z| z.conj());
    let e_vector_error = match e_vectors_direct(measure, pair.lambda1, &g.f.f20, &g.f.f11) {
        Some((e1, e2)) => (&e1 - &g.e1).camax().max((&e2 - &g.e2).camax()),
        None => f64::INFINITY,
    };
    Diagnostics {
        pairing_error: (bilinear(&pair.h_star, &pair.h, measure) - 1.0).norm(),
        cross_pairing: bilinear(&pair.h_star, &pair.h.conj(), measure).norm(),
        eigen_residual: (&m * pair.v()).norm(),
        adjoint_residual: (m.transpose() * wbar).norm(),
        e_vector_error,
        eta_seed_error: (pair.seed_pairing - 1.0).norm(),
        transversality_gap: (lambda_prime - hp.transversality()).norm(),
    }
}

/// Normal form at a certified Dirac-Dirac point.
pub fn normal_form_dd(p: &ModelParams, hp: &HopfPoint) -> Result<NormalFormReport, NormalFormError> {
    normal_form_dd_with(p, hp, false)
}

/// As [`normal_form_dd`]; `zero_nonlinear` drops every quadratic term.
pub fn normal_form_dd_with(p: &ModelParams, hp: &HopfPoint, zero_nonlinear: bool) -> Result<NormalFormReport, NormalFormError> {
    let tau2 = expect_dd(hp)?;
    let pair = eig_pair_dd(p, hp)?;
    let mut nl = nonlinearity_dd(p, hp.tau_crit, tau2);
    if zero_nonlinear {
        nl = nl.zeroed();
    }
    let g = g_coeffs_dd_with(p, &pair, hp, &nl)?;
    let lp = lambda_prime_dd(p, hp)?;
    let result = hopf_quantities(GValues::from(&g), lp, hp.omega)?;
    let measure = measure_dd(p, hp.tau_crit, tau2)?;
    let diagnostics = diagnostics(&pair, &g, &measure, hp, lp);
    let printed_mismatches = if zero_nonlinear { Vec::new() } else { printed_check_dd(p, hp, &pair, &g)? };
    Ok(NormalFormReport { hopf: *hp, pair, g, result, diagnostics, printed_mismatches })
}

/// Normal form at a certified Dirac-weak point.
pub fn normal_form_dw(p: &ModelParams, hp: &HopfPoint) -> Result<NormalFormReport, NormalFormError> {
    normal_form_dw_with(p, hp, false)
}

pub fn normal_form_dw_with(p: &ModelParams, hp: &HopfPoint, zero_nonlinear: bool) -> Result<NormalFormReport, NormalFormError> {
    let q2 = expect_dw(hp)?;
    let pair = eig_pair_dw(p, hp)?;
    let mut nl = nonlinearity_dw(p, hp.tau_crit);
    if zero_nonlinear {
        nl = nl.zeroed();
    }
    let g = g_coeffs_dw_with(p, &pair, hp, &nl)?;
    let lp = lambda_prime_dw(p, hp)?;
    let result = hopf_quantities(GValues::from(&g), lp, hp.omega)?;
    let measure = measure_dw(p, hp.tau_crit, q2)?;
    let diagnostics = diagnostics(&pair, &g, &measure, hp, lp);
    let printed_mismatches = if zero_nonlinear { Vec::new() } else { printed_check_dw(p, hp, &pair, &g)? };
    Ok(NormalFormReport { hopf: *hp, pair, g, result, diagnostics, printed_mismatches })
}

/// Normal form at the first crossing for either kernel case.
pub fn normal_form(p: &ModelParams, hp: &HopfPoint, zero_nonlinear: bool) -> Result<NormalFormReport, NormalFormError> {
    match hp.case {
        HopfCase::DiracDirac { .. } => normal_form_dd_with(p, hp, zero_nonlinear),
        HopfCase::DiracWeak { .. } => normal_form_dw_with(p, hp, zero_nonlinear),
    }
}

/// Convenience: locate the first crossing and compute its normal form.
pub fn analyze(p: &ModelParams, case: HopfCase, opts: &CrossingOptions) -> Result<NormalFormReport, NormalFormError> {
    let hp = match case {
        HopfCase::DiracDirac { tau2 } => chareq::hopf_point_dd(p, tau2, 1, opts)?,
        HopfCase::DiracWeak { q2 } => chareq::hopf_point_dw(p, q2, opts)?,
    };
    normal_form(p, &hp, false)
}

const PRINTED_TOL: f64 = 1e-9;

fn note_mismatch(out: &mut Vec<String>, name: &str, printed: Complex64, derived: Complex64) {
    let scale = derived.norm().max(printed.norm()).max(1e-300);
    if (printed - derived).norm() > PRINTED_TOL * scale.max(1.0) {
        out.push(format!("{name}: printed form gives {printed:.10e}, expansion gives {derived:.10e}"));
    }
}

/// Evaluates the printed f-term closed forms for the Dirac-Dirac case and
/// lists those that disagree with the expansion.
fn printed_check_dd(p: &ModelParams, hp: &HopfPoint, pair: &EigPair, g: &GCoeffs) -> Result<Vec<String>, NormalFormError> {
    let tau2 = expect_dd(hp)?;
    let tau1 = hp.tau_crit;
    let (l1, l2) = (pair.lambda1, pair.lambda1.conj());
    let v = pair.v();
    let (v1, v2) = (v[0], v[1]);
    let (a2, b1) = (p.a2, p.b1);
    let w20 = &g.w20;
    let w11 = &g.w11;
    let mut out = Vec::new();

    note_mismatch(&mut out, "f120", -2.0 * a2 * v1 * v2, g.f.f20[0]);
    note_mismatch(&mut out, "f111", c(-2.0 * a2 * (v1 * v2.conj()).re), g.f.f11[0]);
    note_mismatch(&mut out, "f220", 2.0 * b1 * v1 * v2 * (l2 * (tau1 + tau2)).exp(), g.f.f20[1]);
    note_mismatch(
        &mut out,
        "f211",
        c(2.0 * b1 * (v1 * v2.conj() * (l1 * tau2 + l2 * tau1).exp()).re),
        g.f.f11[1],
    );
    let f121 = -a2
        * (2.0 * v1 * w11.component(1, 0.0)
            + v1.conj() * w20.component(1, 0.0)
            + 2.0 * v2 * w11.component(0, 0.0)
            + v1.conj() * w20.component(0, 0.0));
    note_mismatch(&mut out, "f121", f121, g.f.f21[0]);
    let f221 = b1
        * (2.0 * v1 * (l2 * tau1).exp() * w11.component(1, -tau2)
            + v1.conj() * (l1 * tau1).exp() * w20.component(1, -tau2)
            + 2.0 * v2 * (l2 * tau2).exp() * w11.component(0, -tau1)
            + v2.conj() * (l1 * tau2).exp() * w20.component(0, -tau1));
    note_mismatch(&mut out, "f221", f221, g.f.f21[1]);
    Ok(out)
}

/// Same check for the Dirac-weak case. The printed terms follow the
/// as-printed chain, so disagreements are expected there.
fn printed_check_dw(p: &ModelParams, hp: &HopfPoint, pair: &EigPair, g: &GCoeffs) -> Result<Vec<String>, NormalFormError> {
    expect_dw(hp)?;
    let tau = hp.tau_crit;
    let (l1, l2) = (pair.lambda1, pair.lambda1.conj());
    let v = pair.v();
    let (v1, v2, v3) = (v[0], v[1], v[2]);
    let (a2, b1) = (p.a2, p.b1);
    let w20 = &g.w20;
    let w11 = &g.w11;
    let mut out = Vec::new();

    note_mismatch(&mut out, "f120", -2.0 * a2 * v1 * v2, g.f.f20[0]);
    note_mismatch(&mut out, "f111", c(-2.0 * a2 * (v1 * v2.conj()).re), g.f.f11[0]);
    note_mismatch(&mut out, "f220", 2.0 * b1 * v2 * v3 * (l2 * tau).exp(), g.f.f20[1]);
    note_mismatch(&mut out, "f211", c(2.0 * b1 * (v2.conj() * v3 * (l2 * tau).exp()).re), g.f.f11[1]);
    let f121 = -a2
        * (2.0 * v1 * w11.component(1, 0.0)
            + v1.conj() * w20.component(1, 0.0)
            + 2.0 * v2 * w11.component(0, 0.0)
            + v2.conj() * w20.component(0, 0.0));
    note_mismatch(&mut out, "f121", f121, g.f.f21[0]);
    let f221 = b1
        * (2.0 * v3 * w11.component(1, -tau)
            + v3.conj() * w20.component(1, -tau)
            + 2.0 * v2 * (l2 * tau).exp() * w11.component(2, 0.0)
            + v2.conj() * (l1 * tau).exp() * w20.component(2, 0.0));
    note_mismatch(&mut out, "f221", f221, g.f.f21[1]);
    Ok(out)
}
