//! Model equations for the delayed tumor-immune interaction system.
//!
//! Populations are `x` (malignant cells) and `y` (lymphocytes). The
//! interaction term `b1 * x * y` is read through two memory kernels, one
//! acting on `x` and one on `y`. Everything in here is a pure function of
//! its inputs.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter `{field}` must be a finite positive number, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("a1*b1 - a2*b2 vanishes; the interior equilibrium is undefined")]
    DegenerateEquilibrium,
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
}

/// The six positive rates of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Malignant growth rate.
    pub a1: f64,
    /// Kill rate per lymphocyte.
    pub a2: f64,
    /// Recognition / interaction rate.
    pub b1: f64,
    /// Immunodepression rate.
    pub b2: f64,
    /// Lymphocyte natural death rate.
    pub b3: f64,
    /// Lymphocyte influx.
    pub b4: f64,
}

impl ModelParams {
    pub const fn new(a1: f64, a2: f64, b1: f64, b2: f64, b3: f64, b4: f64) -> Self {
        Self { a1, a2, b1, b2, b3, b4 }
    }

    /// The reference parameter set.
    pub const fn reference() -> Self {
        Self::new(2.5, 1.0, 1.0, 0.4, 0.95, 2.0)
    }

    pub fn fields(&self) -> [(&'static str, f64); 6] {
        [
            ("a1", self.a1),
            ("a2", self.a2),
            ("b1", self.b1),
            ("b2", self.b2),
            ("b3", self.b3),
            ("b4", self.b4),
        ]
    }

    /// Rejects nonpositive or non-finite fields, naming the first offender.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (field, value) in self.fields() {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::NonPositive { field, value });
            }
        }
        Ok(())
    }

    /// True iff `b2/b1 < b4/b3 < a1/a2` holds strictly.
    pub fn check_admissible(&self) -> Result<bool, ModelError> {
        self.validate()?;
        Ok(self.violated_inequality().is_none())
    }

    /// Like [`check_admissible`](Self::check_admissible) but turns a false
    /// result into an error that names the violated inequality.
    pub fn require_admissible(&self) -> Result<(), ModelError> {
        self.validate()?;
        match self.violated_inequality() {
            None => Ok(()),
            Some(msg) => Err(ModelError::Inadmissible(msg)),
        }
    }

    fn violated_inequality(&self) -> Option<String> {
        let lo = self.b2 / self.b1;
        let mid = self.b4 / self.b3;
        let hi = self.a1 / self.a2;
        if lo >= mid {
            return Some(format!("b2/b1 < b4/b3 fails ({lo} >= {mid})"));
        }
        if mid >= hi {
            return Some(format!("b4/b3 < a1/a2 fails ({mid} >= {hi})"));
        }
        None
    }
}

/// A delay kernel: a point mass at lag `tau` or a gamma density
/// `rate^(order+1) s^order e^(-rate s) / order!`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Dirac { tau: f64 },
    Gamma { order: u32, rate: f64 },
}

impl Kernel {
    /// The order-0 gamma kernel.
    pub const fn weak(rate: f64) -> Self {
        Kernel::Gamma { order: 0, rate }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            Kernel::Dirac { tau } if !(tau.is_finite() && tau >= 0.0) => Err(
                ModelError::InvalidKernel(format!("dirac lag must be finite and >= 0, got {tau}")),
            ),
            Kernel::Gamma { rate, .. } if !(rate.is_finite() && rate > 0.0) => Err(
                ModelError::InvalidKernel(format!("gamma rate must be finite and > 0, got {rate}")),
            ),
            _ => Ok(()),
        }
    }

    /// Density of a gamma kernel at `s >= 0`. Point masses have no density
    /// and return `None`.
    pub fn density(&self, s: f64) -> Option<f64> {
        match *self {
            Kernel::Dirac { .. } => None,
            Kernel::Gamma { order, rate } => {
                if s < 0.0 {
                    return Some(0.0);
                }
                let p = order as f64;
                // log form keeps large orders finite
                let log_fact: f64 = (1..=order).map(|k| (k as f64).ln()).sum();
                let log_k = (p + 1.0) * rate.ln() + if order == 0 { 0.0 } else { p * s.ln() }
                    - rate * s
                    - log_fact;
                Some(log_k.exp())
            }
        }
    }

    pub fn mean_lag(&self) -> f64 {
        match *self {
            Kernel::Dirac { tau } => tau,
            Kernel::Gamma { order, rate } => (order as f64 + 1.0) / rate,
        }
    }

    /// Laplace transform `int_0^inf k(s) e^(-lambda s) ds`.
    pub fn laplace(&self, lambda: Complex64) -> Complex64 {
        match *self {
            Kernel::Dirac { tau } => (-lambda * tau).exp(),
            Kernel::Gamma { order, rate } => {
                let r = Complex64::new(rate, 0.0);
                (r / (r + lambda)).powu(order + 1)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumLabel {
    L0,
    L1,
}

impl fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquilibriumLabel::L0 => f.write_str("L0"),
            EquilibriumLabel::L1 => f.write_str("L1"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x: f64,
    pub y: f64,
    pub label: EquilibriumLabel,
}

/// Interior equilibrium `L0` and the tumor-free equilibrium `L1`.
pub fn equilibria(p: &ModelParams) -> Result<(Equilibrium, Equilibrium), ModelError> {
    p.require_admissible()?;
    let denom = p.a1 * p.b1 - p.a2 * p.b2;
    if denom == 0.0 {
        return Err(ModelError::DegenerateEquilibrium);
    }
    let l0 = Equilibrium {
        x: (p.b3 * p.a1 - p.b4 * p.a2) / denom,
        y: p.a1 / p.a2,
        label: EquilibriumLabel::L0,
    };
    let l1 = Equilibrium {
        x: 0.0,
        y: p.b4 / p.b3,
        label: EquilibriumLabel::L1,
    };
    Ok((l0, l1))
}

/// Abscissa of `L0`; shorthand used throughout the analysis code.
pub fn interior_x0(p: &ModelParams) -> Result<f64, ModelError> {
    Ok(equilibria(p)?.0.x)
}

/// Right-hand side of the discrete-delay system in original coordinates.
/// `x_lagged` is `x(t - tau1)` and `y_lagged` is `y(t - tau2)`.
pub fn rhs_original(p: &ModelParams, x: f64, y: f64, x_lagged: f64, y_lagged: f64) -> [f64; 2] {
    [
        p.a1 * x - p.a2 * x * y,
        p.b1 * x_lagged * y_lagged - p.b2 * x - p.b3 * y + p.b4,
    ]
}

/// Right-hand side shifted so that `L0` sits at the origin.
/// `x1_lag` is the kernel-1 average of `x1` and `x2_lag` the kernel-2
/// average of `x2` (for point kernels, plain lagged values).
pub fn rhs_translated(
    p: &ModelParams,
    l0: &Equilibrium,
    x1: f64,
    x2: f64,
    x1_lag: f64,
    x2_lag: f64,
) -> [f64; 2] {
    [
        -p.a2 * l0.x * x2 - p.a2 * x1 * x2,
        -p.b2 * x1 - p.b3 * x2
            + p.b1 * l0.x * x2_lag
            + p.b1 * l0.y * x1_lag
            + p.b1 * x1_lag * x2_lag,
    ]
}

/// Which version of the three-dimensional chain system to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainForm {
    /// The lagged factor acts on `x1`, matching the translated system and
    /// the weak-kernel characteristic polynomial.
    #[default]
    Corrected,
    /// The literal typeset version, with the lagged factor acting on `x2`.
    /// Kept only for comparison runs.
    AsPrinted,
}

/// Chain reformulation for a point lag on `x` and a weak kernel on `y`.
/// `x3` is the exponentially weighted average of `x2`; `lagged` is
/// `x1(t - tau1)`. The as-printed variant feeds `x2(t - tau1)` through the
/// same slot, see [`chain_lagged_component`].
pub fn rhs_chain(p: &ModelParams, l0: &Equilibrium, q2: f64, state: [f64; 3], lagged: f64) -> [f64; 3] {
    let [x1, x2, x3] = state;
    [
        -p.a2 * l0.x * x2 - p.a2 * x1 * x2,
        -p.b2 * x1 - p.b3 * x2 + p.b1 * l0.x * x3 + p.b1 * l0.y * lagged + p.b1 * x3 * lagged,
        q2 * (x2 - x3),
    ]
}

pub type Mat2 = [[f64; 2]; 2];
pub type Mat3 = [[f64; 3]; 3];

/// Linear part `A`, `B1`, `B2` of the translated system at the origin:
/// `u' = A u(t) + B1 U1(t) + B2 U2(t)` where `Ui` is the kernel-`i` average.
pub fn linear_part(p: &ModelParams, l0: &Equilibrium) -> (Mat2, Mat2, Mat2) {
    let a = [[0.0, -p.a2 * l0.x], [-p.b2, -p.b3]];
    let b1 = [[0.0, 0.0], [p.b1 * l0.y, 0.0]];
    let b2 = [[0.0, 0.0], [0.0, p.b1 * l0.x]];
    (a, b1, b2)
}

/// Linear part of the chain system: `v' = A1 v(t) + C1 v(t - tau1)`.
pub fn chain_linear_part(p: &ModelParams, l0: &Equilibrium, q2: f64, form: ChainForm) -> (Mat3, Mat3) {
    let a1 = [
        [0.0, -p.a2 * l0.x, 0.0],
        [-p.b2, -p.b3, p.b1 * l0.x],
        [0.0, q2, -q2],
    ];
    let mut c1 = [[0.0; 3]; 3];
    match form {
        ChainForm::Corrected => c1[1][0] = p.b1 * l0.y,
        ChainForm::AsPrinted => c1[1][1] = p.b1 * l0.y,
    }
    (a1, c1)
}

/// Index of the state component read through the point lag of the chain.
pub fn chain_lagged_component(form: ChainForm) -> usize {
    match form {
        ChainForm::Corrected => 0,
        ChainForm::AsPrinted => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn admissibility_examples() {
        assert!(ModelParams::reference().check_admissible().unwrap());
        assert!(!ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).check_admissible().unwrap());
        assert!(ModelParams::new(2.0, 1.0, 1.0, 0.5, 1.0, 1.0).check_admissible().unwrap());
    }

    #[test]
    fn nonpositive_field_is_named() {
        let p = ModelParams::new(2.0, 1.0, 0.0, 0.5, 1.0, 1.0);
        match p.check_admissible() {
            Err(ModelError::NonPositive { field, .. }) => assert_eq!(field, "b1"),
            other => panic!("unexpected {other:?}"),
        }
        let p = ModelParams::new(2.0, 1.0, 1.0, 0.5, f64::NAN, 1.0);
        assert!(matches!(p.validate(), Err(ModelError::NonPositive { field: "b3", .. })));
    }

    #[test]
    fn boundary_is_rejected() {
        // b4/b3 == a1/a2
        let p = ModelParams::new(2.0, 1.0, 1.0, 0.5, 1.0, 2.0);
        let err = p.require_admissible().unwrap_err();
        assert!(err.to_string().contains("b4/b3 < a1/a2"));
        assert!(equilibria(&p).is_err());
    }

    #[test]
    fn reference_equilibria() {
        let (l0, l1) = equilibria(&ModelParams::reference()).unwrap();
        assert_relative_eq!(l0.x, 0.375 / 2.1, epsilon = 1e-15);
        assert_relative_eq!(l0.y, 2.5);
        assert_eq!(l1.x, 0.0);
        assert_relative_eq!(l1.y, 2.0 / 0.95, epsilon = 1e-15);

        let (l0, l1) = equilibria(&ModelParams::new(2.0, 1.0, 1.0, 0.5, 1.0, 1.0)).unwrap();
        assert_relative_eq!(l0.x, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(l0.y, 2.0);
        assert_relative_eq!(l1.y, 1.0);
    }

    #[test]
    fn rhs_original_examples() {
        let p = ModelParams::reference();
        let d = rhs_original(&p, 1.0, 1.0, 1.0, 1.0);
        assert_relative_eq!(d[0], 1.5, epsilon = 1e-15);
        assert_relative_eq!(d[1], 1.65, epsilon = 1e-14);

        let d = rhs_original(&p, 0.0, 3.0, 0.0, 7.0);
        assert_eq!(d[0], 0.0);
        assert_relative_eq!(d[1], -p.b3 * 3.0 + p.b4);
    }

    #[test]
    fn equilibria_zero_the_field() {
        let p = ModelParams::reference();
        let (l0, l1) = equilibria(&p).unwrap();
        for e in [l0, l1] {
            let d = rhs_original(&p, e.x, e.y, e.x, e.y);
            assert!(d[0].abs() < 1e-12 && d[1].abs() < 1e-12, "{e:?} -> {d:?}");
        }
        assert_eq!(rhs_translated(&p, &l0, 0.0, 0.0, 0.0, 0.0), [0.0, 0.0]);
        assert_eq!(rhs_chain(&p, &l0, 0.3, [0.0; 3], 0.0), [0.0; 3]);
    }

    #[test]
    fn kernel_moments() {
        assert_eq!(Kernel::Dirac { tau: 3.5 }.mean_lag(), 3.5);
        assert_relative_eq!(Kernel::Gamma { order: 2, rate: 0.5 }.mean_lag(), 6.0);
        let k = Kernel::weak(0.1);
        assert_relative_eq!(k.density(0.0).unwrap(), 0.1);
        assert!(Kernel::Dirac { tau: 1.0 }.density(1.0).is_none());
        assert!(Kernel::Gamma { order: 0, rate: 0.0 }.validate().is_err());
        assert!(Kernel::Dirac { tau: -1.0 }.validate().is_err());
    }

    #[test]
    fn weak_kernel_laplace_is_rational() {
        let k = Kernel::weak(0.7);
        let l = Complex64::new(0.2, 1.3);
        let expected = 0.7 / (l + 0.7);
        assert!((k.laplace(l) - expected).norm() < 1e-15);
    }
}
