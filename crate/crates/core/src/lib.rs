//! Delayed tumor-immune interaction model.
//!
//! The crate covers the model equations ([`model`]), the characteristic
//! equations and Hopf crossings of the linearization about the interior
//! equilibrium ([`chareq`]), center-manifold normal forms at a crossing
//! ([`normalform`]), fixed-step integration of the delay systems
//! ([`integrate`]) and the command-line front end ([`cli`]).

pub mod chareq;
pub mod cli;
pub mod integrate;
pub mod model;
pub mod normalform;
pub mod roots;

pub use chareq::{DiracDirac, DiracWeak, HopfCase, HopfPoint};
pub use model::{ChainForm, Equilibrium, Kernel, ModelParams};
pub use normalform::NormalFormResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
