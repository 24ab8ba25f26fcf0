//! Hidden observables and hidden mixed states for finite-dimensional quantum
//! observables.
//!
//! Every Hermitian operator `T` gets a classical, deterministic observable
//! `f(ray, u)` on a hidden space made of rays paired with a uniform hidden
//! parameter `u` in `(0, 1)`. Every density matrix `D` gets a probability
//! measure `mu` on that space, and for every bounded function `b`:
//!
//! ```text
//! Trace[b(T) D] = integral of b(f) d(mu)
//! ```
//!
//! The crate computes both sides exactly (finite sums over spectral weights)
//! and estimates the right side by seeded, partition-independent Monte Carlo.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod borel;
pub mod contexts;
pub mod error;
pub mod hidden;
pub mod json;
pub mod mixed;
pub mod random;
pub mod rng;
pub mod spectral;

pub use borel::{BorelExpr, ParseError};
pub use contexts::{Context, ContextObservable, NogoBranch, NogoReport, PartitionContext};
pub use error::{Error, Result};
pub use hidden::{GammaModel, HiddenFunction, HiddenObservable, HiddenPoint, HiddenProposition, LineDistribution, StepProfile};
pub use mixed::{Ensemble, HiddenMixedState, HiddenSample, McEstimate};
pub use spectral::{BorelSet, DensityMatrix, HermitianOperator, SpectralDecomposition, StateVector};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
pub use num_complex::Complex64;
