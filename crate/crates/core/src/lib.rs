//! Numerical laboratory for the interacting partially directed
//! self-avoiding walk (IPDSAW) in its collapsed phase.

// `!(x > 0.0)` is used on purpose so that NaN lands in the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beads;
pub mod continuum;
pub mod error;
pub mod exact;
pub mod finite_n;
pub mod io;
pub mod laplace;
pub mod quadrature;
pub mod sampling;
mod solve;

pub use continuum::{CollapsedConstants, RateFunctionPoint, Tilt};
pub use error::{Error, Result};
pub use finite_n::FiniteTilt;
pub use laplace::{DeltaCoeffs, ModelParams, TiltParam};
