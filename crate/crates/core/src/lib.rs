//! Numerical toolkit for all-versus-nothing tests of EPR steering.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`quantum`]: one- and two-qubit states, projective measurements and
//!   Bob's conditional states.
//! * [`lhs`]: local-hidden-state ensembles, their predicted probabilities, the
//!   deterministic decomposition, the reduction to `2^N` hidden states and the
//!   centre-of-mass consistency check.
//! * [`delta`]: the minimax bound Δ between LHS and quantum predictions, the
//!   `l_n` relaxation used to compute it, and an independent grid oracle.
//! * [`braid`]: the Fibonacci three-anyon representation and braid-word
//!   searches for single-qubit gates.
//! * [`circuits`]: ideal-gate preparation circuits for the steering states.

pub mod braid;
pub mod circuits;
pub mod delta;
mod error;
pub mod lhs;
pub mod nelder_mead;
pub mod quantum;
pub mod sampling;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
