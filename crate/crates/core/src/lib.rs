//! Finite-key decoy-state QKD secure-key-rate calculator.
//!
//! The crate evaluates GLLP-style and smooth-entropy-style finite-key rate
//! formulas under one composable security budget, so protocols that were
//! published with different security conventions can be compared at the same
//! final-key parameter. Around the evaluators sit the supporting pieces:
//!
//! * [`numerics`]: binary entropy and two-sided Gaussian tails.
//! * [`channel`]: weak-coherent-pulse source, lossy fiber and threshold detector.
//! * [`decoy`]: vacuum+weak and two-weak-decoy single-photon bounds.
//! * [`fluctuation`]: finite-sample deviation models and pool accounting.
//! * [`security`]: trace-distance/fidelity conversion and budget allocation.
//! * [`protocols`]: the rate evaluators.
//! * [`optimizer`]: deterministic grid + golden-section maximization.
//! * [`simulator`]: seeded pulse-level Monte Carlo used as a validation oracle.
//! * [`harness`]: scenario configuration, builtin comparisons and CSV output.

// `!(x >= 0.0)` style guards deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod decoy;
pub mod error;
pub mod fluctuation;
pub mod harness;
pub mod numerics;
pub mod optimizer;
pub mod protocols;
pub mod security;
pub mod simulator;

pub use error::{Error, Result};
pub use numerics::Probability;
