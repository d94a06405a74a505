//! Population recovery from per-bit corrupted samples.
//!
//! An unknown distribution `P` on `{0,1}^d` is observed through a memoryless
//! channel that independently erases each bit (lossy model) or flips it
//! (noisy model) with probability `eps`. This crate estimates `P_0`, the
//! probability of the all-zero string, and from it the whole distribution:
//!
//! - [`model`] — channel models, weight-transition matrices and the
//!   distribution containers everything else consumes.
//! - [`lpsolve`] — a dense simplex solver over `f64` or exact rationals.
//! - [`minimax`] — the estimator-synthesis LP, its dual (`delta_of_t`), the
//!   min-TV inverse (`t_of_delta`) and matched minimax risk brackets.
//! - [`estimators`] — concrete linear estimators (LP-synthesized, exact
//!   unbiased, Poisson-smoothed) applied to sample batches.
//! - [`analysis`] — closed-form bound calculators, power-series machinery,
//!   the Le Cam two-point construction and statistical distances.
//! - [`recovery`] — prefix-tree conversion of a `P_0` estimator into full
//!   distribution recovery with median boosting.
//! - [`simharness`] — seeded sampling, channel simulation and Monte Carlo
//!   rate experiments.
//!
//! The `poprec` binary exposes each stage as a subcommand; see the README.

pub mod analysis;
pub mod estimators;
pub mod lpsolve;
pub mod minimax;
pub mod model;
pub mod recovery;
pub mod simharness;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension too large: {got} exceeds maximum {max}")]
    DimensionTooLarge { got: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid probability {0}: must lie in [0,1]")]
    InvalidProbability(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate noisy channel: eps = 1/2 carries no information")]
    DegenerateNoisy,

    #[error("channel uninvertible: eps = 1 erases everything")]
    ChannelUninvertible,

    #[error("solver stalled after {0} pivots; retry in rational mode")]
    SolverStalled(usize),

    #[error("linear program infeasible: {0}")]
    Infeasible(String),

    #[error("linear program unbounded")]
    Unbounded,

    #[error("empty batch")]
    EmptyBatch,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
