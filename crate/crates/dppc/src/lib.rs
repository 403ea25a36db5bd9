//! Determinantal point processes meet probabilistic circuits.
//!
//! This crate implements two families of tractable distributions over subsets
//! of a finite ground set — L-ensembles / marginal-kernel DPPs and
//! probabilistic circuits (weighted sum/product DAGs over literal leaves) —
//! together with the constructions that translate between them:
//!
//! - exact L-ensemble probabilities, marginals (including negative evidence),
//!   and conditionals ([`dpp`]);
//! - circuit evaluation, marginals by leaf configuration, MAP, structural
//!   analysis (decomposability / smoothness / determinism), smoothing, and a
//!   plain-text file format ([`circuit`]);
//! - a division-free determinant circuit built from the clow-sequence dynamic
//!   program, symbolic-kernel compilation of any L-ensemble into a circuit,
//!   the uniform spanning-tree marginal kernel, rank-1-perturbation (R1P)
//!   circuits, and the √2 witness kernel with its closed-form minors
//!   ([`constructions`]);
//! - KL-divergence mixture fitting of R1P and fully-factorized mixtures
//!   against an exact target table, with deterministic restarts ([`learn`]);
//! - dense matrix primitives backing all of the above ([`linalg`]).
//!
//! The primary interface is the `examples/` directory — one runnable program
//! per capability:
//!
//! ```text
//! cargo run --example lensemble_probabilities   # L-ensemble basics
//! cargo run --example marginal_kernels          # K = L(L+I)^-1 and evidence queries
//! cargo run --example circuit_files             # build, save, load, analyze circuits
//! cargo run --example determinant_compilation   # division-free det circuits
//! cargo run --example spanning_trees            # uniform spanning-tree DPP
//! cargo run --example r1p_circuits              # rank-1-perturbation circuits
//! cargo run --example mixture_fit               # KL mixture fitting experiment
//! ```
//!
//! A thin command-line front end (`dppc`) exposes the same operations for
//! scripting; see [`cli`] or run `dppc --help`.
//!
//! # Conventions
//!
//! Variables and matrix indices are 0-based throughout the library. A subset
//! of the ground set and a binary assignment of n indicator variables are the
//! same thing ([`linalg::Subset`]); bit i of a mask corresponds to variable i.
//! The CLI accepts 1-based index lists and left-to-right bitstrings and
//! converts at the boundary.

pub mod circuit;
pub mod cli;
pub mod constructions;
pub mod dpp;
pub mod learn;
pub mod linalg;

use thiserror::Error;

/// Unified error type for every fallible operation in the crate.
///
/// Messages name the violated precondition so they can be surfaced verbatim
/// by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of the inputs do not line up (non-square matrix, wrong vector
    /// length, subset over a different ground set, ...).
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Cholesky factorization failed: the matrix is not positive definite
    /// within tolerance. `pivot` is the 0-based index of the failing pivot.
    #[error("matrix is not positive definite: pivot {pivot} is {value:e} (must exceed {tol:e})")]
    NotPositiveDefinite { pivot: usize, value: f64, tol: f64 },

    /// A conditional probability was requested but the conditioning minor is
    /// singular, so the conditional is undefined.
    #[error("singular conditional: {0}")]
    SingularConditional(String),

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An enumeration guard was exceeded (the operation is exponential in the
    /// guarded quantity).
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    /// A circuit lacks the structural property an operation requires.
    #[error("circuit structure: {0}")]
    Structure(String),

    /// A denominator is exactly zero (probability p = 1 in an odds ratio, a
    /// zero normalizing constant, ...).
    #[error("division by zero: {0}")]
    Division(String),

    /// KL(P || Q) is infinite: the model assigns zero probability to a point
    /// in the target's support.
    #[error("divergence is infinite: {0}")]
    DivergenceInfinite(String),

    /// Malformed text input. `line` is 1-based.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub use circuit::{Circuit, CircuitBuilder, LeafConfig, StructureReport};
pub use constructions::{R1PModel, SpanningTreeDPP};
pub use dpp::{LEnsemble, MarginalDPP};
pub use learn::{MixtureKind, MixtureModel, TargetTable, TrainConfig};
pub use linalg::{Matrix, Subset};
