//! Structured sparse regression through the variational penalty
//! `Γ(β, λ) = ½ Σᵢ (βᵢ²/λᵢ + λᵢ)` with `λ` restricted to
//! `Λ = {λ ≥ 0 : Aλ ∈ S}`.
//!
//! * [`sets`]: edge maps `A`, simple sets `S` and their projections.
//! * [`prox`]: the prox of `ρΓ` via a Picard–Opial fixed-point iteration.
//! * [`solver`]: accelerated outer loop and a Lasso baseline.
//! * [`experiments`]: synthetic benchmarks, model selection and CSV output.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod experiments;
pub mod par;
pub mod prox;
pub mod sets;
pub mod solver;

pub use error::{Error, Result};
pub use par::Execution;
pub use prox::{prox_gamma, FixedPointSettings, ProxOutput, ProxProblem};
pub use sets::{ConstraintDescription, ConstraintSet, EdgeMap, SimpleSet};
pub use solver::{lasso_fista, nepio_solve, RegressionProblem, SolveOutput, SolverConfig};

/// Version tag written into every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

pub(crate) fn schema_version() -> u32 {
    SCHEMA_VERSION
}
