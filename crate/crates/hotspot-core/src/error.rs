//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by model validation, solvers, and diagnostics.
#[derive(Debug, Error)]
pub enum CoreError {
    /// One or more model-parameter invariants are violated.
    #[error("invalid parameters: {}", violations.join("; "))]
    InvalidParams { violations: Vec<String> },

    /// A field that must stay positive reached zero or below.
    #[error("{name} non-positive at x={x}: value {value}")]
    NonPositiveField { name: &'static str, x: f64, value: f64 },

    /// An operation defined only for constant coefficients received
    /// spatially varying ones.
    #[error("operation requires constant A0 and gamma, got varying {field}")]
    AnisotropicInput { field: &'static str },

    /// Spike positions too close to each other or to the boundary.
    #[error("spike separation violated: {detail}")]
    SeparationViolated { detail: String },

    /// The grid does not resolve the spike width.
    #[error("grid too coarse: h={h} exceeds epsilon/8={limit}")]
    GridTooCoarse { h: f64, limit: f64 },

    /// A linear system could not be factorized.
    #[error("singular linear system: {detail}")]
    SingularSystem { detail: String },

    /// Newton Jacobian numerically singular, which for asymmetric
    /// two-spike seeds signals a violated nondegeneracy condition.
    #[error("Jacobian effectively singular (condition estimate {cond_estimate:.3e}); \
             check the nondegeneracy conditions of the spike pattern")]
    JacobianSingular { cond_estimate: f64 },

    /// Time step shrank below representable size while rejecting
    /// positivity violations.
    #[error("time step underflow at node {node} (x={x}): repeated positivity rejections")]
    DtUnderflow { node: usize, x: f64 },

    /// Solution blow-up during time integration.
    #[error("solution diverged: max node value {max_value:.3e} exceeds 1e12 at t={t}")]
    Diverged { max_value: f64, t: f64 },

    /// Two formulas that must agree disagreed beyond tolerance.
    #[error("internal consistency failure in {what}: |{lhs} - {rhs}| relative {rel:.3e} > {tol:.1e}")]
    Inconsistency {
        what: &'static str,
        lhs: f64,
        rhs: f64,
        rel: f64,
        tol: f64,
    },

    /// Mismatched array length against the grid.
    #[error("expected {expected} per-node values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, CoreError>;
