use thiserror::Error;

/// Errors surfaced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate exponent p = {0}: p must lie in (1, inf) with p != 2 here")]
    DegenerateExponent(f64),

    #[error("zero vector has no defined gradient density")]
    ZeroVector,

    #[error("dimension {dim} unsupported: {reason}")]
    UnsupportedDimension { dim: usize, reason: String },

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("grid under-resolved: {0}")]
    UnderResolved(String),

    #[error("lambda = {lambda} too large for box size N = {n} (need lambda <= {limit})")]
    LambdaTooLarge { lambda: f64, n: f64, limit: f64 },

    #[error("quadrature radius {quad} does not match lambda {lambda}")]
    MismatchedRadius { quad: f64, lambda: f64 },

    #[error("sequence is not lacunary at index {index}: {next} < 2 * {prev}")]
    NonLacunary { index: usize, prev: f64, next: f64 },

    #[error("box side {ell} does not divide {n}")]
    NonDividing { ell: f64, n: f64 },

    #[error("admissible region is empty: {0}")]
    EmptyRegion(String),

    #[error("fit degenerate: {0}")]
    DegenerateFit(String),

    #[error("point lies on the singular subspace (distance {0:e})")]
    OnSingularSubspace(f64),

    #[error("inadmissible point: {0}")]
    Inadmissible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
