use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unsupported dimension {dim} for {what}")]
    UnsupportedDimension { dim: usize, what: &'static str },

    #[error("node count {requested} below the minimum of {minimum}")]
    TooFewNodes { requested: usize, minimum: usize },

    #[error("node count {requested} exceeds the budget of {budget}")]
    NodeBudget { requested: usize, budget: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("alpha equals dimension ({dim})")]
    AlphaEqualsDimension { dim: usize },

    #[error("kernel mode {mode} is not available on a {kind} manifold")]
    KernelModeMismatch {
        mode: &'static str,
        kind: &'static str,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("object belongs to a different manifold")]
    ManifoldMismatch,

    #[error("density has a negative or non-finite entry at node {index}")]
    InvalidDensity { index: usize },

    #[error("density is identically zero")]
    ZeroDensity,

    #[error("density vanishes at node {index} but p = {p} < 1 requires strictly positive values")]
    NonPositiveDensity { index: usize, p: f64 },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("exponent relation violated: {0}")]
    ExponentRelation(String),

    #[error("node {index} is not covered by any cap")]
    UncoveredNode { index: usize },

    #[error("the optimizer result is not converged")]
    NotConverged,

    #[error("quadrature failed to reach tolerance ({estimate:e} ± {error:e})")]
    Quadrature { estimate: f64, error: f64 },
}
