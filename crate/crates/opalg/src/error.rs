use thiserror::Error;

/// Errors surfaced by the library. Variant names mirror the failure modes of
/// the individual operations; `NumericalFailure` is the catch-all for rank
/// ambiguity and non-converging solves.
#[derive(Debug, Error)]
pub enum Error {
    #[error("weight sum deviates from 1: {0}")]
    WeightSum(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("element is not self-adjoint (residual {0:.3e})")]
    NotSelfAdjoint(f64),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("subspace is not a right Q-module (residual {0:.3e})")]
    NotAModule(f64),
    #[error("identification map is not a trace-preserving *-isomorphism: {0}")]
    Identification(String),
    #[error("generator map is not a *-automorphism: {0}")]
    NotAutomorphism(String),
    #[error("generator map is not trace-preserving (residual {0:.3e})")]
    NotTracePreserving(f64),
    #[error("group relation violated: {0}")]
    RelationViolated(String),
    #[error("subalgebra is not invariant under the action (residual {0:.3e})")]
    SubalgebraNotInvariant(f64),
    #[error("system is not ergodic (fixed algebra dimension {0})")]
    NotErgodic(usize),
    #[error("group is not of a countable abelian kind")]
    NotAbelian,
    #[error("dimension budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("Gram matrix positivity violation (eigenvalue {0:.3e})")]
    PositivityViolation(f64),
    #[error("invalid face: {0}")]
    Face(String),
    #[error("Q is not contained in the center: {0}")]
    NotCentral(String),
    #[error("complete positivity check failed (Choi eigenvalue {0:.3e})")]
    CpViolation(f64),
    #[error("iteration limit reached: {0}")]
    IterationLimit(String),
    #[error("probe set F is empty")]
    EmptyF,
    #[error("subspace failed algebra verification: {0}")]
    NotAnAlgebra(String),
    #[error("zero or negative mass: {0}")]
    Mass(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown command: {0}")]
    UnknownCommand(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
