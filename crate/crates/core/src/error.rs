//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by the command line for exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input: bad syntax, unknown names, schema violations.
    Input,
    /// A mathematical precondition does not hold.
    Math,
    /// A numerical procedure did not converge.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown coordinate or name `{0}`")]
    UnknownCoordinate(String),
    #[error("jet order {order} exceeds the cap {cap}")]
    JetOrderExceeded { order: usize, cap: usize },
    #[error("invalid jet space: {0}")]
    InvalidSpace(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integrand is not polynomial in the homotopy parameter")]
    NonPolynomialInT,
    #[error("equality undecidable at sampled points")]
    Undecidable,
    #[error("quadrature did not converge: last estimate {value} with error {error}")]
    QuadratureNonConvergence { value: f64, error: f64 },
    #[error("degree {degree} form is not supported here (base dimension {n})")]
    UnsupportedDegree { degree: usize, n: usize },
    #[error("Lagrangian order {0} is not supported (momentum formulas exist through order 2)")]
    UnsupportedOrder(usize),
    #[error("source form fails the Helmholtz conditions")]
    HelmholtzFailed,
    #[error("form is not variationally trivial")]
    NotVariationallyTrivial,
    #[error("vector field is not projectable: {0}")]
    NotProjectable(String),
    #[error("missing overlap data for charts {0} and {1}")]
    MissingOverlap(String, String),
    #[error("unknown chart `{0}`")]
    UnknownChart(String),
    #[error("transition maps violate the cocycle condition on {0}")]
    CocycleViolation(String),
    #[error("transition {0} is not fibered")]
    NotFibered(String),
    #[error("vector field is inconsistent across the overlap {0}")]
    InconsistentField(String),
    #[error("source form is inconsistent across the overlap {0}")]
    InconsistentSource(String),
    #[error("no closed representative available: {0}")]
    NoRepresentative(String),
    #[error("cycle `{0}` is not closed: {1}")]
    CycleNotClosed(String, String),
    #[error("section `{0}` is not global: {1}")]
    SectionNotGlobal(String, String),
    #[error("section `{0}` is incompatible across charts: {1}")]
    SectionChartIncompatibility(String, String),
    #[error("integrator failure: {0}")]
    Integrator(String),
    #[error("unsupported input for this check: {0}")]
    Unsupported(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Syntax { .. } | UnknownCoordinate(_) | InvalidSpace(_) | UnknownChart(_) | Schema(_)
            | Io(_) | Json(_) | JetOrderExceeded { .. } | UnsupportedOrder(_) => ErrorKind::Input,
            QuadratureNonConvergence { .. } | Integrator(_) | Undecidable => ErrorKind::Numerical,
            _ => ErrorKind::Math,
        }
    }
}
