use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    /// An iterative or series method ran out of budget before meeting its tolerance.
    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The implicit step matrix could not be inverted; the grid is too coarse for the coefficient.
    #[error("singular step system at node ({row}, {col}); refine the grid")]
    SingularSystem { row: usize, col: usize },

    /// A problem or history description is incomplete or inconsistent.
    #[error("invalid problem: {0}")]
    Spec(String),

    /// A method was called on a problem it does not apply to.
    #[error("method precondition violated: {0}")]
    Precondition(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn grid(msg: impl Into<String>) -> Self {
        Error::GridMismatch(msg.into())
    }

    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }

    /// True for failures caused by the numerics rather than by the inputs' shape.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_) | Error::NonConvergence { .. } | Error::SingularSystem { .. }
        )
    }
}
