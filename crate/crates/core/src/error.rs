use thiserror::Error;

/// Errors shared by every analysis module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violates the precondition of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or series budget was exhausted before reaching tolerance.
    #[error("no convergence in {routine}: error estimate {error_estimate:e} above tolerance {tolerance:e} after {evaluations} evaluations")]
    NonConvergence {
        routine: &'static str,
        error_estimate: f64,
        tolerance: f64,
        evaluations: usize,
    },

    /// The integrand or target function produced NaN or infinity.
    #[error("non-finite value {value} at x = {x}")]
    Evaluation { x: f64, value: f64 },

    /// The root bracket does not straddle a sign change.
    #[error("bad bracket [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    BadBracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    /// A solved point failed its post-hoc residual check.
    #[error("residual {residual:e} exceeds tolerance {tolerance:e}")]
    ToleranceNotMet { residual: f64, tolerance: f64 },

    #[error("gap table needs at least 2 lattice points, got {0}")]
    TooFewPoints(usize),

    #[error("only {found} envelope maxima in the fitting window, need at least {required}")]
    InsufficientEnvelope { found: usize, required: usize },

    /// A lattice sum would need more terms than the configured cap.
    #[error("lattice sum needs {required} terms, cap is {cap}")]
    TermCap { required: f64, cap: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by exhausting a numerical budget rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::Evaluation { .. }
                | Error::ToleranceNotMet { .. }
                | Error::InsufficientEnvelope { .. }
                | Error::TermCap { .. }
                | Error::BadBracket { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
