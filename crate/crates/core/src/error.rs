use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes or grids of two operands disagree.
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// An input violates a documented invariant or precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A basis that should be orthonormal is not.
    #[error("basis not orthonormal: worst pair ({i}, {j}) deviates from δ by {deviation:.3e}")]
    NotOrthonormal { i: usize, j: usize, deviation: f64 },

    #[error("numerical failure in {context}: {detail}")]
    Numeric { context: &'static str, detail: String },

    #[error(
        "eigensolver did not converge for eigenpair {index} after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence {
        index: usize,
        iterations: usize,
        residual: f64,
    },

    /// The retained eigenbasis misses part of the kernel.
    #[error("eigenbasis truncation: captured weight {captured:.12} (deficit {deficit:.3e})")]
    Truncation { captured: f64, deficit: f64 },

    #[error("level {level} has zero probability ({probability:.3e})")]
    ZeroProbability { level: usize, probability: f64 },

    #[error("phase fit residual {residual:.3e} rad exceeds {threshold:.1e} for pair ({n}, {m})")]
    PhaseFit {
        n: usize,
        m: usize,
        residual: f64,
        threshold: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn numeric(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Numeric {
            context,
            detail: detail.into(),
        }
    }

    /// True for errors produced by numerics rather than by bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric { .. }
                | Error::NoConvergence { .. }
                | Error::PhaseFit { .. }
                | Error::Truncation { .. }
                | Error::ZeroProbability { .. }
        )
    }
}
