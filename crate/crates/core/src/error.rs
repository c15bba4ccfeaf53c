use thiserror::Error;

/// Errors raised by the pricing engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of its subdivision budget before meeting
    /// the requested tolerance.
    #[error("quadrature budget exceeded: estimate {estimate:e} with error {error:e} after {intervals} intervals")]
    QuadratureBudget {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    /// A truncated series left more probability mass than allowed.
    #[error("truncation tail mass {tail_mass:e} exceeds tolerance {tolerance:e}; raise n_max")]
    Truncation { tail_mass: f64, tolerance: f64 },

    /// The survival function at the current age underflowed, so the
    /// conditional law given that age is undefined in floating point.
    #[error("degenerate age {age}: survival probability underflows")]
    DegenerateAge { age: f64 },
}

impl Error {
    /// True for failures of a numerical budget (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Domain(_))
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
