use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An integral exhausted its subdivision budget before meeting its tolerance.
    #[error("{integral} did not converge: estimated error {error:.3e} after {subdivisions} subdivisions")]
    NonConvergence {
        integral: String,
        error: f64,
        subdivisions: usize,
    },

    #[error("tolerance not met in {what}: successive refinements differ by {difference:.3e} (tolerance {tolerance:.3e})")]
    ToleranceNotMet {
        what: String,
        difference: f64,
        tolerance: f64,
    },

    /// A tabulated ccdf increased by more than the permitted numerical ripple.
    #[error("ccdf ripple of {amplitude:.3e} in {what} exceeds {limit:.1e}")]
    Ripple {
        what: String,
        amplitude: f64,
        limit: f64,
    },

    #[error("curve supports do not overlap: [{a_lo}, {a_hi}] vs [{b_lo}, {b_hi}]")]
    NoOverlap {
        a_lo: f64,
        a_hi: f64,
        b_lo: f64,
        b_hi: f64,
    },

    #[error("unknown ccdf method `{0}`")]
    UnknownMethod(String),
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }

    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::ToleranceNotMet { .. } | Error::Ripple { .. }
        )
    }
}
