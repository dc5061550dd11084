use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors are split into rejected inputs and numerical failures so callers
/// can triage them differently.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid loading vector: {0}")]
    InvalidLoading(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("could not bracket the root of the {equation} equation (target {target}) within {expansions} doublings")]
    BracketFailed {
        equation: &'static str,
        target: f64,
        expansions: u32,
    },
    #[error(
        "root search did not reach tolerance after {iterations} iterations (residual {residual:e})"
    )]
    NotConverged { iterations: u32, residual: f64 },
    #[error("non-finite objective value at {at}")]
    NonFinite { at: f64 },
}

impl Error {
    /// True for failures of the numerics, as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BracketFailed { .. } | Error::NotConverged { .. } | Error::NonFinite { .. }
        )
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
