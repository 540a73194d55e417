use thiserror::Error;

/// Errors raised by bound evaluation, solvers and simulations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("variant {variant} requires alpha {required}, got alpha = {alpha}")]
    VariantSign {
        variant: &'static str,
        required: &'static str,
        alpha: f64,
    },

    #[error("inconsistent curvature data: lambda + K = {sum} < 0 (lambda = {lambda}, K = {k})")]
    NegativeShift { lambda: f64, k: f64, sum: f64 },

    #[error("domain has no boundary")]
    EmptyBoundary,

    #[error("operation not supported on this domain: {0}")]
    UnsupportedDomain(String),

    #[error("requested {requested} modes but the grid supports at most {max}")]
    TooManyModes { requested: usize, max: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors that come from bad user input rather than from numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidArgument { .. }
                | Error::VariantSign { .. }
                | Error::EmptyBoundary
                | Error::UnsupportedDomain(_)
                | Error::TooManyModes { .. }
        )
    }

    /// Process exit code: 2 for usage errors, 3 for numerical or curvature-data failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_usage() {
            2
        } else {
            3
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {value}")))
    }
}
