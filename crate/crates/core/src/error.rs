use thiserror::Error;

/// Errors raised by the channel, rate, optimizer and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GavcError {
    /// A parameter violates a documented precondition or type invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The requested operating point lies outside the feasibility set.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Parameters at which the quantity is undefined (zero power, |rho| = 1, ...).
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// Bracketing, convergence or conditioning failure in a numerical routine.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// A key-size schedule that grows too fast for the randomized-code construction.
    #[error("invalid key-size schedule: {0}")]
    InvalidSchedule(String),

    /// Vector or matrix sizes that do not line up.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

impl GavcError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        GavcError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = GavcError> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(GavcError::param(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn ensure_nonneg(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value < 0.0 {
        return Err(GavcError::param(name, format!("must be >= 0, got {value}")));
    }
    Ok(())
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value <= 0.0 {
        return Err(GavcError::param(name, format!("must be > 0, got {value}")));
    }
    Ok(())
}
