use thiserror::Error;

/// Errors raised by the sampling-plan library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` must be {expected}, got {value}")]
    Domain {
        name: &'static str,
        expected: &'static str,
        value: f64,
    },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("{model} fit did not converge: {reason}")]
    NonConvergent { model: &'static str, reason: String },

    #[error("invalid ratio grid: {0}")]
    InvalidGrid(String),

    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            expected: "a finite positive number",
            value,
        })
    }
}

pub(crate) fn open_unit(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            expected: "in the open interval (0, 1)",
            value,
        })
    }
}

pub(crate) fn closed_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            expected: "in the closed interval [0, 1]",
            value,
        })
    }
}
