use thiserror::Error;

/// Errors raised by the simulator and analytics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric argument was outside its legal range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A configuration was structurally unusable (empty schedule, unknown key, ...).
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks `0 <= value < 1`.
pub(crate) fn check_unit_open(name: &'static str, value: f64) -> Result<()> {
    if (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{value} not in [0, 1)")))
    }
}

/// Checks `0 <= value <= 1`.
pub(crate) fn check_unit_closed(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{value} not in [0, 1]")))
    }
}

/// Checks `0 < value < 1`.
pub(crate) fn check_unit_exclusive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("{value} not in (0, 1)")))
    }
}
