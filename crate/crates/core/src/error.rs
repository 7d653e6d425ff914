use thiserror::Error;

/// Errors raised by the link, repeater and key-rate models and by scenario loading.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The satellite is at or below the local horizon of the ground point.
    #[error("satellite below horizon at ground arc {arc_km} km (altitude {altitude_km} km)")]
    BelowHorizon { arc_km: f64, altitude_km: f64 },

    #[error("elevation angle {0} rad is outside (0, pi/2]")]
    InvalidElevation(f64),

    /// A closed-form time diverges because one of its factors is zero.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown figure `{0}`")]
    UnknownFigure(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the `qlink` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } => 2,
            Error::Parse { .. } => 3,
            Error::UnknownPreset(_) | Error::UnknownFigure(_) => 4,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(key: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::validation(key, format!("{value} must lie in [0, 1]")))
    }
}

pub(crate) fn check_positive(key: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(key, format!("{value} must be > 0")))
    }
}

pub(crate) fn check_non_negative(key: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(key, format!("{value} must be >= 0")))
    }
}
