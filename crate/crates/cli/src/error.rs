use std::fmt;

use leeway::coverage::CoverageError;
use leeway::displacement::FitError;
use leeway::forcefield::FieldError;
use leeway::geo::GeoError;
use leeway::io::IoError;
use leeway::metrics::MetricsError;
use leeway::scenario::ScenarioError;
use leeway::vessel::SimError;

pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Failure reported as `error[code]: message` on stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("usage", message)
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new("invalid", message)
    }

    pub fn exit_code(&self) -> u8 {
        if self.code == "usage" {
            EXIT_USAGE
        } else {
            EXIT_DOMAIN
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.code, self.message)
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Io { .. } => "io",
            IoError::Parse { .. } => "parse",
            IoError::Invalid { .. } => "invalid",
        };
        Self::new(code, e.to_string())
    }
}

macro_rules! domain_error {
    ($($ty:ty => $code:literal),* $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                Self::new($code, e.to_string())
            }
        })*
    };
}

domain_error! {
    CoverageError => "plan",
    FitError => "fit",
    FieldError => "field",
    GeoError => "geo",
    MetricsError => "metrics",
    ScenarioError => "scenario",
    SimError => "sim",
}
