use std::fmt;

/// A failure carrying the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_OUTPUT: i32 = 4;

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn output(message: impl Into<String>) -> Self {
        CliError { code: EXIT_OUTPUT, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Core errors raised while planning are configuration problems, except
/// for empty or malformed geometry which comes from the input.
impl From<cppdip_core::Error> for CliError {
    fn from(e: cppdip_core::Error) -> Self {
        use cppdip_core::Error as E;
        match e {
            E::EmptyInput(_) | E::TooFewPoints { .. } | E::DegenerateAngle => CliError::input(e.to_string()),
            E::InvalidParams(_) | E::Infeasible(_) => CliError::config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
