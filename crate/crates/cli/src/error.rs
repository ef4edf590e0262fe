use std::fmt;
use std::path::Path;

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Inconsistent or invalid flags (exit 2).
    Usage(String),
    /// Unreadable, malformed or invalid input data (exit 2).
    Input(eitest_core::Error),
    /// Anything else, e.g. failing to write results (exit 1).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    pub fn write_failed(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Internal(format!("cannot write {}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Input(err) => write!(f, "{}: {err}", error_kind(err)),
            CliError::Internal(msg) => write!(f, "internal: {msg}"),
        }
    }
}

impl From<eitest_core::Error> for CliError {
    fn from(err: eitest_core::Error) -> Self {
        CliError::Input(err)
    }
}

/// Variant name of a library error, so messages can be matched by scripts.
fn error_kind(err: &eitest_core::Error) -> String {
    let debug = format!("{err:?}");
    debug
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_string()
}
