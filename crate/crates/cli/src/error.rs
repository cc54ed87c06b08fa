use std::fmt;

/// A command failure together with the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input, with the 1-based line it was found on.
    Parse {
        line: usize,
        message: String,
    },
    /// Bad flag values or an unreadable input.
    Usage(String),
    Domain(String),
    Unsupported(String),
    Numeric(String),
    /// One or more verification criteria failed.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Unsupported(_) => 4,
            CliError::Numeric(_) => 5,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { line, message } => write!(f, "line {line}: {message}"),
            CliError::Usage(m)
            | CliError::Domain(m)
            | CliError::Unsupported(m)
            | CliError::Numeric(m) => f.write_str(m),
            CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

fn count_word(n: usize) -> String {
    match n {
        1 => "one".into(),
        2 => "two".into(),
        3 => "three".into(),
        _ => n.to_string(),
    }
}

impl From<asymkde::Error> for CliError {
    fn from(e: asymkde::Error) -> Self {
        use asymkde::Error as E;
        match e {
            E::InsufficientSamples { needed, got } => CliError::Domain(format!(
                "need at least {} samples, got {got}",
                count_word(needed)
            )),
            E::Domain(_) | E::InvalidArgument(_) => CliError::Domain(e.to_string()),
            E::UnsupportedAsymptotics { .. } => {
                CliError::Unsupported(format!("{e}: the method is not applicable to this kernel"))
            }
            E::NonConvergence(_) | E::Numeric(_) | E::MonotonicityViolation { .. } => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
