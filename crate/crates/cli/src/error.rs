use std::fmt;

/// Outcome classes mapped to process exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration or arguments (exit 2).
    Schema(String),
    /// Anything else that prevented a run (exit 1).
    Runtime(String),
}

impl Failure {
    pub fn schema(field: &str, err: impl fmt::Display) -> Self {
        Self::Schema(format!("{field}: {err}"))
    }

    pub fn runtime(err: impl fmt::Display) -> Self {
        Self::Runtime(err.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Schema(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Schema(m) => write!(f, "invalid configuration: {m}"),
            Self::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}
