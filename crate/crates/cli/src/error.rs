use stochastic_ce::Error;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Capability(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Capability(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Capability(m) => write!(f, "capability error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(m) | Error::Config(m) => CliError::Config(m),
            Error::Parse { .. } | Error::Json(_) => CliError::Config(e.to_string()),
            Error::Capability(m) => CliError::Capability(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}
