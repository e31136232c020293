use levy_dividend::model::ConfigError;
use levy_dividend::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad model file or bad flags.
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Math(Error),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Math(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidModel(_) | Error::InvalidArgument(_) | Error::UnknownCatalog(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Math(other),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}
