use hodge_core::HodgeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] HodgeError),
    #[error("cache: {0}")]
    Cache(String),
}

impl CliError {
    /// 2 for bad input, 1 for everything that went wrong after the input was accepted.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(HodgeError::InvalidArgument(_) | HodgeError::Parse { .. }) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(HodgeError::InvalidArgument("g".into())).exit_code(), 2);
        assert_eq!(CliError::Core(HodgeError::Verification("v".into())).exit_code(), 1);
        assert_eq!(CliError::Cache("io".into()).exit_code(), 1);
    }
}
