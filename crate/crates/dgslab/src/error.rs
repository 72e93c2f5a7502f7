use dgslab_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 for bad input, 3 when a sampler gives up, 4 at the dimension cap, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::IterationCap { .. } => 3,
                Error::DimensionCap { .. } => 4,
                Error::DimensionMismatch { .. }
                | Error::SingularBasis
                | Error::NotPrime(_)
                | Error::NoPrimeInInterval { .. }
                | Error::InvalidParameter(_) => 2,
                _ => 1,
            },
        }
    }
}
