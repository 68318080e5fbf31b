use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] qfim_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        use qfim_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(
                E::InvalidArgument(_)
                | E::SizeMismatch { .. }
                | E::OddDimension { .. }
                | E::NonFinite { .. }
                | E::BadMixingWeight(_)
                | E::BlochOverflow(_)
                | E::NotSymmetric { .. },
            ) => 2,
            CliError::Core(_) => 3,
        }
    }
}
