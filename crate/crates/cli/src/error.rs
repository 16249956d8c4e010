use thiserror::Error;

use cstab_core::Error as CoreError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_NOT_CERTIFIED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => EXIT_CONFIG,
            CliError::Core(
                CoreError::InvalidProblem(_)
                | CoreError::InvalidGrid(_)
                | CoreError::ConstantCase(_)
                | CoreError::SizeCap { .. },
            ) => EXIT_CONFIG,
            CliError::Core(_) => EXIT_NUMERICAL,
        }
    }
}
