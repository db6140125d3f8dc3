use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] swag_core::Error),

    /// A flag or manifest the library never sees was unusable.
    #[error("{0}")]
    Input(String),
}

impl CliError {
    /// 2 for bad input, 1 for failures during a run.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Core(e) if !e.is_input_error() => ExitCode::from(1),
            _ => ExitCode::from(2),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
