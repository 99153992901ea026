use thiserror::Error;

/// Failure categories, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] tfim_wannier::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(tfim_wannier::Error::InvalidArgument(_)) => "invalid-argument",
            CliError::Core(tfim_wannier::Error::Capability(_)) => "capability",
            CliError::Core(tfim_wannier::Error::Consistency(_)) => "consistency",
            CliError::Core(tfim_wannier::Error::DegenerateChannel { .. }) => "degenerate-channel",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 2,
            "invalid-argument" => 3,
            "capability" => 4,
            "consistency" => 5,
            "degenerate-channel" => 6,
            _ => 7,
        }
    }
}
