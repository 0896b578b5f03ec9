use thiserror::Error;

/// Process exit codes.
pub mod code {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const VERIFICATION: i32 = 3;
    pub const HYPOTHESIS: i32 = 4;
    pub const INCONSISTENT: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed TOML or expression text.
    #[error("{0}")]
    Parse(String),

    /// Well-formed input that does not describe a valid problem.
    #[error("{0}")]
    Spec(String),

    #[error(transparent)]
    Core(#[from] abscvx::Error),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use abscvx::Error as E;
        match self {
            CliError::Parse(_) | CliError::Spec(_) => code::INPUT,
            CliError::Io(_) => code::IO,
            CliError::Core(e) => match e {
                E::VerificationFailed(_) | E::NoContact { .. } => code::VERIFICATION,
                E::Hypothesis(_) => code::HYPOTHESIS,
                E::Inconsistent(_) => code::INCONSISTENT,
                _ => code::INPUT,
            },
        }
    }
}
