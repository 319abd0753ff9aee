use thiserror::Error;

/// Errors raised by state construction, statistics and the series/basis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("{what} needs {required} modes, above the cap of {cap}")]
    ModeCapExceeded {
        what: &'static str,
        required: u64,
        cap: usize,
    },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("projection annihilates the state")]
    DegenerateProjection,

    #[error("regularized series did not converge: {0}")]
    Convergence(String),
}

impl PhaseError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        PhaseError::InvalidInput(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            PhaseError::InvalidInput(_) | PhaseError::Unsupported(_) | PhaseError::DegenerateProjection => 2,
            PhaseError::ModeCapExceeded { .. } | PhaseError::Resolution(_) | PhaseError::Convergence(_) => 3,
        }
    }
}

pub type Result<T, E = PhaseError> = std::result::Result<T, E>;
