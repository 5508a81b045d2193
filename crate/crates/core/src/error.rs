use thiserror::Error;

/// Failure of a single discretization step.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StepError {
    #[error("state became non-finite")]
    NonFinite,
    #[error("Newton iteration did not converge (last residual {residual:e})")]
    NewtonStalled { residual: f64 },
    #[error("Newton matrix is singular")]
    Singular,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A simulation step failed. `step` is the index of the state that could
    /// not be produced.
    #[error("step {step} failed: {kind}")]
    Step { step: usize, kind: StepError },

    #[error("no connected graph found after {attempts} attempts")]
    GraphGeneration { attempts: usize },

    #[error("{count} selections exceed the exhaustive enumeration cap of {cap}; use random sampling")]
    CombinatorialCap { count: u128, cap: u128 },

    #[error("infeasible budget: {0}")]
    InfeasibleBudget(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
