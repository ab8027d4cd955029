use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("validation error: {0}")]
    Validation(String),

    /// The survival branch of a measurement carries too little probability to
    /// renormalize. `click_prob` is still meaningful so callers can prune.
    #[error("degenerate branch: survival probability {survive_prob:e} is below the pruning floor")]
    DegenerateBranch { survive_prob: f64, click_prob: f64 },

    #[error("degenerate input: vector norm {norm:e} is too small to normalize")]
    DegenerateInput { norm: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl LabError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        LabError::Validation(msg.into())
    }

    /// True for failures caused by numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LabError::DegenerateBranch { .. } | LabError::DegenerateInput { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
