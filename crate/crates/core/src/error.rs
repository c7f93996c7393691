use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    /// A grid or cylinder description violates one of its invariants.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A physics or algorithm parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A point or sub-cylinder lies outside the domain it was evaluated on.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// Two fields (or a field and a problem) live on incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The adaptive CFL control exhausted its step-halving budget.
    #[error("CFL retry limit exceeded at node {node} (x = {x:?}, t = {t}), realized gradient {gradient}")]
    CflExhausted {
        node: usize,
        x: Vec<f64>,
        t: f64,
        gradient: f64,
    },

    /// A non-finite value appeared during time marching.
    #[error("blow-up detected at ({x:?}, {t})")]
    BlowUp { x: Vec<f64>, t: f64 },

    /// A verification precondition on the input data failed.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Malformed configuration or file contents.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Numerical failures map to a distinct process exit status.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LabError::CflExhausted { .. } | LabError::BlowUp { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
