use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("input has length {got}, network expects {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("weights contain a non-finite entry")]
    NonFiniteWeight,
    #[error("empty batch")]
    EmptyBatch,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("optimizer state does not match gradient shapes")]
    ShapeMismatch,
    #[error("run with seed {seed} diverged at epoch {epoch}: loss {loss}")]
    Diverged { seed: u64, epoch: usize, loss: f64 },
    #[error("all {restarts} restarts diverged; last: {last}")]
    AllRestartsDiverged { restarts: usize, last: Box<TrainError> },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevelSetError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("level set is unbounded along {direction:?}: f = {value:e}")]
    DegenerateDirection { direction: Vec<f64>, value: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    LevelSet(#[from] LevelSetError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("only {found} vertices detected; the curve is not polygonal (p != 1 or undertrained)")]
    NotPolygonal { found: usize },
    #[error("{clusters} normal clusters from {samples} samples; the surface is not polyhedral")]
    NotPolyhedral { clusters: usize, samples: usize },
    #[error("Euler characteristic V - E + F = {v} - {e} + {f} != 2")]
    EulerViolation { v: usize, e: usize, f: usize },
    #[error("catalog entries {0} and {1} share a signature")]
    AmbiguousMatch(String, String),
    #[error("origin is not strictly inside the polytope")]
    OriginNotInterior,
    #[error("direction sets differ; resample both bodies on common directions")]
    DirectionMismatch,
    #[error("weight row {0} has zero norm")]
    ZeroWeightRow(usize),
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("unsupported model format_version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("precondition failed: {0}")]
    Precondition(String),
}
