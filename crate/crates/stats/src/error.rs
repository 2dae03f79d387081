use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("table needs at least 2 non-empty rows and 2 non-empty columns, got {rows}x{cols}")]
    TooFewLevels { rows: usize, cols: usize },
    #[error("{axis} '{label}' has a zero marginal sum")]
    ZeroMargin { axis: &'static str, label: String },
    #[error("ragged table: row {row} has {got} cells, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("label count mismatch: {labels} labels for {cells} {axis}")]
    LabelMismatch { axis: &'static str, labels: usize, cells: usize },
    #[error("paired samples differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("paired samples are keyed by different units: {0}")]
    KeyMismatch(String),
    #[error("need at least 2 paired observations, got {0}")]
    TooFewSamples(usize),
    #[error("all paired differences are identical (zero variance)")]
    DegenerateSample,
    #[error("level '{0}' has no observations")]
    EmptyLevel(String),
    #[error("no observations")]
    Empty,
}
