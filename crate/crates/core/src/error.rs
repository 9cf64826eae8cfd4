use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not positive definite (jitter cap {cap:e} exceeded)")]
    NotPositiveDefinite { cap: f64 },

    #[error("all {restarts} optimizer restarts failed")]
    AllRestartsFailed { restarts: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("level {level} input row {row} has no counterpart at level {lower}")]
    NotNested { level: usize, row: usize, lower: usize },

    #[error("fidelity levels must be indexed 1..=L in order; found index {found} at position {position}")]
    LevelOrder { position: usize, found: usize },

    #[error("model kind mismatch: expected {expected}, got {got}")]
    KindMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("non-numeric cell at row {row}, column `{column}`: {value:?}")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("empty file")]
    EmptyFile,

    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),

    #[error("unknown fidelity label `{label}` at row {row}")]
    UnknownFidelityLabel { row: usize, label: String },

    #[error("normalization reference subset is empty")]
    EmptyReference,

    #[error("N_t = {n_t} out of range for {n_high} high-fidelity rows")]
    TrainSizeOutOfRange { n_t: usize, n_high: usize },

    #[error("need at least {needed} high-fidelity rows, found {found}")]
    TooFewRows { needed: usize, found: usize },

    #[error("k = {k} out of range (max {max})")]
    ComponentsOutOfRange { k: usize, max: usize },

    #[error("unknown synthetic task `{0}`")]
    UnknownTask(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported model document: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for numerical failures (factorization, optimization) as opposed to
    /// configuration or input problems.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::AllRestartsFailed { .. }
                | Error::NonFinite(_)
        )
    }
}
