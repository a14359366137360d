use std::path::PathBuf;

use crate::fp::ComponentKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid component {kind}: det={det}, records={records} (both must be >= 1)")]
    InvalidComponent {
        kind: ComponentKind,
        det: f64,
        records: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("singular design: all size values are identical")]
    SingularDesign,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("project {id} has zero UFP under the current weights")]
    DegenerateProject { id: String },

    #[error("project {id} has no normalized effort")]
    MissingEffort { id: String },

    #[error("no fuzzy rule fired for {kind} at det={det}, records={records}")]
    Coverage {
        kind: ComponentKind,
        det: f64,
        records: f64,
    },

    #[error(
        "calibration diverged: loss rose for {epochs} consecutive epochs \
         (epoch {epoch}, loss {loss:.6e}); lower the learning rate (currently {learning_rate})"
    )]
    Divergence {
        epochs: usize,
        epoch: usize,
        loss: f64,
        learning_rate: f64,
    },

    #[error("improvement is undefined when the original MMRE is zero")]
    UndefinedImprovement,

    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
