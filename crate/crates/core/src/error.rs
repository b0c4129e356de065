use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dataset layout error: {0}")]
    Layout(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image decode error at {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("checkpoint error at {path}: {msg}")]
    Checkpoint { path: PathBuf, msg: String },

    #[error("pretrained weights unavailable for {backbone}: {msg}")]
    WeightsUnavailable { backbone: String, msg: String },

    #[error("training diverged at epoch {epoch}: {msg}")]
    TrainingDiverged { epoch: usize, msg: String },

    #[error("attribution error: {0}")]
    Attribution(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
