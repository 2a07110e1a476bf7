use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Engine(#[from] wevo::WeError),
    #[error(transparent)]
    Data(#[from] wevo_nn::data::DataError),
    #[error(transparent)]
    Checkpoint(#[from] wevo_nn::checkpoint::CheckpointError),
    #[error("plot: {0}")]
    Plot(String),
    #[error("nothing to plot or report")]
    EmptyResultSet,
}

impl HarnessError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
