use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Engine(#[from] activecanvas_core::Error),
    #[error("dataset not found: {0}")]
    NotFound(String),
    #[error("config {path}: {detail}")]
    Config { path: PathBuf, detail: String },
    #[error("background task failed: {0}")]
    Join(#[from] tokio::task::JoinError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
