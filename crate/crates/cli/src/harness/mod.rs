//! Simulated sessions, clustering metrics, and latency measurement.

mod bench;
mod metrics;
pub mod scenario;
mod simulate;
mod user;

use thiserror::Error;

pub use bench::{bench, BenchRow, BENCH_TOUCHED};
pub use metrics::{adjusted_rand_index, kmeans};
pub use simulate::{class_indices, diligent_commit, layout_ari, simulate, RefinementRecord, RunReport};
pub use user::{SimulatedUser, Strategy};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Engine(#[from] activecanvas_core::Error),
    #[error("item `{0}` has no label")]
    MissingLabel(String),
    #[error("invalid simulated user: {0}")]
    InvalidUser(String),
    #[error("dataset is empty")]
    EmptyDataset,
}
