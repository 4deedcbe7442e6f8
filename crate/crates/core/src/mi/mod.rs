//! Nonparametric mutual information between continuous sample blocks.

mod block;
mod digamma;
mod ksg;

pub use block::{jitter, jitter_columns, SampleBlock};
pub use digamma::digamma;
pub use ksg::{estimate_mi, FixedBlockKsg, KsgEstimator, MiEstimate, DEFAULT_JITTER};
