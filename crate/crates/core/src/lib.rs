//! Layout inference for interactive image canvases.
//!
//! Users drag a few items into place; the engine ranks feature columns by
//! mutual information with those placements, nudges the touched items toward
//! higher MI, and regresses positions for everything else. Committed layouts
//! become new feature columns for later sessions.

mod error;

pub mod config;
pub mod extrapolator;
pub mod features;
pub mod layout;
pub mod mi;
pub mod refiner;
pub mod simplex;
pub mod synthetic;
pub mod workspace;

pub use config::EngineConfig;
pub use error::{Error, Result};
pub use features::{FeatureMatrix, FeatureRanking, Provenance};
pub use layout::{ItemPosition, Layout};
pub use workspace::{load_workspace, CommitRecord, Item, Move, RefineReport, Workspace, WorkspaceStore};
