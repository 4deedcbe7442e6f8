//! Websocket and HTTP front end for the layout engine.
//!
//! Clients connect to `/ws/{dataset}`, receive `hello` and `dataset` frames,
//! then send `refine_request` and `commit_request` frames. Plain HTTP serves
//! the dataset list, dataset snapshots and thumbnails.

pub mod config;
mod error;
pub mod protocol;
pub mod server;
pub mod session;
pub mod state;
pub mod transcript;

pub use config::{load_engine_config, ServeOptions};
pub use error::ServiceError;
pub use protocol::{ClientMessage, ErrorCode, ServerMessage, PROTOCOL_VERSION};
pub use server::{router, serve};
pub use session::Session;
pub use state::AppState;
