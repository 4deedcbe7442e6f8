//! Websocket frames. One JSON object per text frame, discriminated by `type`.

use activecanvas_core::layout::ItemPosition;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const PROTOCOL_VERSION: u32 = 1;

/// `type` values a client may send.
pub const CLIENT_TYPES: [&str; 4] = ["hello", "move", "refine_request", "commit_request"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    BadMessage,
    UnknownType,
    UnknownId,
    InvalidPosition,
    UnsupportedVersion,
    TooFewTouched,
    Busy,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello {
        protocol_version: u32,
    },
    Move {
        id: String,
        x: f64,
        y: f64,
    },
    RefineRequest {
        #[serde(default)]
        positions: Vec<ItemPosition>,
    },
    CommitRequest {
        #[serde(default)]
        annotation: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireItem {
    pub id: String,
    pub thumb: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetFrame {
    pub protocol_version: u32,
    pub dataset_id: String,
    pub items: Vec<WireItem>,
    pub positions: Vec<ItemPosition>,
    pub dims: usize,
    pub commits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineFrame {
    pub positions: Vec<ItemPosition>,
    pub mi_before: f64,
    pub mi_after: f64,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello { protocol_version: u32, server: String },
    Dataset(DatasetFrame),
    RefineResult(RefineFrame),
    CommitAck { new_dim: usize, commit_index: usize },
    Error { code: ErrorCode, detail: String },
}

impl ServerMessage {
    pub fn hello() -> Self {
        ServerMessage::Hello {
            protocol_version: PROTOCOL_VERSION,
            server: "activecanvas".into(),
        }
    }

    pub fn error(code: ErrorCode, detail: impl Into<String>) -> Self {
        ServerMessage::Error {
            code,
            detail: detail.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frames always serialize")
    }
}

/// Parses a client frame. Unknown fields are ignored; an unrecognised `type`
/// is reported separately from a malformed frame.
pub fn parse_client(text: &str) -> Result<ClientMessage, ServerMessage> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| ServerMessage::error(ErrorCode::BadMessage, format!("invalid JSON: {e}")))?;
    let kind = match value.get("type") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(ServerMessage::error(ErrorCode::BadMessage, "`type` must be a string")),
        None if value.is_object() => {
            return Err(ServerMessage::error(ErrorCode::BadMessage, "missing `type`"))
        }
        None => return Err(ServerMessage::error(ErrorCode::BadMessage, "frame must be a JSON object")),
    };
    if !CLIENT_TYPES.contains(&kind.as_str()) {
        return Err(ServerMessage::error(
            ErrorCode::UnknownType,
            format!("unknown message type `{kind}`"),
        ));
    }
    serde_json::from_value(value)
        .map_err(|e| ServerMessage::error(ErrorCode::BadMessage, format!("bad `{kind}` frame: {e}")))
}
