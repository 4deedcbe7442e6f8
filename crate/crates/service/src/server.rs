use std::future::Future;
use std::path::{Component, Path as FsPath};
use std::sync::Arc;

use activecanvas_core::workspace::{read_manifest, MANIFEST_FILE};
use activecanvas_core::Item;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tracing::{debug, info, warn};

use crate::error::ServiceError;
use crate::protocol::{ErrorCode, ServerMessage};
use crate::session::Session;
use crate::state::AppState;
use activecanvas_core::layout::ItemPosition;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/ws/{dataset}", get(ws_upgrade))
        .route("/api/datasets", get(list_datasets))
        .route("/api/dataset/{id}", get(dataset_detail))
        .route("/thumbs/{id}", get(thumbnail))
        .with_state(state)
}

/// Serves until `shutdown` resolves, then drains open connections.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}

fn error_response(e: ServiceError) -> Response {
    match e {
        ServiceError::NotFound(id) => (StatusCode::NOT_FOUND, format!("no such dataset: {id}")).into_response(),
        ServiceError::Engine(activecanvas_core::Error::NotFound(what)) => {
            (StatusCode::NOT_FOUND, what).into_response()
        }
        other => {
            warn!(error = %other, "request failed");
            (StatusCode::INTERNAL_SERVER_ERROR, other.to_string()).into_response()
        }
    }
}

async fn ws_upgrade(
    ws: WebSocketUpgrade,
    State(state): State<Arc<AppState>>,
    Path(dataset): Path<String>,
) -> Response {
    match Session::open(state, &dataset).await {
        Ok((session, greeting)) => ws.on_upgrade(move |socket| run_socket(socket, session, greeting)),
        Err(e) => error_response(e),
    }
}

async fn run_socket(socket: WebSocket, mut session: Session, greeting: Vec<ServerMessage>) {
    let (mut tx, mut rx) = socket.split();
    debug!(session = session.id(), "connected");
    for frame in greeting {
        if tx.send(Message::Text(frame.to_json().into())).await.is_err() {
            return;
        }
    }
    while let Some(Ok(msg)) = rx.next().await {
        let reply = match msg {
            Message::Text(text) => session.handle_text(text.as_str()).await,
            Message::Binary(_) => Some(ServerMessage::error(
                ErrorCode::BadMessage,
                "binary frames are not supported",
            )),
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => None,
        };
        if let Some(reply) = reply {
            if tx.send(Message::Text(reply.to_json().into())).await.is_err() {
                break;
            }
        }
    }
    debug!(session = session.id(), "disconnected");
}

async fn list_datasets(State(state): State<Arc<AppState>>) -> Response {
    match state.datasets() {
        Ok(ids) => Json(ids).into_response(),
        Err(e) => error_response(e),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetDetail {
    pub id: String,
    pub manifest: Vec<Item>,
    pub layout: Vec<ItemPosition>,
    pub dims: usize,
    pub commits: usize,
}

async fn dataset_detail(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match state.slot(&id).await {
        Ok(slot) => Json(slot.read(|ws| DatasetDetail {
            id: ws.dataset_id().to_string(),
            manifest: ws.items().to_vec(),
            layout: ws.layout().items().to_vec(),
            dims: ws.dims(),
            commits: ws.commits().len(),
        }))
        .into_response(),
        Err(e) => error_response(e),
    }
}

#[derive(Debug, Deserialize)]
struct ThumbQuery {
    dataset: Option<String>,
}

/// Looks the item up in `?dataset=` if given, otherwise in every dataset in
/// sorted order, and returns the first match.
async fn thumbnail(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<ThumbQuery>,
) -> Response {
    let candidates = match q.dataset {
        Some(d) => vec![d],
        None => match state.datasets() {
            Ok(ids) => ids,
            Err(e) => return error_response(e),
        },
    };
    for dataset in candidates {
        let dir = state.store().dir(&dataset);
        let Ok(items) = read_manifest(&dir.join(MANIFEST_FILE)) else {
            continue;
        };
        let Some(item) = items.into_iter().find(|it| it.id == id) else {
            continue;
        };
        if !is_contained(FsPath::new(&item.thumb)) {
            return (StatusCode::FORBIDDEN, "thumbnail path escapes dataset").into_response();
        }
        let path = dir.join(&item.thumb);
        return match tokio::fs::read(&path).await {
            Ok(bytes) => ([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response(),
            Err(_) => (StatusCode::NOT_FOUND, format!("thumbnail missing for {id}")).into_response(),
        };
    }
    (StatusCode::NOT_FOUND, format!("no item {id}")).into_response()
}

fn is_contained(p: &FsPath) -> bool {
    p.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
}

fn content_type(path: &FsPath) -> &'static str {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        _ => "application/octet-stream",
    }
}
