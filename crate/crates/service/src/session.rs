//! Per-connection protocol handling, independent of the transport.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use activecanvas_core::layout::ItemPosition;
use activecanvas_core::{Error as EngineError, Move, Workspace};

use crate::error::ServiceError;
use crate::protocol::{
    parse_client, ClientMessage, DatasetFrame, ErrorCode, RefineFrame, ServerMessage, WireItem,
    PROTOCOL_VERSION,
};
use crate::state::{AppState, DatasetSlot};

pub struct Session {
    state: Arc<AppState>,
    slot: Arc<DatasetSlot>,
    id: String,
    pending: BTreeMap<String, [f64; 2]>,
}

impl Session {
    /// Binds a session to a dataset and returns the greeting frames.
    pub async fn open(
        state: Arc<AppState>,
        dataset: &str,
    ) -> Result<(Self, Vec<ServerMessage>), ServiceError> {
        let slot = state.slot(dataset).await?;
        let greeting = vec![ServerMessage::hello(), slot.read(dataset_frame)];
        let id = state.next_session_id();
        Ok((
            Self {
                state,
                slot,
                id,
                pending: BTreeMap::new(),
            },
            greeting,
        ))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn slot(&self) -> &Arc<DatasetSlot> {
        &self.slot
    }

    /// Handles one text frame. Returns the reply, if the frame warrants one.
    pub async fn handle_text(&mut self, text: &str) -> Option<ServerMessage> {
        let msg = match parse_client(text) {
            Ok(m) => m,
            Err(e) => return Some(e),
        };
        match msg {
            ClientMessage::Hello { protocol_version } if protocol_version != PROTOCOL_VERSION => {
                Some(ServerMessage::error(
                    ErrorCode::UnsupportedVersion,
                    format!("server speaks protocol {PROTOCOL_VERSION}, client sent {protocol_version}"),
                ))
            }
            ClientMessage::Hello { .. } => None,
            ClientMessage::Move { id, x, y } => self.buffer_move(id, x, y).err(),
            ClientMessage::RefineRequest { positions } => Some(self.refine(positions).await.unwrap_or_else(|e| e)),
            ClientMessage::CommitRequest { annotation } => Some(self.commit(annotation).await.unwrap_or_else(|e| e)),
        }
    }

    fn buffer_move(&mut self, id: String, x: f64, y: f64) -> Result<(), ServerMessage> {
        check_unit(&id, x, y)?;
        if self.slot.read(|ws| ws.row_of(&id).is_none()) {
            return Err(engine_error(EngineError::UnknownId(id)));
        }
        self.pending.insert(id, [x, y]);
        Ok(())
    }

    fn apply_pending(&self, ws: &mut Workspace) -> Result<(), ServerMessage> {
        let moves: Vec<Move> = self
            .pending
            .iter()
            .map(|(id, &[x, y])| Move { id: id.clone(), x, y })
            .collect();
        ws.apply_layout(&moves).map_err(engine_error)
    }

    async fn refine(&mut self, positions: Vec<ItemPosition>) -> Result<ServerMessage, ServerMessage> {
        for p in &positions {
            check_unit(&p.id, p.x, p.y)?;
        }
        let _guard = self.slot.try_begin().ok_or_else(busy)?;
        let mut ws = self.slot.snapshot();
        self.apply_pending(&mut ws)?;
        ws.apply_positions(&positions).map_err(engine_error)?;

        let config = self.state.config().clone();
        let started = Instant::now();
        let (ws, report) = tokio::task::spawn_blocking(move || {
            let report = ws.run_refinement(&config);
            (ws, report)
        })
        .await
        .map_err(|e| ServerMessage::error(ErrorCode::Internal, e.to_string()))?;
        let report = report.map_err(engine_error)?;
        let elapsed_ms = started.elapsed().as_millis() as u64;

        let positions = ws.layout().items().to_vec();
        self.slot.replace(ws);
        self.pending.clear();
        Ok(ServerMessage::RefineResult(RefineFrame {
            positions,
            mi_before: report.mi_before,
            mi_after: report.mi_after,
            elapsed_ms,
        }))
    }

    async fn commit(&mut self, annotation: Option<String>) -> Result<ServerMessage, ServerMessage> {
        let _guard = self.slot.try_begin().ok_or_else(busy)?;
        let mut ws = self.slot.snapshot();
        self.apply_pending(&mut ws)?;
        ws.commit(&self.id, annotation).map_err(engine_error)?;

        let store = self.state.store().clone();
        let ws = tokio::task::spawn_blocking(move || store.save(&ws).map(|_| ws))
            .await
            .map_err(|e| ServerMessage::error(ErrorCode::Internal, e.to_string()))?
            .map_err(engine_error)?;

        let ack = ServerMessage::CommitAck {
            new_dim: ws.dims(),
            commit_index: ws.commits().len(),
        };
        self.slot.replace(ws);
        self.pending.clear();
        Ok(ack)
    }
}

pub fn dataset_frame(ws: &Workspace) -> ServerMessage {
    ServerMessage::Dataset(DatasetFrame {
        protocol_version: PROTOCOL_VERSION,
        dataset_id: ws.dataset_id().to_string(),
        items: ws
            .items()
            .iter()
            .map(|it| WireItem {
                id: it.id.clone(),
                thumb: it.thumb.clone(),
            })
            .collect(),
        positions: ws.layout().items().to_vec(),
        dims: ws.dims(),
        commits: ws.commits().len(),
    })
}

fn check_unit(id: &str, x: f64, y: f64) -> Result<(), ServerMessage> {
    let ok = |v: f64| (0.0..=1.0).contains(&v);
    if ok(x) && ok(y) {
        Ok(())
    } else {
        Err(ServerMessage::error(
            ErrorCode::InvalidPosition,
            format!("{id}: ({x}, {y}) outside [0,1]^2"),
        ))
    }
}

fn busy() -> ServerMessage {
    ServerMessage::error(ErrorCode::Busy, "another refine or commit is running on this dataset")
}

fn engine_error(e: EngineError) -> ServerMessage {
    let code = match &e {
        EngineError::TooFewTouched { .. } => ErrorCode::TooFewTouched,
        EngineError::UnknownId(_) => ErrorCode::UnknownId,
        EngineError::InvalidCoordinate { .. } => ErrorCode::InvalidPosition,
        _ => ErrorCode::Internal,
    };
    ServerMessage::error(code, e.to_string())
}
