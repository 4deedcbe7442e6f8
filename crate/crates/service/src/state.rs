use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use activecanvas_core::{EngineConfig, Workspace, WorkspaceStore};
use tokio::sync::Mutex;

use crate::error::ServiceError;

/// Shared server state: the store plus one lazily loaded slot per dataset.
pub struct AppState {
    store: WorkspaceStore,
    config: EngineConfig,
    slots: Mutex<HashMap<String, Arc<DatasetSlot>>>,
    sessions: AtomicU64,
}

impl AppState {
    pub fn new(store: WorkspaceStore, config: EngineConfig) -> Arc<Self> {
        Arc::new(Self {
            store,
            config,
            slots: Mutex::new(HashMap::new()),
            sessions: AtomicU64::new(0),
        })
    }

    pub fn store(&self) -> &WorkspaceStore {
        &self.store
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn datasets(&self) -> Result<Vec<String>, ServiceError> {
        Ok(self.store.list()?)
    }

    pub(crate) fn next_session_id(&self) -> String {
        format!("session-{}", self.sessions.fetch_add(1, Ordering::Relaxed) + 1)
    }

    /// Returns the dataset's slot, loading the workspace on first use.
    pub async fn slot(&self, id: &str) -> Result<Arc<DatasetSlot>, ServiceError> {
        let mut slots = self.slots.lock().await;
        if let Some(slot) = slots.get(id) {
            return Ok(slot.clone());
        }
        if !self.datasets()?.iter().any(|d| d == id) {
            return Err(ServiceError::NotFound(id.to_string()));
        }
        let store = self.store.clone();
        let seed = self.config.seed;
        let owned = id.to_string();
        let ws = tokio::task::spawn_blocking(move || store.reload(&owned, seed)).await??;
        let slot = Arc::new(DatasetSlot::new(ws));
        slots.insert(id.to_string(), slot.clone());
        Ok(slot)
    }
}

/// One live workspace. Refine and commit take the busy flag; readers never wait on it.
pub struct DatasetSlot {
    workspace: RwLock<Workspace>,
    busy: AtomicBool,
}

impl DatasetSlot {
    pub fn new(ws: Workspace) -> Self {
        Self {
            workspace: RwLock::new(ws),
            busy: AtomicBool::new(false),
        }
    }

    pub fn snapshot(&self) -> Workspace {
        self.workspace.read().expect("workspace lock poisoned").clone()
    }

    pub fn read<R>(&self, f: impl FnOnce(&Workspace) -> R) -> R {
        f(&self.workspace.read().expect("workspace lock poisoned"))
    }

    pub(crate) fn replace(&self, ws: Workspace) {
        *self.workspace.write().expect("workspace lock poisoned") = ws;
    }

    /// Claims exclusive write access, or `None` when another writer holds it.
    pub fn try_begin(self: &Arc<Self>) -> Option<BusyGuard> {
        self.busy
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .ok()
            .map(|_| BusyGuard(self.clone()))
    }

    pub fn is_busy(&self) -> bool {
        self.busy.load(Ordering::Acquire)
    }
}

pub struct BusyGuard(Arc<DatasetSlot>);

impl Drop for BusyGuard {
    fn drop(&mut self) {
        self.0.busy.store(false, Ordering::Release);
    }
}
