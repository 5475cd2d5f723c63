//! HTTP JSON API over an immutable analytics snapshot.
//!
//! Every request clones the current `Arc<Snapshot>` once and answers from it,
//! so a concurrent `/reload` never mixes two snapshots in one response.

mod error;
mod routes;
mod snapshot;
mod views;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

pub use error::ApiError;
pub use routes::router;
pub use snapshot::{Snapshot, SnapshotConfig, SnapshotSource};
pub use views::{downstream_graph_grouped, elbow_cutoff};

/// Shared service state.
#[derive(Clone)]
pub struct AppState {
    current: Arc<RwLock<Arc<Snapshot>>>,
    source: Option<Arc<SnapshotSource>>,
    ui_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(snapshot: Snapshot) -> Self {
        AppState { current: Arc::new(RwLock::new(Arc::new(snapshot))), source: None, ui_dir: None }
    }

    /// Enables `POST /reload` from `source`.
    pub fn with_source(mut self, source: SnapshotSource) -> Self {
        self.source = Some(Arc::new(source));
        self
    }

    /// Serves a built explorer from `dir` under `/ui/`.
    pub fn with_ui_dir(mut self, dir: PathBuf) -> Self {
        self.ui_dir = Some(dir);
        self
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().expect("snapshot lock").clone()
    }

    pub fn replace(&self, snapshot: Snapshot) {
        *self.current.write().expect("snapshot lock") = Arc::new(snapshot);
    }
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(state: AppState, addr: SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
