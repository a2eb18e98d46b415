use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use icdoc_core::{ArtifactEntry, Digest, DocId, Manifest, Pin, Version};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::{oneshot, RwLock};

use crate::store::{self, StoreError};
use crate::{DocumentRecord, Registry, StatusChange, TrackerError, TrackerEvent};

/// Registry plus the file it is persisted to. Every mutation runs on a copy
/// which replaces the live registry only after it has been written to disk.
struct Shared {
    registry: Registry,
    state_file: PathBuf,
}

type AppState = Arc<RwLock<Shared>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentView {
    #[serde(flatten)]
    pub record: DocumentRecord,
    pub events: Vec<TrackerEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishResponse {
    pub changed: Vec<StatusChange>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegisterRequest {
    pub doc_id: String,
}

/// Body of `POST /documents/{id}/versions`. `doc_id` may be omitted; when
/// present it must match the path.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublicationRequest {
    #[serde(default)]
    pub doc_id: Option<DocId>,
    pub version: Version,
    pub src: String,
    pub refs: Vec<Pin>,
    pub build_location: Option<String>,
    pub artifacts: Vec<ArtifactEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BuildFailureRequest {
    pub summary: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckFailureRequest {
    pub path: String,
    pub expected: Digest,
    pub actual: Digest,
    pub reporter: String,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<TrackerError> for ApiError {
    fn from(e: TrackerError) -> Self {
        let code = match e {
            TrackerError::UnknownDocument(_) => StatusCode::NOT_FOUND,
            TrackerError::AlreadyRegistered(_) | TrackerError::NonIncreasingVersion { .. } => {
                StatusCode::CONFLICT
            }
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError(code, e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))
}

fn parse_id(id: &str) -> Result<DocId, ApiError> {
    DocId::new(id).map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))
}

/// Apply `f` to a copy of the registry, persist it, then publish the copy.
async fn mutate<T>(
    state: &AppState,
    f: impl FnOnce(&mut Registry) -> Result<T, TrackerError>,
) -> Result<T, ApiError> {
    let mut shared = state.write().await;
    let mut next = shared.registry.clone();
    let out = f(&mut next)?;
    store::save(&shared.state_file, &next)?;
    shared.registry = next;
    Ok(out)
}

async fn list(State(state): State<AppState>) -> Json<Vec<DocumentRecord>> {
    let shared = state.read().await;
    Json(shared.registry.documents().cloned().collect())
}

async fn show(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<DocumentView>, ApiError> {
    let id = parse_id(&id)?;
    let shared = state.read().await;
    let record = shared
        .registry
        .get(&id)
        .cloned()
        .ok_or_else(|| TrackerError::UnknownDocument(id.clone()))?;
    let events = shared.registry.events_for(&id).cloned().collect();
    Ok(Json(DocumentView { record, events }))
}

async fn register(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: RegisterRequest = parse_body(&body)?;
    let id = parse_id(&req.doc_id)?;
    let record = mutate(&state, |r| r.register_document(&id)).await?;
    Ok((StatusCode::CREATED, Json(record)).into_response())
}

async fn publish(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let id = parse_id(&id)?;
    let req: PublicationRequest = parse_body(&body)?;
    if req.doc_id.as_ref().is_some_and(|d| d != &id) {
        return Err(ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("body doc_id does not match '{id}'"),
        ));
    }
    let manifest = Manifest {
        doc_id: id,
        version: req.version,
        src: req.src,
        refs: req.refs,
        artifacts: req.artifacts,
        build_location: req.build_location,
    };
    let changed = mutate(&state, |r| r.record_publication(&manifest)).await?;
    Ok((StatusCode::CREATED, Json(PublishResponse { changed })).into_response())
}

async fn build_failure(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let id = parse_id(&id)?;
    let req: BuildFailureRequest = parse_body(&body)?;
    let record = mutate(&state, |r| r.record_build_failure(&id, &req.summary)).await?;
    Ok((StatusCode::CREATED, Json(record)).into_response())
}

async fn check_failure(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let id = parse_id(&id)?;
    let req: CheckFailureRequest = parse_body(&body)?;
    let event = mutate(&state, |r| {
        r.report_check_failure(&id, &req.path, req.expected, req.actual, &req.reporter)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(event)).into_response())
}

pub fn router(registry: Registry, state_file: PathBuf) -> Router {
    let state: AppState = Arc::new(RwLock::new(Shared {
        registry,
        state_file,
    }));
    Router::new()
        .route("/documents", get(list).post(register))
        .route("/documents/{id}", get(show))
        .route("/documents/{id}/versions", post(publish))
        .route("/documents/{id}/build-failures", post(build_failure))
        .route("/documents/{id}/check-failures", post(check_failure))
        .with_state(state)
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

fn runtime() -> std::io::Result<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
}

async fn bind(addr: &str) -> Result<TcpListener, ServeError> {
    TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind {
            addr: addr.to_string(),
            source,
        })
}

/// Serve the tracker on `listen` until the process is stopped.
pub fn serve_forever(state_file: PathBuf, listen: &str) -> Result<(), ServeError> {
    let registry = store::load(&state_file)?;
    let rt = runtime()?;
    rt.block_on(async {
        let listener = bind(listen).await?;
        eprintln!("tracker listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(registry, state_file)).await?;
        Ok(())
    })
}

/// A tracker running on a background thread.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl ServerHandle {
    /// Load `state_file` and start serving on `listen` (use port 0 for an
    /// ephemeral port).
    pub fn start(state_file: PathBuf, listen: &str) -> Result<Self, ServeError> {
        let registry = store::load(&state_file)?;
        let rt = runtime()?;
        let listener = rt.block_on(bind(listen))?;
        let addr = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let app = router(registry, state_file);
        let thread = std::thread::spawn(move || {
            rt.block_on(async move {
                let _ = axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
            });
        });
        Ok(ServerHandle {
            addr,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) {
        self.shutdown_and_join();
    }

    fn shutdown_and_join(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown_and_join();
    }
}
