//! HTTP/JSON service over the amalgamation workflow.
//!
//! Each uploaded dataset becomes a session holding the composition and an
//! editable hierarchy. Reads take the session's read lock; every mutation
//! takes its write lock, so a commit is judged against exactly the state it
//! replaces. Sessions live in memory; with a data directory configured the
//! hierarchy and export document of a session are written through on change.

mod error;
pub mod session;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use amalgam_core::AmalgamationHierarchy;
use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::RwLock;
use serde::Serialize;
use serde_json::{json, Value};
use tower_http::cors::{Any, CorsLayer};

pub use error::ApiError;
use error::upload_error;
use session::{
    CommitRequest, EvaluateRequest, EvaluateResponse, ExportDocument, OrdinationQuery, RootsRequest, Session,
    SessionState, SplitRequest, UploadOptions,
};

#[derive(Debug, Clone)]
pub struct Config {
    pub max_upload_bytes: usize,
    /// Directory for write-through persistence; `None` keeps sessions in memory only.
    pub data_dir: Option<PathBuf>,
    /// Allowed CORS origin; `None` disables CORS headers, `*` allows any.
    pub cors_origin: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            max_upload_bytes: 16 * 1024 * 1024,
            data_dir: None,
            cors_origin: None,
        }
    }
}

type Shared = Arc<RwLock<Session>>;

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Shared>>>,
    config: Arc<Config>,
}

impl AppState {
    pub fn new(config: Config) -> Self {
        Self {
            sessions: Arc::default(),
            config: Arc::new(config),
        }
    }

    fn get(&self, id: &str) -> Result<Shared, ApiError> {
        self.sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    fn persist(&self, session: &Session) {
        let Some(dir) = &self.config.data_dir else { return };
        let dir = dir.join(&session.id);
        let result = std::fs::create_dir_all(&dir)
            .and_then(|_| std::fs::write(dir.join("hierarchy.json"), session.hierarchy().to_json()))
            .and_then(|_| match session.export() {
                Ok(doc) => std::fs::write(dir.join("export.json"), to_pretty(&doc)),
                Err(_) => Ok(()),
            });
        if let Err(e) = result {
            log::warn!("could not persist session {}: {e}", session.id);
        }
    }
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("response serializes");
    text.push('\n');
    text
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    body.map(|Json(v)| v).map_err(|e| ApiError::BadRequest(e.body_text()))
}

#[derive(Serialize)]
struct MutationResponse {
    warnings: Vec<String>,
    state: SessionState,
}

pub fn router(state: AppState) -> Router {
    let limit = state.config.max_upload_bytes;
    let cors = state.config.cors_origin.clone();
    let router = Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/roots", post(add_roots))
        .route("/sessions/{id}/split", post(add_split))
        .route("/sessions/{id}/evaluate", post(evaluate))
        .route("/sessions/{id}/commit", post(commit))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/redo", post(redo))
        .route("/sessions/{id}/ordination", get(ordination))
        .route("/sessions/{id}/export", get(export))
        .route("/sessions/{id}/hierarchy", get(get_hierarchy).put(put_hierarchy))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state);
    match cors.as_deref() {
        None => router,
        Some("*") => router.layer(CorsLayer::new().allow_origin(Any).allow_methods(Any).allow_headers(Any)),
        Some(origin) => match HeaderValue::from_str(origin) {
            Ok(origin) => router.layer(CorsLayer::new().allow_origin(origin).allow_methods(Any).allow_headers(Any)),
            Err(_) => {
                log::warn!("ignoring invalid CORS origin `{origin}`");
                router
            }
        },
    }
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn create_session(
    State(app): State<AppState>,
    Query(options): Query<UploadOptions>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionState>), ApiError> {
    let id = uuid::Uuid::new_v4().to_string();
    let session = Session::from_csv(id.clone(), &body, &options).map_err(upload_error)?;
    let state = session.state();
    app.persist(&session);
    app.sessions.write().insert(id, Arc::new(RwLock::new(session)));
    Ok((StatusCode::CREATED, Json(state)))
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionState>, ApiError> {
    Ok(Json(app.get(&id)?.read().state()))
}

async fn delete_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    app.sessions
        .write()
        .remove(&id)
        .map(|_| StatusCode::NO_CONTENT)
        .ok_or(ApiError::NotFound(id))
}

fn mutate(
    app: &AppState,
    id: &str,
    f: impl FnOnce(&mut Session) -> Result<Vec<String>, session::Conflict>,
) -> Result<Json<MutationResponse>, ApiError> {
    let shared = app.get(id)?;
    let mut session = shared.write();
    let warnings = f(&mut session)?;
    app.persist(&session);
    Ok(Json(MutationResponse {
        warnings,
        state: session.state(),
    }))
}

async fn add_roots(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<RootsRequest>, JsonRejection>,
) -> Result<Json<MutationResponse>, ApiError> {
    let req = json_body(body)?;
    mutate(&app, &id, |s| s.add_roots(req))
}

async fn add_split(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<SplitRequest>, JsonRejection>,
) -> Result<Json<MutationResponse>, ApiError> {
    let req = json_body(body)?;
    mutate(&app, &id, |s| s.add_split(req))
}

async fn commit(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<CommitRequest>, JsonRejection>,
) -> Result<Json<MutationResponse>, ApiError> {
    let req = json_body(body)?;
    mutate(&app, &id, |s| s.commit(req))
}

async fn undo(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<MutationResponse>, ApiError> {
    mutate(&app, &id, |s| s.undo().map(|_| Vec::new()))
}

async fn redo(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<MutationResponse>, ApiError> {
    mutate(&app, &id, |s| s.redo().map(|_| Vec::new()))
}

async fn evaluate(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<EvaluateRequest>, JsonRejection>,
) -> Result<Json<EvaluateResponse>, ApiError> {
    let req = json_body(body)?;
    Ok(Json(app.get(&id)?.read().evaluate(&req)?))
}

async fn ordination(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<OrdinationQuery>,
) -> Result<Json<amalgam_core::workflow::ViewDocument>, ApiError> {
    Ok(Json(app.get(&id)?.read().ordination(&q)?))
}

/// Pretty-printed, as written to disk, so that the bytes served and stored agree.
async fn export(State(app): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let doc: ExportDocument = app.get(&id)?.read().export()?;
    Ok(([(header::CONTENT_TYPE, "application/json")], to_pretty(&doc)))
}

async fn get_hierarchy(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<AmalgamationHierarchy>, ApiError> {
    Ok(Json(app.get(&id)?.read().hierarchy().clone()))
}

/// Accepts either a bare hierarchy or an export document carrying one.
async fn put_hierarchy(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<Value>, JsonRejection>,
) -> Result<Json<MutationResponse>, ApiError> {
    let mut value = json_body(body)?;
    if let Some(inner) = value.get_mut("hierarchy") {
        value = inner.take();
    }
    let h: AmalgamationHierarchy =
        serde_json::from_value(value).map_err(|e| ApiError::BadRequest(format!("invalid hierarchy document: {e}")))?;
    mutate(&app, &id, |s| s.import(h))
}
