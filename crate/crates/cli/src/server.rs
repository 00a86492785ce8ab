//! Read-only HTTP access to a finished run, plus session persistence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use specdesk_core::clip::ClipCollection;
use specdesk_core::export::{
    import_json, plot_json, read_manifest, ExportOptions, Plot, Snapshot, HTML_FILE, JSON_FILE, MANIFEST_FILE,
};
use specdesk_core::run::{analyze, ingest};
use specdesk_core::transforms::Method;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use crate::session::{check_against_run, PutError, SessionState, SessionStore};

/// Everything the server hands out, computed once at startup.
#[derive(Debug)]
pub struct RunData {
    pub snapshot: Snapshot,
    pub collection: ClipCollection,
    pub opts: ExportOptions,
    payloads: BTreeMap<String, String>,
}

impl RunData {
    pub fn new(snapshot: Snapshot, collection: ClipCollection, opts: ExportOptions) -> Self {
        let payloads = snapshot
            .plots
            .iter()
            .map(|p| (p.plot_id.clone(), plot_json(p, opts)))
            .collect();
        RunData {
            snapshot,
            collection,
            opts,
            payloads,
        }
    }

    /// Loads a run directory. Payloads always carry both scales. Audio is
    /// re-read from the recorded inputs; clips whose samples no longer match
    /// their digest are left out.
    pub fn load(run_dir: &Path) -> specdesk_core::Result<Self> {
        let manifest = read_manifest(&run_dir.join(MANIFEST_FILE))?;
        let (settings, user_set) = manifest.settings()?;
        let loaded = match ingest(&settings) {
            Ok(i) => i.collection,
            Err(e) => {
                log::warn!("inputs unavailable, audio disabled: {e}");
                ClipCollection::new()
            }
        };
        let digests: BTreeMap<&str, &str> = manifest
            .inputs
            .iter()
            .map(|d| (d.clip_id.as_str(), d.sha256.as_str()))
            .collect();
        let mut collection = ClipCollection::new();
        for clip in loaded.into_clips() {
            if digests.get(clip.id.as_str()) == Some(&clip.digest().as_str()) {
                collection.insert(clip)?;
            } else {
                log::warn!("{} changed since the run, audio disabled", clip.id);
            }
        }
        let json_path = run_dir.join(JSON_FILE);
        let snapshot = if json_path.exists() {
            import_json(&std::fs::read_to_string(&json_path)?)?
        } else {
            analyze(&collection, &settings, &user_set)?.0
        };
        Ok(RunData::new(snapshot, collection, ExportOptions::default()))
    }

    pub fn payload(&self, clip_id: &str, method: Method) -> Option<&str> {
        self.payloads.get(&Plot::make_id(clip_id, method)).map(String::as_str)
    }
}

pub struct AppState {
    pub run: RunData,
    pub sessions: SessionStore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionEntry {
    pub clip_id: String,
    pub source_path: String,
    pub sha256: String,
    pub sample_rate_hz: u32,
    pub n_samples: usize,
    pub duration_s: f64,
    pub methods: Vec<Method>,
    pub group_key: Option<String>,
    pub label: Option<String>,
    pub onset_s: Option<f64>,
    pub offset_s: Option<f64>,
    pub audio: bool,
}

pub fn collection_entries(run: &RunData) -> Vec<CollectionEntry> {
    run.snapshot
        .manifest
        .inputs
        .iter()
        .map(|d| {
            let clip = run.collection.get(&d.clip_id);
            CollectionEntry {
                clip_id: d.clip_id.clone(),
                source_path: d.source_path.clone(),
                sha256: d.sha256.clone(),
                sample_rate_hz: d.sample_rate_hz,
                n_samples: d.n_samples,
                duration_s: d.n_samples as f64 / d.sample_rate_hz as f64,
                methods: run
                    .snapshot
                    .plots
                    .iter()
                    .filter(|p| p.clip_id == d.clip_id)
                    .map(Plot::method)
                    .collect(),
                group_key: clip.map(|c| c.group_key.clone()),
                label: clip.map(|c| c.label.clone()),
                onset_s: clip.map(|c| c.onset_s),
                offset_s: clip.map(|c| c.offset_s),
                audio: clip.is_some(),
            }
        })
        .collect()
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

async fn get_collection(State(app): State<Arc<AppState>>) -> Json<Vec<CollectionEntry>> {
    Json(collection_entries(&app.run))
}

#[derive(Debug, Deserialize)]
struct SpectralQuery {
    method: Option<String>,
}

async fn get_spectral(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<SpectralQuery>,
) -> Response {
    let Some(method) = q.method else {
        return error(StatusCode::BAD_REQUEST, "missing `method` query parameter");
    };
    let Ok(method) = method.parse::<Method>() else {
        return error(StatusCode::NOT_FOUND, format!("unknown method `{method}`"));
    };
    match app.run.payload(&id, method) {
        Some(body) => ([(header::CONTENT_TYPE, "application/json")], body.to_owned()).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("no {method} result for clip `{id}`")),
    }
}

async fn get_audio(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Response {
    let Some(clip) = app.run.collection.get(&id) else {
        return error(StatusCode::NOT_FOUND, format!("no audio for clip `{id}`"));
    };
    match clip.to_wav_bytes() {
        Ok(bytes) => ([(header::CONTENT_TYPE, "audio/wav")], bytes).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn get_session(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Response {
    match app.sessions.get(&id) {
        Some(s) => Json(s).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("no session `{id}`")),
    }
}

async fn put_session(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> Response {
    let incoming: SessionState = match serde_json::from_slice(&body) {
        Ok(s) => s,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("bad session body: {e}")),
    };
    if let Err(msg) = check_against_run(&incoming.selection, &app.run.snapshot) {
        return error(StatusCode::BAD_REQUEST, msg);
    }
    match app.sessions.put(&id, incoming) {
        Ok(stored) => Json(stored).into_response(),
        Err(PutError::BadRequest(msg)) => error(StatusCode::BAD_REQUEST, msg),
        Err(PutError::Conflict(current)) => (StatusCode::CONFLICT, Json(*current)).into_response(),
        Err(PutError::Storage(msg)) => error(StatusCode::INTERNAL_SERVER_ERROR, msg),
    }
}

/// Builds the router. `index` is served at `/` when no static bundle is given.
pub fn router(app: Arc<AppState>, static_dir: Option<PathBuf>, index: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/collection", get(get_collection))
        .route("/api/clip/{id}/spectral", get(get_spectral))
        .route("/api/clip/{id}/audio", get(get_audio))
        .route("/api/session/{id}", get(get_session).put(put_session))
        .with_state(app);
    let api = match (static_dir, index) {
        (Some(dir), _) => api.fallback_service(ServeDir::new(dir)),
        (None, Some(page)) => api.route(
            "/",
            get(move || async move {
                match tokio::fs::read_to_string(&page).await {
                    Ok(html) => axum::response::Html(html).into_response(),
                    Err(_) => error(StatusCode::NOT_FOUND, "no report in this run"),
                }
            }),
        ),
        (None, None) => api,
    };
    api.layer(CorsLayer::permissive())
}

/// Loads `run_dir` and serves it until the process is stopped.
pub async fn serve(run_dir: &Path, host: &str, port: u16, static_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let run = RunData::load(run_dir)?;
    let sessions = SessionStore::open(run_dir.join("sessions"))?;
    let app = Arc::new(AppState { run, sessions });
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    log::info!("serving {} on http://{}", run_dir.display(), listener.local_addr()?);
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(app, static_dir, Some(run_dir.join(HTML_FILE)))).await?;
    Ok(())
}
