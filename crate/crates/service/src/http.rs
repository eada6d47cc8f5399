//! HTTP API over a [`Store`].
//!
//! | route | |
//! |---|---|
//! | `GET /assignments/{interface}?seed=&participant_id=` | build and register an assignment |
//! | `GET /stimuli/{id}` | image bytes |
//! | `GET /charts/{id}` | chart JSON, or PNG with `Accept: image/png` |
//! | `POST /logs` | ingest one payload |
//! | `GET /results/{interface}/{stimulus_id}` | JSON report, CSV or PNG heatmap |
//!
//! Every response carries `X-Config-Hash`.

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use attnlab_core::codecharts::render_png;
use attnlab_core::io::{write_grid_csv, write_heatmap_png};
use attnlab_core::quality::Interface;
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::header::{ACCEPT, CONTENT_TYPE};
use axum::http::{HeaderMap, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::assignment::build_assignment;
use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::results::compute_results;
use crate::store::{IngestOutcome, Store};
use crate::wire::parse_payload;

pub const CONFIG_HASH_HEADER: &str = "x-config-hash";
pub const SUMMARY_HEADER: &str = "x-attnlab-summary";

#[derive(Clone)]
struct AppState {
    store: Arc<Store>,
    cfg: Arc<ServiceConfig>,
}

pub fn router(store: Arc<Store>, cfg: ServiceConfig) -> Router {
    let hash = HeaderValue::from_str(&cfg.hash()).expect("hex is a valid header value");
    let state = AppState {
        store,
        cfg: Arc::new(cfg),
    };
    Router::new()
        .route("/assignments/{interface}", get(assignment))
        .route("/stimuli/{id}", get(stimulus_image))
        .route("/charts/{id}", get(chart))
        .route("/logs", post(ingest))
        .route("/results/{interface}/{stimulus_id}", get(results))
        .with_state(state)
        .layer(axum::middleware::map_response(move |mut res: Response| {
            let hash = hash.clone();
            async move {
                res.headers_mut().insert(HeaderName::from_static(CONFIG_HASH_HEADER), hash);
                res
            }
        }))
}

struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            ServiceError::NotFound { .. } => StatusCode::NOT_FOUND,
            ServiceError::Invalid { .. } | ServiceError::NoQualifyingData { .. } | ServiceError::Core(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::Config(_) => StatusCode::BAD_REQUEST,
            ServiceError::Io(_) | ServiceError::Json(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = match &self.0 {
            ServiceError::Invalid { path, message } => json!({ "error": message, "path": path }),
            ServiceError::NoQualifyingData { .. } => json!({ "error": "no qualifying data", "detail": self.0.to_string() }),
            e => json!({ "error": e.to_string() }),
        };
        (status, Json(body)).into_response()
    }
}

fn parse_interface(s: &str) -> Result<Interface, ApiError> {
    s.parse().map_err(|_| ServiceError::not_found("interface", s).into())
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Io(std::io::Error::other(e)))?
        .map_err(ApiError)
}

#[derive(Deserialize)]
struct AssignmentQuery {
    seed: Option<u64>,
    participant_id: Option<String>,
}

/// An explicit seed wins; otherwise the participant id is hashed, and
/// anonymous requests take the next sequence number.
fn assignment_seed(q: &AssignmentQuery, store: &Store) -> u64 {
    match (q.seed, &q.participant_id) {
        (Some(seed), _) => seed,
        (None, Some(p)) => {
            let digest = Sha256::digest(p.as_bytes());
            u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
        }
        (None, None) => store.assignment_count() as u64,
    }
}

async fn assignment(
    State(st): State<AppState>,
    Path(interface): Path<String>,
    Query(q): Query<AssignmentQuery>,
) -> Result<Response, ApiError> {
    let interface = parse_interface(&interface)?;
    let a = blocking(move || {
        let seed = assignment_seed(&q, &st.store);
        let (a, charts) = build_assignment(interface, &st.store.stimuli(), &st.cfg, seed)?;
        st.store.register_assignment(&a, &charts)?;
        Ok(a)
    })
    .await?;
    Ok(Json(a).into_response())
}

async fn stimulus_image(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let stimulus = st.store.stimulus(&id).ok_or_else(|| ServiceError::not_found("stimulus", &id))?;
    let rel = stimulus
        .image_path
        .ok_or_else(|| ServiceError::not_found("stimulus image", &id))?;
    let path = st.store.root().join(&rel);
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|_| ServiceError::not_found("stimulus image", &rel))?;
    let mime = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        Some("svg") => "image/svg+xml",
        _ => "application/octet-stream",
    };
    Ok(([(CONTENT_TYPE, mime)], bytes).into_response())
}

fn accepts(headers: &HeaderMap, mime: &str) -> bool {
    headers
        .get_all(ACCEPT)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .any(|v| v.split(',').any(|m| m.split(';').next().unwrap_or("").trim() == mime))
}

async fn chart(State(st): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> Result<Response, ApiError> {
    let chart = st.store.chart(&id).ok_or_else(|| ServiceError::not_found("chart", &id))?;
    if accepts(&headers, "image/png") {
        let mut png = Vec::new();
        render_png(&chart, &mut png).map_err(ServiceError::from)?;
        return Ok(([(CONTENT_TYPE, "image/png")], png).into_response());
    }
    Ok(Json(chart).into_response())
}

async fn ingest(State(st): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let payload = parse_payload(&body)?;
    let submission_id = payload.submission_id().to_owned();
    let received_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64);
    let outcome = blocking(move || st.store.ingest(payload, received_at)).await?;
    let status = match outcome {
        IngestOutcome::Stored => StatusCode::CREATED,
        IngestOutcome::Duplicate => StatusCode::OK,
    };
    Ok((status, Json(json!({ "status": outcome, "submission_id": submission_id }))).into_response())
}

async fn results(
    State(st): State<AppState>,
    Path((interface, stimulus_id)): Path<(String, String)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let interface = parse_interface(&interface)?;
    let (csv, png) = (accepts(&headers, "text/csv"), accepts(&headers, "image/png"));
    let report = blocking(move || compute_results(&st.store, &stimulus_id, interface, &st.cfg)).await?;
    if !(csv || png) {
        return Ok(Json(report).into_response());
    }
    let s = &report.summary;
    let summary = json!({ "submitted": s.submitted, "passed": s.passed, "used": s.used }).to_string();
    let mut body = Vec::new();
    let mime = if csv {
        write_grid_csv(&report.heatmap.values, &mut body).map_err(ServiceError::from)?;
        "text/csv"
    } else {
        write_heatmap_png(&report.heatmap, &mut body).map_err(ServiceError::from)?;
        "image/png"
    };
    let mut res = ([(CONTENT_TYPE, mime)], body).into_response();
    res.headers_mut().insert(
        HeaderName::from_static(SUMMARY_HEADER),
        HeaderValue::from_str(&summary).expect("json of integers is a valid header value"),
    );
    Ok(res)
}

/// Serves the router until the process is stopped.
pub async fn serve(store: Arc<Store>, cfg: ServiceConfig, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store, cfg)).await
}
