//! HTTP service behind the scribble UI.
//!
//! ```text
//! POST   /sessions               raw image bytes  -> {id, width, height}
//! POST   /sessions/{id}/segment  scribble JSON    -> {mask_png, iterations, converged, ms, classes, graph_cached}
//! GET    /sessions/{id}/mask     last mask as image/png
//! DELETE /sessions/{id}
//! ```

use std::collections::HashMap;
use std::io::Cursor;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use lpseg_core::pipeline::{build_graph, encode_mask, propagate, segment_prepared, PreparedImage};
use lpseg_core::seeds::{decode_scribbles, SeedRole, Stroke};
use lpseg_core::{ClassId, ConvergenceMonitor, Lambda, PixelGraph, SegParams};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;
use tower_http::cors::{AllowOrigin, CorsLayer};
use uuid::Uuid;

use crate::exec::Threaded;
use crate::io;

const GRAPH_CACHE_SIZE: usize = 4;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Uploads with more pixels are refused with 413.
    pub max_pixels: u64,
    pub idle_timeout: Duration,
    /// `None` allows any origin.
    pub cors_origin: Option<String>,
    pub max_body_bytes: usize,
    pub workers: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_pixels: 2_000_000,
            idle_timeout: Duration::from_secs(30 * 60),
            cors_origin: None,
            max_body_bytes: 64 << 20,
            workers: Threaded::available().workers(),
        }
    }
}

/// Graphs depend on `k` and the exact weights only: scribbles never
/// ignore pixels, so every session graph spans the whole image.
type GraphKey = (usize, [u64; lpseg_core::FEATURE_COUNT]);

struct Session {
    image: Arc<PreparedImage>,
    last_used: Instant,
    graphs: Vec<(GraphKey, Arc<PixelGraph>)>,
    mask_png: Option<Vec<u8>>,
}

impl Session {
    fn cached_graph(&mut self, key: &GraphKey) -> Option<Arc<PixelGraph>> {
        let pos = self.graphs.iter().position(|(k, _)| k == key)?;
        let entry = self.graphs.remove(pos);
        let graph = entry.1.clone();
        self.graphs.push(entry);
        Some(graph)
    }

    fn store_graph(&mut self, key: GraphKey, graph: Arc<PixelGraph>) {
        if self.graphs.len() >= GRAPH_CACHE_SIZE {
            self.graphs.remove(0);
        }
        self.graphs.push((key, graph));
    }
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<std::sync::Mutex<HashMap<Uuid, Arc<Mutex<Session>>>>>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            sessions: Arc::default(),
            config: Arc::new(config),
        }
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    /// Drops sessions idle for longer than the configured timeout.
    pub async fn purge_idle(&self) {
        let sessions: Vec<(Uuid, Arc<Mutex<Session>>)> = self
            .sessions
            .lock()
            .unwrap()
            .iter()
            .map(|(id, s)| (*id, s.clone()))
            .collect();
        let mut expired = Vec::new();
        for (id, s) in sessions {
            // A locked session is in use, so not idle.
            if let Ok(s) = s.try_lock() {
                if s.last_used.elapsed() > self.config.idle_timeout {
                    expired.push(id);
                }
            }
        }
        if !expired.is_empty() {
            let mut map = self.sessions.lock().unwrap();
            for id in &expired {
                map.remove(id);
            }
            log::info!("expired {} idle session(s)", expired.len());
        }
    }

    async fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.purge_idle().await;
        let id = Uuid::parse_str(id).map_err(|_| ApiError::not_found())?;
        self.sessions
            .lock()
            .unwrap()
            .get(&id)
            .cloned()
            .ok_or_else(ApiError::not_found)
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn not_found() -> Self {
        Self::new(StatusCode::NOT_FOUND, "no such session")
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<lpseg_core::Error> for ApiError {
    fn from(e: lpseg_core::Error) -> Self {
        ApiError::unprocessable(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreatedSession {
    pub id: String,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scribble {
    /// 1-based class.
    pub class: usize,
    /// `[x, y]` pixel coordinates.
    pub points: Vec<[i64; 2]>,
    #[serde(default)]
    pub brush_radius: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentRequest {
    pub scribbles: Vec<Scribble>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
    /// Defaults to the highest scribbled class (at least 2).
    #[serde(default)]
    pub classes: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentResponse {
    /// Base64 PNG, same encoding as the CLI masks.
    pub mask_png: String,
    pub iterations: usize,
    pub converged: bool,
    pub ms: f64,
    pub classes: usize,
    pub graph_cached: bool,
}

pub fn router(state: AppState) -> Router {
    let cors = match &state.config.cors_origin {
        Some(origin) => match HeaderValue::from_str(origin) {
            Ok(v) => CorsLayer::new().allow_origin(AllowOrigin::exact(v)),
            Err(_) => {
                log::warn!("ignoring invalid CORS origin {origin:?}");
                CorsLayer::new()
            }
        },
        None => CorsLayer::new().allow_origin(AllowOrigin::any()),
    }
    .allow_methods(tower_http::cors::Any)
    .allow_headers(tower_http::cors::Any);
    let limit = state.config.max_body_bytes;
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(delete_session))
        .route("/sessions/{id}/segment", post(segment_session))
        .route("/sessions/{id}/mask", get(get_mask))
        .layer(DefaultBodyLimit::max(limit))
        .layer(cors)
        .with_state(state)
}

/// Binds, spawns the idle sweeper and serves until Ctrl-C.
pub async fn serve(addr: std::net::SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let state = AppState::new(config);
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.purge_idle().await;
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn image_dimensions(bytes: &[u8]) -> Result<(u32, u32), ApiError> {
    image::ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?
        .into_dimensions()
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("cannot decode image: {e}")))
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<Json<CreatedSession>, ApiError> {
    state.purge_idle().await;
    let (w, h) = image_dimensions(&body)?;
    if u64::from(w) * u64::from(h) > state.config.max_pixels {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("{w}x{h} exceeds the {} pixel limit", state.config.max_pixels),
        ));
    }
    let image = tokio::task::spawn_blocking(move || {
        io::decode_rgb(&body).map(|img| PreparedImage::new(&img))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("cannot decode image: {e}")))?;
    let id = Uuid::new_v4();
    let created = CreatedSession {
        id: id.to_string(),
        width: image.width(),
        height: image.height(),
    };
    let session = Session {
        image: Arc::new(image),
        last_used: Instant::now(),
        graphs: Vec::new(),
        mask_png: None,
    };
    state
        .sessions
        .lock()
        .unwrap()
        .insert(id, Arc::new(Mutex::new(session)));
    Ok(Json(created))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let id = Uuid::parse_str(&id).map_err(|_| ApiError::not_found())?;
    match state.sessions.lock().unwrap().remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::not_found()),
    }
}

async fn get_mask(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = state.session(&id).await?;
    let mut s = session.lock().await;
    s.last_used = Instant::now();
    match &s.mask_png {
        Some(png) => Ok(([(header::CONTENT_TYPE, "image/png")], png.clone()).into_response()),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, "no mask yet; segment first")),
    }
}

fn parse_request(req: &SegmentRequest, width: usize, height: usize) -> Result<(SegParams, lpseg_core::SeedMap), ApiError> {
    let defaults = SegParams::default();
    let lambda = match &req.lambda {
        Some(v) => Lambda::from_slice(v)?,
        None => defaults.lambda,
    };
    let params = SegParams::new(req.k.unwrap_or(defaults.k), lambda)?;
    let highest = req.scribbles.iter().map(|s| s.class).max().unwrap_or(0);
    let classes = req.classes.unwrap_or(highest.max(2));
    let strokes = req
        .scribbles
        .iter()
        .map(|s| {
            let class = ClassId::new(s.class)
                .ok_or_else(|| ApiError::unprocessable(format!("invalid class {}", s.class)))?;
            Ok(Stroke {
                class,
                points: s.points.iter().map(|p| (p[0], p[1])).collect(),
                radius: s.brush_radius,
            })
        })
        .collect::<Result<Vec<_>, ApiError>>()?;
    let (seeds, _) = decode_scribbles(width, height, classes, &strokes)?;
    Ok((params, seeds))
}

async fn segment_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
    req: Result<Json<SegmentRequest>, JsonRejection>,
) -> Result<Json<SegmentResponse>, ApiError> {
    let session = state.session(&id).await?;
    let Json(req) = req.map_err(|e| ApiError::new(e.status(), e.body_text()))?;
    let mut s = session.lock().await;
    s.last_used = Instant::now();
    let image = s.image.clone();
    let (params, seeds) = parse_request(&req, image.width(), image.height())?;
    let key: GraphKey = (params.k, params.lambda.as_array().map(f64::to_bits));
    let cached = s.cached_graph(&key);
    let graph_cached = cached.is_some();
    let workers = state.config.workers;

    let start = Instant::now();
    let (result, graph) = tokio::task::spawn_blocking(move || {
        let exec = Threaded::new(workers);
        let monitor = ConvergenceMonitor::default();
        let seeded = seeds.seeded_classes();
        if seeded < 2 {
            return Err(lpseg_core::Error::TooFewSeededClasses(seeded));
        }
        if seeds.count(|r| *r == SeedRole::Unlabeled) == 0 {
            return segment_prepared(&image, &seeds, &params, &monitor, &exec, |_| {}).map(|r| (r, None));
        }
        let graph = match cached {
            Some(g) => g,
            None => {
                let nodes = seeds.node_pixels();
                if params.k >= nodes.len() {
                    return Err(lpseg_core::Error::KTooLarge {
                        k: params.k,
                        nodes: nodes.len(),
                    });
                }
                Arc::new(build_graph(&image, &nodes, &params, &exec)?)
            }
        };
        let result = propagate(&seeds, &graph, &monitor, &exec, |_| {})?;
        Ok((result, Some(graph)))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let ms = start.elapsed().as_secs_f64() * 1e3;

    if let (false, Some(g)) = (graph_cached, graph) {
        s.store_graph(key, g);
    }
    let png = io::encode_png(result.width(), result.height(), &encode_mask(&result))
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let response = SegmentResponse {
        mask_png: base64::engine::general_purpose::STANDARD.encode(&png),
        iterations: result.iterations,
        converged: result.converged,
        ms,
        classes: result.classes(),
        graph_cached,
    };
    s.mask_png = Some(png);
    s.last_used = Instant::now();
    Ok(Json(response))
}
