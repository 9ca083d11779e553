//! HTTP and WebSocket frame service.
//!
//! - `GET /scenes` lists the loaded scenes.
//! - `POST /scenes/{id}/render` takes a JSON camera and answers with a PNG.
//!   Frame statistics travel in the `x-frame-stats` header as JSON.
//! - `GET /scenes/{id}/stream?width=&height=` upgrades to a WebSocket. The
//!   client sends camera updates as JSON text; the server renders the latest
//!   one and sends a JSON `frame` text message followed by a binary message
//!   holding a big-endian `u32` frame counter and the PNG.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};
use lfprobe_core::render::{Frame, FrameStats};
use lfprobe_core::trace::TraceConfig;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::{mpsc, watch};

use crate::camera::{CameraSpec, CameraSpecError, MAX_IMAGE_SIDE};
use crate::source::{ProbeSource, SourceError};

/// Environment variable holding the listening port.
pub const PORT_ENV: &str = "LFPROBE_PORT";
pub const DEFAULT_PORT: u16 = 8080;
/// Default stream frame side.
pub const STREAM_SIDE: u32 = 256;
/// Response header carrying [`WireStats`] of a rendered frame.
pub const STATS_HEADER: &str = "x-frame-stats";

/// `{ "scenes": [{ "id": "room", "path": "room/manifest.json" }] }`. Paths
/// are relative to the config file and may name grid manifests or single
/// probe files.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub scenes: Vec<SceneEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub path: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("cannot read service config {path}: {source}")]
    ConfigIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid service config {path}: {source}")]
    ConfigJson {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("scene id `{0}` is listed twice")]
    DuplicateScene(String),
    #[error("scene `{id}` ({path}): {source}")]
    Scene {
        id: String,
        path: PathBuf,
        source: SourceError,
    },
}

impl ServiceConfig {
    pub fn read(path: &Path) -> Result<ServiceConfig, ServiceError> {
        let text = std::fs::read_to_string(path).map_err(|source| ServiceError::ConfigIo {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ServiceError::ConfigJson {
            path: path.to_owned(),
            source,
        })
    }
}

/// A loaded scene.
#[derive(Debug)]
pub struct Scene {
    pub id: String,
    pub name: String,
    pub source: ProbeSource,
}

/// Shared, read-only service state.
#[derive(Debug, Clone)]
pub struct AppState {
    scenes: Arc<BTreeMap<String, Arc<Scene>>>,
    trace: TraceConfig,
}

impl AppState {
    pub fn new(scenes: Vec<Scene>, trace: TraceConfig) -> Result<AppState, ServiceError> {
        let mut map = BTreeMap::new();
        for scene in scenes {
            let id = scene.id.clone();
            if map.insert(id.clone(), Arc::new(scene)).is_some() {
                return Err(ServiceError::DuplicateScene(id));
            }
        }
        Ok(AppState {
            scenes: Arc::new(map),
            trace,
        })
    }

    /// Loads every scene of a config; paths resolve against `base`.
    pub fn load(config: &ServiceConfig, base: &Path, trace: TraceConfig) -> Result<AppState, ServiceError> {
        let scenes = config
            .scenes
            .iter()
            .map(|entry| {
                let path = base.join(&entry.path);
                let source = ProbeSource::load(&path).map_err(|source| ServiceError::Scene {
                    id: entry.id.clone(),
                    path: path.clone(),
                    source,
                })?;
                Ok(Scene {
                    id: entry.id.clone(),
                    name: entry.name.clone().unwrap_or_else(|| entry.id.clone()),
                    source,
                })
            })
            .collect::<Result<Vec<_>, ServiceError>>()?;
        AppState::new(scenes, trace)
    }

    pub fn load_file(config_path: &Path, trace: TraceConfig) -> Result<AppState, ServiceError> {
        let config = ServiceConfig::read(config_path)?;
        AppState::load(&config, config_path.parent().unwrap_or(Path::new(".")), trace)
    }

    fn scene(&self, id: &str) -> Option<Arc<Scene>> {
        self.scenes.get(id).cloned()
    }
}

/// Entry of `GET /scenes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDescriptor {
    pub id: String,
    pub name: String,
    pub kind: String,
    pub probes: usize,
    pub dims: [usize; 3],
    /// `{ "min": [..], "max": [..] }` of the captured cloud, when recorded.
    pub bounds: Option<BoundsJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsJson {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

/// Frame statistics as sent on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WireStats {
    pub trace_ms: f64,
    pub mean_fetches_per_pixel: f64,
    pub hit_fraction: f64,
    pub miss_fraction: f64,
    pub unknown_fraction: f64,
}

impl From<FrameStats> for WireStats {
    fn from(s: FrameStats) -> Self {
        WireStats {
            trace_ms: s.trace_ms,
            mean_fetches_per_pixel: s.mean_fetches_per_pixel,
            hit_fraction: s.hit_fraction,
            miss_fraction: s.miss_fraction,
            unknown_fraction: s.unknown_fraction,
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/scenes", get(list_scenes))
        .route("/scenes/{id}/render", post(render_once))
        .route("/scenes/{id}/stream", get(stream))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

/// Port from [`PORT_ENV`], else [`DEFAULT_PORT`].
pub fn port_from_env() -> Result<u16, std::num::ParseIntError> {
    match std::env::var(PORT_ENV) {
        Ok(v) => v.trim().parse(),
        Err(_) => Ok(DEFAULT_PORT),
    }
}

async fn list_scenes(State(state): State<AppState>) -> Json<Vec<SceneDescriptor>> {
    Json(
        state
            .scenes
            .values()
            .map(|s| SceneDescriptor {
                id: s.id.clone(),
                name: s.name.clone(),
                kind: s.source.kind().to_owned(),
                probes: s.source.probe_count(),
                dims: s.source.dims(),
                bounds: s.source.bounds().map(|b| BoundsJson {
                    min: b.min.to_array(),
                    max: b.max.to_array(),
                }),
            })
            .collect(),
    )
}

fn json_error(status: StatusCode, body: Value) -> Response {
    (status, Json(body)).into_response()
}

fn unknown_scene(id: &str) -> Response {
    json_error(
        StatusCode::NOT_FOUND,
        json!({ "error": format!("unknown scene `{id}`") }),
    )
}

fn bad_camera(e: &CameraSpecError) -> Response {
    json_error(
        StatusCode::BAD_REQUEST,
        json!({ "error": e.to_string(), "field": e.field }),
    )
}

async fn render_once(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Response {
    let Some(scene) = state.scene(&id) else {
        return unknown_scene(&id);
    };
    let spec = match CameraSpec::from_json(&body) {
        Ok(spec) => spec,
        Err(e) => return bad_camera(&e),
    };
    let trace = state.trace;
    let rendered = tokio::task::spawn_blocking(move || scene.source.render_png(&spec, trace)).await;
    match rendered {
        Ok(Ok((png, frame))) => {
            let stats = serde_json::to_string(&WireStats::from(frame.stats)).expect("stats serialize");
            let mut resp = (StatusCode::OK, png).into_response();
            let headers = resp.headers_mut();
            headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
            headers.insert(
                STATS_HEADER,
                HeaderValue::from_str(&stats).expect("stats JSON is a valid header value"),
            );
            resp
        }
        Ok(Err(e)) => bad_camera(&e),
        Err(e) => json_error(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({ "error": format!("render task failed: {e}") }),
        ),
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct StreamParams {
    width: Option<u32>,
    height: Option<u32>,
}

async fn stream(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(params): Query<StreamParams>,
    ws: WebSocketUpgrade,
) -> Response {
    let Some(scene) = state.scene(&id) else {
        return unknown_scene(&id);
    };
    let width = params.width.unwrap_or(STREAM_SIDE);
    let height = params.height.unwrap_or(STREAM_SIDE);
    for (field, v) in [("width", width), ("height", height)] {
        if v == 0 || v > MAX_IMAGE_SIDE {
            return bad_camera(&CameraSpecError {
                field,
                message: format!("must be in 1..={MAX_IMAGE_SIDE}, got {v}"),
            });
        }
    }
    let trace = state.trace;
    ws.on_upgrade(move |socket| run_session(socket, scene, trace, width, height))
}

/// A validated camera update and the JSON it arrived as.
#[derive(Debug, Clone)]
struct Update {
    spec: CameraSpec,
    echo: Value,
}

/// Parses a client message. The session's frame size overrides any size in
/// the message; every other field, including an optional `seq`, is echoed
/// back with the frame.
fn parse_update(text: &str, width: u32, height: u32) -> Result<Update, CameraSpecError> {
    let echo: Value = serde_json::from_str(text).map_err(|e| CameraSpecError {
        field: "body",
        message: e.to_string(),
    })?;
    let mut camera = echo.clone();
    if let Some(obj) = camera.as_object_mut() {
        obj.remove("seq");
        obj.remove("type");
        obj.insert("width".into(), width.into());
        obj.insert("height".into(), height.into());
    }
    let spec = CameraSpec::from_value(camera)?;
    Ok(Update { spec, echo })
}

fn frame_messages(counter: u32, update: &Update, png: Vec<u8>, frame: &Frame) -> [Message; 2] {
    let header = json!({
        "type": "frame",
        "frame": counter,
        "camera": update.echo,
        "stats": WireStats::from(frame.stats),
    });
    let mut binary = Vec::with_capacity(4 + png.len());
    binary.extend_from_slice(&counter.to_be_bytes());
    binary.extend_from_slice(&png);
    [
        Message::Text(header.to_string().into()),
        Message::Binary(binary.into()),
    ]
}

async fn run_session(socket: WebSocket, scene: Arc<Scene>, trace: TraceConfig, width: u32, height: u32) {
    let (mut sink, mut incoming) = socket.split();
    let (out_tx, mut out_rx) = mpsc::channel::<Message>(8);
    let (cam_tx, mut cam_rx) = watch::channel::<Option<Update>>(None);

    let writer = tokio::spawn(async move {
        while let Some(msg) = out_rx.recv().await {
            if sink.send(msg).await.is_err() {
                break;
            }
        }
    });

    // Renders the newest camera whenever it changes; stale ones are skipped.
    let render_tx = out_tx.clone();
    let renderer = tokio::spawn(async move {
        let mut counter: u32 = 0;
        while cam_rx.changed().await.is_ok() {
            let Some(update) = cam_rx.borrow_and_update().clone() else {
                continue;
            };
            let scene = scene.clone();
            let spec = update.spec.clone();
            let rendered = tokio::task::spawn_blocking(move || scene.source.render_png(&spec, trace)).await;
            let messages = match rendered {
                Ok(Ok((png, frame))) => {
                    counter += 1;
                    frame_messages(counter, &update, png, &frame).to_vec()
                }
                Ok(Err(e)) => vec![error_message(&e.to_string())],
                Err(e) => vec![error_message(&format!("render task failed: {e}"))],
            };
            for m in messages {
                if render_tx.send(m).await.is_err() {
                    return;
                }
            }
        }
    });

    while let Some(Ok(msg)) = incoming.next().await {
        match msg {
            Message::Text(text) => match parse_update(text.as_str(), width, height) {
                Ok(update) => {
                    cam_tx.send_replace(Some(update));
                }
                Err(e) => {
                    if out_tx.send(error_message(&e.to_string())).await.is_err() {
                        break;
                    }
                }
            },
            Message::Binary(_) => {
                if out_tx
                    .send(error_message("binary client messages are not supported"))
                    .await
                    .is_err()
                {
                    break;
                }
            }
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => {}
        }
    }
    drop(cam_tx);
    drop(out_tx);
    renderer.abort();
    let _ = renderer.await;
    let _ = writer.await;
}

fn error_message(message: &str) -> Message {
    Message::Text(json!({ "type": "error", "message": message }).to_string().into())
}
