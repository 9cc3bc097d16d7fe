//! HTTP API for interactive enhancement: upload an image once, then request
//! fast previews and full-resolution enhancements with varying parameters.
//!
//! | method | path                          | body / query                 | response        |
//! |--------|-------------------------------|------------------------------|-----------------|
//! | POST   | `/api/images`                 | PNG or JPEG bytes            | 201 JSON        |
//! | GET    | `/api/images/{id}/preview`    | `alpha`, `gamma`, `th`, `lv` | `image/png`     |
//! | POST   | `/api/images/{id}/enhance`    | `PipelineConfig` JSON        | `image/png`     |
//! | GET    | `/api/defaults`               |                              | JSON            |

pub mod store;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lumenlift_core::pipeline::{ALPHA_MAX, GAMMA_MAX, PREVIEW_ALPHA, RECOMMENDED_ALPHA, RECOMMENDED_GAMMA};
use lumenlift_core::{dac, decode_image, encode_png, enhance, Error, NlmParams, PipelineConfig};
use serde::Serialize;
use serde_json::json;
use tower_http::services::ServeDir;

use crate::store::{SessionImage, SessionStore};

pub const ELAPSED_HEADER: &str = "x-elapsed-ms";

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub max_sessions: usize,
    pub max_upload_bytes: usize,
    pub preview_max_dim: usize,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_sessions: 16,
            max_upload_bytes: 32 * 1024 * 1024,
            preview_max_dim: 640,
            static_dir: None,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    store: Arc<Mutex<SessionStore>>,
    preview_max_dim: usize,
}

impl AppState {
    fn session(&self, id: &str) -> Result<Arc<SessionImage>, ApiError> {
        self.store
            .lock()
            .expect("session store poisoned")
            .get(id)
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown image id `{id}`")))
    }
}

pub fn router(config: &ServiceConfig) -> Router {
    let state = AppState {
        store: Arc::new(Mutex::new(SessionStore::new(config.max_sessions))),
        preview_max_dim: config.preview_max_dim,
    };
    let api = Router::new()
        .route("/api/images", post(upload))
        .route("/api/images/{id}/preview", get(preview))
        .route("/api/images/{id}/enhance", post(enhance_full))
        .route("/api/defaults", get(defaults))
        .layer(DefaultBodyLimit::max(config.max_upload_bytes))
        .with_state(state);
    match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

#[derive(Debug, Serialize)]
struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>) -> Self {
        Self {
            status,
            error: error.into(),
            field: None,
        }
    }

    fn invalid(field: &str, error: impl Into<String>) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            error: format!("{field}: {}", error.into()),
            field: Some(field.to_string()),
        }
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        match &err {
            Error::InvalidParams { field, reason } => ApiError::invalid(field, reason.clone()),
            Error::TooManyLevels { .. } => ApiError::invalid("pyramid_levels", err.to_string()),
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, err.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

async fn upload(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let max_dim = state.preview_max_dim;
    let session = tokio::task::spawn_blocking(move || -> Result<SessionImage, Error> {
        let image = decode_image(&body)?;
        Ok(SessionImage::new(image, max_dim))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;

    let body = json!({
        "id": session.id,
        "width": session.image.width(),
        "height": session.image.height(),
    });
    let evicted = state.store.lock().expect("session store poisoned").insert(session);
    for id in evicted {
        log::debug!("evicted session {id}");
    }
    Ok((StatusCode::CREATED, Json(body)))
}

/// Preview parameters after range checks.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PreviewParams {
    alpha: f32,
    gamma: f32,
    denoise: NlmParams,
}

fn parse_preview(query: &HashMap<String, String>) -> Result<PreviewParams, ApiError> {
    let defaults = NlmParams::default();
    let number = |name: &str, default: f32| -> Result<f32, ApiError> {
        match query.get(name) {
            None => Ok(default),
            Some(raw) => raw
                .trim()
                .parse::<f32>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ApiError::invalid(name, format!("`{raw}` is not a number"))),
        }
    };
    let alpha = number("alpha", PREVIEW_ALPHA)?;
    if !(0.0..=ALPHA_MAX).contains(&alpha) {
        return Err(ApiError::invalid("alpha", format!("{alpha} outside [0, {ALPHA_MAX}]")));
    }
    let gamma = number("gamma", PipelineConfig::default().gamma)?;
    if gamma <= 0.0 || gamma > GAMMA_MAX {
        return Err(ApiError::invalid("gamma", format!("{gamma} outside (0, {GAMMA_MAX}]")));
    }
    let denoise = NlmParams::with_strength(number("th", defaults.th)?, number("lv", defaults.lv)?);
    denoise.validate()?;
    Ok(PreviewParams { alpha, gamma, denoise })
}

fn png_response(png: Vec<u8>, elapsed_ms: f64) -> Response {
    let mut response = ([(header::CONTENT_TYPE, "image/png")], png).into_response();
    if let Ok(v) = HeaderValue::from_str(&format!("{elapsed_ms:.3}")) {
        response.headers_mut().insert(ELAPSED_HEADER, v);
    }
    response
}

async fn preview(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let params = parse_preview(&query)?;
    let session = state.session(&id)?;
    let (png, elapsed) = tokio::task::spawn_blocking(move || -> Result<(Vec<u8>, f64), Error> {
        let start = Instant::now();
        let out = dac(&session.preview, params.alpha, params.gamma, &params.denoise)?;
        let png = encode_png(&out)?;
        Ok((png, start.elapsed().as_secs_f64() * 1e3))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(png_response(png, elapsed))
}

async fn enhance_full(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let config: PipelineConfig = if body.iter().all(u8::is_ascii_whitespace) {
        PipelineConfig::default()
    } else {
        serde_json::from_slice(&body)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("invalid config: {e}")))?
    };
    config.validate()?;
    let session = state.session(&id)?;
    let (png, elapsed) = tokio::task::spawn_blocking(move || -> Result<(Vec<u8>, f64), Error> {
        let start = Instant::now();
        let out = enhance(&session.image, &config)?;
        let png = encode_png(&out)?;
        Ok((png, start.elapsed().as_secs_f64() * 1e3))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(png_response(png, elapsed))
}

#[derive(Serialize)]
struct Range {
    min: f32,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    min_exclusive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    max: Option<f32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recommended: Option<[f32; 2]>,
}

#[derive(Serialize)]
struct Ranges {
    alpha: Range,
    gamma: Range,
    th: Range,
    lv: Range,
    pyramid_levels: Range,
}

#[derive(Serialize)]
struct PreviewDefaults {
    alpha: f32,
    gamma: f32,
    th: f32,
    lv: f32,
}

#[derive(Serialize)]
struct Defaults {
    config: PipelineConfig,
    preview: PreviewDefaults,
    ranges: Ranges,
}

async fn defaults() -> Json<Defaults> {
    let config = PipelineConfig::default();
    let lower = |min: f32, min_exclusive: bool| Range { min, min_exclusive, max: None, recommended: None };
    Json(Defaults {
        preview: PreviewDefaults {
            alpha: PREVIEW_ALPHA,
            gamma: config.gamma,
            th: config.denoise.th,
            lv: config.denoise.lv,
        },
        ranges: Ranges {
            alpha: Range {
                min: 0.0,
                min_exclusive: false,
                max: Some(ALPHA_MAX),
                recommended: Some([RECOMMENDED_ALPHA.0, RECOMMENDED_ALPHA.1]),
            },
            gamma: Range {
                min: 0.0,
                min_exclusive: true,
                max: Some(GAMMA_MAX),
                recommended: Some([RECOMMENDED_GAMMA.0, RECOMMENDED_GAMMA.1]),
            },
            th: lower(0.0, false),
            lv: lower(0.0, true),
            pyramid_levels: lower(1.0, false),
        },
        config,
    })
}
