//! JSON API over the platform. Handlers lock the platform, call one
//! method and release the lock before any await.

mod admin;
mod auth;
mod content;
mod groups;
mod stream;

use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use axum::extract::{DefaultBodyLimit, FromRequestParts};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use framewise_core::ids::UserId;
use serde_json::json;

use crate::error::ApiError;
use crate::platform::{Platform, Result};

/// Shared handle passed to every handler.
#[derive(Clone)]
pub struct App {
    platform: Arc<Mutex<Platform>>,
    /// How often open event streams re-check their credential.
    pub recheck: Duration,
}

impl App {
    pub fn new(platform: Platform) -> Self {
        App { platform: Arc::new(Mutex::new(platform)), recheck: Duration::from_secs(5) }
    }

    pub fn from_shared(platform: Arc<Mutex<Platform>>) -> Self {
        App { platform, recheck: Duration::from_secs(5) }
    }

    pub fn shared(&self) -> Arc<Mutex<Platform>> {
        self.platform.clone()
    }

    pub fn lock(&self) -> MutexGuard<'_, Platform> {
        self.platform.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    /// Run one platform call under the lock.
    pub fn with<T>(&self, f: impl FnOnce(&mut Platform) -> Result<T>) -> Result<T> {
        f(&mut self.lock())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = self.status_code();
        let status = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        if status.is_server_error() {
            tracing::error!("{self}");
        }
        let mut resp = (status, Json(json!({ "error": code, "message": self.to_string() }))).into_response();
        if status == StatusCode::UNAUTHORIZED {
            resp.headers_mut().insert(header::WWW_AUTHENTICATE, header::HeaderValue::from_static("Bearer"));
        }
        resp
    }
}

/// The authenticated caller. The bearer secret comes from the
/// `Authorization` header or, for clients that cannot set headers
/// (event streams, media elements), an `access_token` query parameter.
pub struct Auth {
    pub user: UserId,
    pub token: String,
}

fn bearer(parts: &Parts) -> Option<String> {
    if let Some(v) = parts.headers.get(header::AUTHORIZATION).and_then(|v| v.to_str().ok()) {
        let (scheme, token) = v.split_once(' ')?;
        return scheme.eq_ignore_ascii_case("bearer").then(|| token.trim().to_owned());
    }
    let query = parts.uri.query()?;
    query.split('&').filter_map(|kv| kv.split_once('=')).find(|(k, _)| *k == "access_token").map(|(_, v)| v.to_owned())
}

impl FromRequestParts<App> for Auth {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, app: &App) -> Result<Self, ApiError> {
        let token = bearer(parts).ok_or(ApiError::Unauthenticated)?;
        let user = app.lock().authenticate(&token)?;
        Ok(Auth { user, token })
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

/// Request bodies above this size are refused (uploads stream and are exempt).
pub const BODY_LIMIT: usize = 64 * 1024 * 1024;

pub fn router(app: App) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .merge(auth::routes())
        .merge(groups::routes())
        .merge(content::routes())
        .merge(admin::routes())
        .merge(stream::routes())
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(app)
}
