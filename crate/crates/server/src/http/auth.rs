use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{ApiResult, App, Auth};
use crate::error::ApiError;
use crate::password;
use crate::platform::{LoginStep, SessionGrant, SignupRequest, UserView};

#[derive(Deserialize)]
struct Login {
    email: String,
    password: String,
}

#[derive(Deserialize)]
struct Verify {
    challenge: String,
    code: String,
}

#[derive(Deserialize)]
struct TokenRequest {
    hours: i64,
}

#[derive(Deserialize)]
struct AcceptTerms {
    version: u32,
}

#[derive(Serialize)]
struct Terms {
    version: u32,
    text: String,
}

#[derive(Serialize)]
struct SessionInfo {
    user: UserView,
    expires_at: Option<DateTime<Utc>>,
}

pub fn routes() -> Router<App> {
    Router::new()
        .route("/auth/signup", post(signup))
        .route("/auth/login", post(login))
        .route("/auth/verify", post(verify))
        .route("/auth/tokens", post(token))
        .route("/auth/logout", post(logout))
        .route("/auth/me", get(me))
        .route("/auth/terms", get(terms).post(accept_terms))
}

async fn signup(State(app): State<App>, Json(req): Json<SignupRequest>) -> ApiResult<(StatusCode, Json<UserView>)> {
    let hash = password::hash_async(req.password.clone()).await?;
    let view = app.with(|p| p.signup(&req, hash))?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn login(State(app): State<App>, Json(req): Json<Login>) -> ApiResult<Json<LoginStep>> {
    let (user, stored) = app.with(|p| p.credentials(&req.email))?;
    if !password::verify_async(stored, req.password).await {
        return Err(ApiError::BadCredentials);
    }
    app.with(|p| p.begin_login(&user)).map(Json)
}

async fn verify(State(app): State<App>, Json(req): Json<Verify>) -> ApiResult<Json<SessionGrant>> {
    app.with(|p| p.verify_code(&req.challenge, &req.code)).map(Json)
}

async fn token(State(app): State<App>, auth: Auth, Json(req): Json<TokenRequest>) -> ApiResult<(StatusCode, Json<SessionGrant>)> {
    let grant = app.with(|p| p.create_api_token(&auth.user, req.hours))?;
    Ok((StatusCode::CREATED, Json(grant)))
}

async fn logout(State(app): State<App>, auth: Auth) -> ApiResult<StatusCode> {
    app.with(|p| p.logout(&auth.token))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn me(State(app): State<App>, auth: Auth) -> ApiResult<Json<SessionInfo>> {
    app.with(|p| Ok(SessionInfo { user: p.me(&auth.user)?, expires_at: p.token_expiry(&auth.token) })).map(Json)
}

async fn terms(State(app): State<App>) -> Json<Terms> {
    let p = app.lock();
    let s = p.settings();
    Json(Terms { version: s.terms_version, text: s.terms_text.clone() })
}

async fn accept_terms(State(app): State<App>, auth: Auth, Json(req): Json<AcceptTerms>) -> ApiResult<Json<UserView>> {
    app.with(|p| p.accept_terms(&auth.user, req.version)).map(Json)
}
