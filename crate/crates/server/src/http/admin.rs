use std::collections::BTreeSet;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, put};
use axum::{Json, Router};
use framewise_core::ids::{UserId, VideoId};
use serde::{Deserialize, Serialize};

use super::{ApiResult, App, Auth};
use crate::platform::{SessionView, SettingsPatch, UserView, VideoView};
use crate::state::{AccountState, AuditEntry, Role, Settings};

#[derive(Deserialize)]
struct StateChange {
    state: AccountState,
}

#[derive(Deserialize)]
struct Roles {
    roles: BTreeSet<Role>,
}

#[derive(Deserialize)]
struct Terms {
    text: String,
}

#[derive(Deserialize)]
struct Broadcast {
    subject: String,
    body: String,
}

#[derive(Serialize)]
struct Sent {
    recipients: usize,
}

#[derive(Deserialize)]
struct Rename {
    name: String,
}

pub fn routes() -> Router<App> {
    Router::new()
        .route("/admin/users", get(users))
        .route("/admin/users/{u}/state", put(set_state))
        .route("/admin/users/{u}/roles", put(set_roles))
        .route("/admin/settings", get(settings).patch(update_settings))
        .route("/admin/terms", put(set_terms))
        .route("/admin/broadcast", axum::routing::post(broadcast))
        .route("/admin/videos", get(videos))
        .route("/admin/videos/{v}", axum::routing::patch(rename_video).delete(delete_video))
        .route("/admin/sessions", get(sessions))
        .route("/admin/audit", get(audit))
}

async fn users(State(app): State<App>, auth: Auth) -> ApiResult<Json<Vec<UserView>>> {
    app.with(|p| p.admin_users(&auth.user)).map(Json)
}

async fn set_state(State(app): State<App>, auth: Auth, Path(u): Path<UserId>, Json(s): Json<StateChange>) -> ApiResult<Json<UserView>> {
    app.with(|p| p.admin_set_state(&auth.user, &u, s.state)).map(Json)
}

async fn set_roles(State(app): State<App>, auth: Auth, Path(u): Path<UserId>, Json(r): Json<Roles>) -> ApiResult<Json<UserView>> {
    app.with(|p| p.admin_set_roles(&auth.user, &u, r.roles)).map(Json)
}

async fn settings(State(app): State<App>, auth: Auth) -> ApiResult<Json<Settings>> {
    app.with(|p| {
        p.state().require_admin(&auth.user)?;
        Ok(p.settings().clone())
    })
    .map(Json)
}

async fn update_settings(State(app): State<App>, auth: Auth, Json(patch): Json<SettingsPatch>) -> ApiResult<Json<Settings>> {
    app.with(|p| p.admin_update_settings(&auth.user, patch)).map(Json)
}

async fn set_terms(State(app): State<App>, auth: Auth, Json(t): Json<Terms>) -> ApiResult<Json<Settings>> {
    app.with(|p| p.admin_set_terms(&auth.user, t.text)).map(Json)
}

async fn broadcast(State(app): State<App>, auth: Auth, Json(b): Json<Broadcast>) -> ApiResult<Json<Sent>> {
    let recipients = app.with(|p| p.admin_broadcast(&auth.user, b.subject, b.body))?;
    Ok(Json(Sent { recipients }))
}

async fn videos(State(app): State<App>, auth: Auth) -> ApiResult<Json<Vec<VideoView>>> {
    app.with(|p| p.admin_videos(&auth.user)).map(Json)
}

async fn rename_video(State(app): State<App>, auth: Auth, Path(v): Path<VideoId>, Json(r): Json<Rename>) -> ApiResult<Json<VideoView>> {
    app.with(|p| p.admin_rename_video(&auth.user, &v, r.name)).map(Json)
}

async fn delete_video(State(app): State<App>, auth: Auth, Path(v): Path<VideoId>) -> ApiResult<StatusCode> {
    app.with(|p| p.admin_delete_video(&auth.user, &v))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn sessions(State(app): State<App>, auth: Auth) -> ApiResult<Json<Vec<SessionView>>> {
    app.with(|p| p.admin_sessions(&auth.user)).map(Json)
}

async fn audit(State(app): State<App>, auth: Auth) -> ApiResult<Json<Vec<AuditEntry>>> {
    app.with(|p| p.admin_audit(&auth.user).map(<[AuditEntry]>::to_vec)).map(Json)
}
