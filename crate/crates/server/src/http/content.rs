use axum::body::{Body, Bytes};
use axum::extract::{DefaultBodyLimit, Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use framewise_core::annotation::Annotation;
use framewise_core::forms::{AnswerSet, AnswerValue};
use framewise_core::ids::{AnnotationId, GroupId, ProtocolId, QuestionId, UserId, VideoId};
use futures::StreamExt;
use serde::Deserialize;
use tokio::io::AsyncWriteExt;
use tower::ServiceExt;
use tower_http::services::ServeFile;

use super::{ApiResult, App, Auth};
use crate::error::ApiError;
use crate::platform::{AnnotationPatch, AnswerEntry, NewAnnotation, NewProtocol, NewUpload, RandomIds, VideoView};
use crate::state::Protocol;

#[derive(Deserialize)]
struct Cut {
    frame: u64,
}

#[derive(Deserialize)]
struct Answer {
    value: AnswerValue,
}

#[derive(Deserialize)]
struct Share {
    group: GroupId,
    #[serde(default)]
    level: u32,
}

#[derive(Deserialize)]
struct Grant {
    uploader: UserId,
    granted: bool,
}

pub fn routes() -> Router<App> {
    Router::new()
        .route("/groups/{g}/annotations", post(create))
        .route("/annotations/{a}", get(annotation).patch(patch).delete(delete))
        .route("/annotations/{a}/cut", post(cut))
        .route("/annotations/{a}/duplicate", post(duplicate))
        .route("/annotations/{a}/answers", get(answers))
        .route("/annotations/{a}/answers/{q}", put(record).delete(clear))
        .route("/annotations/{a}/submit", post(submit))
        .route("/videos", post(upload).layer(DefaultBodyLimit::disable()))
        .route("/videos/{v}", get(video))
        .route("/videos/{v}/share", post(share))
        .route("/videos/{v}/original", get(original))
        .route("/videos/{v}/hls/{*path}", get(hls))
        .route("/protocols", get(protocols).post(create_protocol))
        .route("/protocols/{p}", get(protocol).put(update_protocol))
        .route("/protocols/{p}/grants", put(grant))
        .route("/protocols/{p}/document", get(protocol_document).put(set_protocol_document))
}

async fn create(
    State(app): State<App>,
    auth: Auth,
    Path(g): Path<GroupId>,
    Json(req): Json<NewAnnotation>,
) -> ApiResult<(StatusCode, Json<Annotation>)> {
    let a = app.with(|p| p.create_annotation(&auth.user, &g, req))?;
    Ok((StatusCode::CREATED, Json(a)))
}

async fn annotation(State(app): State<App>, auth: Auth, Path(a): Path<AnnotationId>) -> ApiResult<Json<Annotation>> {
    app.with(|p| p.annotation(&auth.user, &a)).map(Json)
}

async fn patch(State(app): State<App>, auth: Auth, Path(a): Path<AnnotationId>, Json(req): Json<AnnotationPatch>) -> ApiResult<Json<Annotation>> {
    app.with(|p| p.patch_annotation(&auth.user, &a, req)).map(Json)
}

async fn delete(State(app): State<App>, auth: Auth, Path(a): Path<AnnotationId>) -> ApiResult<StatusCode> {
    app.with(|p| p.delete_annotation(&auth.user, &a))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn cut(State(app): State<App>, auth: Auth, Path(a): Path<AnnotationId>, Json(c): Json<Cut>) -> ApiResult<Json<[Annotation; 2]>> {
    let (first, second) = app.with(|p| p.cut_annotation(&auth.user, &a, c.frame))?;
    Ok(Json([first, second]))
}

async fn duplicate(State(app): State<App>, auth: Auth, Path(a): Path<AnnotationId>) -> ApiResult<(StatusCode, Json<Annotation>)> {
    let copy = app.with(|p| p.duplicate_annotation(&auth.user, &a))?;
    Ok((StatusCode::CREATED, Json(copy)))
}

async fn answers(State(app): State<App>, auth: Auth, Path(a): Path<AnnotationId>) -> ApiResult<Json<Vec<AnswerEntry>>> {
    app.with(|p| p.answers_of(&auth.user, &a)).map(Json)
}

async fn record(
    State(app): State<App>,
    auth: Auth,
    Path((a, q)): Path<(AnnotationId, QuestionId)>,
    Json(ans): Json<Answer>,
) -> ApiResult<Json<AnswerSet>> {
    app.with(|p| p.record_answer(&auth.user, &a, &q, ans.value)).map(Json)
}

async fn clear(State(app): State<App>, auth: Auth, Path((a, q)): Path<(AnnotationId, QuestionId)>) -> ApiResult<StatusCode> {
    app.with(|p| p.clear_answer(&auth.user, &a, &q))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn submit(State(app): State<App>, auth: Auth, Path(a): Path<AnnotationId>) -> ApiResult<StatusCode> {
    app.with(|p| p.submit_answers(&auth.user, &a))?;
    Ok(StatusCode::NO_CONTENT)
}

/// Removes a staged upload unless it was handed over.
struct Staged(Option<std::path::PathBuf>);

impl Drop for Staged {
    fn drop(&mut self) {
        if let Some(p) = self.0.take() {
            let _ = std::fs::remove_file(p);
        }
    }
}

async fn upload(State(app): State<App>, auth: Auth, Query(req): Query<NewUpload>, body: Body) -> ApiResult<(StatusCode, Json<VideoView>)> {
    let staging = app.with(|p| {
        p.check_upload(&auth.user, &req)?;
        Ok(p.staging_dir())
    })?;
    tokio::fs::create_dir_all(&staging).await?;
    let path = staging.join(RandomIds::make("up"));
    let mut staged = Staged(Some(path.clone()));
    let mut file = tokio::fs::File::create(&path).await?;
    let mut stream = body.into_data_stream();
    let mut size = 0u64;
    while let Some(chunk) = stream.next().await {
        let chunk = chunk.map_err(|e| ApiError::Invalid(format!("upload interrupted: {e}")))?;
        size += chunk.len() as u64;
        file.write_all(&chunk).await?;
    }
    file.flush().await?;
    drop(file);
    if size == 0 {
        return Err(ApiError::Invalid("empty upload".into()));
    }
    let probe_path = path.clone();
    let probe = tokio::task::spawn_blocking(move || framewise_media::probe(&probe_path))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    let view = app.with(|p| p.register_upload(&auth.user, req, &path, probe))?;
    staged.0 = None;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn video(State(app): State<App>, auth: Auth, Path(v): Path<VideoId>) -> ApiResult<Json<VideoView>> {
    app.with(|p| p.video_view(&auth.user, &v)).map(Json)
}

async fn share(State(app): State<App>, auth: Auth, Path(v): Path<VideoId>, Json(s): Json<Share>) -> ApiResult<Json<VideoView>> {
    app.with(|p| p.share_video(&auth.user, &v, &s.group, s.level)).map(Json)
}

async fn serve(path: std::path::PathBuf, req: Request) -> ApiResult<Response> {
    if !tokio::fs::try_exists(&path).await.unwrap_or(false) {
        return Err(ApiError::NotFound("media file".into()));
    }
    let content_type = match path.extension().and_then(|e| e.to_str()) {
        Some("m3u8") => Some("application/vnd.apple.mpegurl"),
        Some("ts") => Some("video/mp2t"),
        _ => None,
    };
    let mut resp = ServeFile::new(&path).oneshot(req).await.map_err(|e| ApiError::Internal(e.to_string()))?.map(Body::new);
    if let Some(ct) = content_type {
        resp.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static(ct));
    }
    Ok(resp)
}

async fn original(State(app): State<App>, auth: Auth, Path(v): Path<VideoId>, req: Request) -> ApiResult<Response> {
    let path = app.with(|p| p.media_file(&auth.user, &v, "original"))?;
    serve(path, req).await
}

async fn hls(State(app): State<App>, auth: Auth, Path((v, rel)): Path<(VideoId, String)>, req: Request) -> ApiResult<Response> {
    let path = app.with(|p| p.media_file(&auth.user, &v, &rel))?;
    serve(path, req).await
}

async fn protocols(State(app): State<App>, auth: Auth) -> ApiResult<Json<Vec<Protocol>>> {
    app.with(|p| p.protocols(&auth.user)).map(Json)
}

async fn create_protocol(State(app): State<App>, auth: Auth, Json(req): Json<NewProtocol>) -> ApiResult<(StatusCode, Json<Protocol>)> {
    let created = app.with(|p| p.create_protocol(&auth.user, req))?;
    Ok((StatusCode::CREATED, Json(created)))
}

async fn protocol(State(app): State<App>, auth: Auth, Path(id): Path<ProtocolId>) -> ApiResult<Json<Protocol>> {
    app.with(|p| p.protocol(&auth.user, &id)).map(Json)
}

async fn update_protocol(State(app): State<App>, auth: Auth, Path(id): Path<ProtocolId>, Json(req): Json<NewProtocol>) -> ApiResult<Json<Protocol>> {
    app.with(|p| p.update_protocol(&auth.user, &id, req)).map(Json)
}

async fn grant(State(app): State<App>, auth: Auth, Path(id): Path<ProtocolId>, Json(g): Json<Grant>) -> ApiResult<Json<Protocol>> {
    app.with(|p| p.grant_protocol(&auth.user, &id, &g.uploader, g.granted)).map(Json)
}

async fn set_protocol_document(State(app): State<App>, auth: Auth, Path(id): Path<ProtocolId>, body: Bytes) -> ApiResult<Json<Protocol>> {
    app.with(|p| p.set_protocol_document(&auth.user, &id, &body)).map(Json)
}

async fn protocol_document(State(app): State<App>, auth: Auth, Path(id): Path<ProtocolId>) -> ApiResult<Response> {
    let path = app.with(|p| p.protocol_document(&auth.user, &id))?;
    let bytes = tokio::fs::read(path).await?;
    Ok(([(header::CONTENT_TYPE, "application/pdf")], bytes).into_response())
}
