use axum::body::{Body, Bytes};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use framewise_core::annotation::Label;
use framewise_core::evaluation::{GroundTruthConfig, ScoreReport};
use framewise_core::forms::{FormSchema, QUESTION_TYPES};
use framewise_core::ids::{DocumentId, GroupId, LabelId, ThreadId, UserId, VideoId};
use framewise_core::interchange::{to_json, GroupExport};
use framewise_core::ontology::TreeNode;
use framewise_core::workflow::{Anchor, CommentThread, DocumentRef, Membership, ReviewDelta, VideoStatus};
use serde::{Deserialize, Serialize};

use super::{ApiResult, App, Auth};
use crate::platform::{Dashboard, GroupSummary, GroupView, LabelInput, NewGroup, VideoAnnotations, VideoEntry};

#[derive(Deserialize)]
struct GroupPatch {
    name: Option<String>,
    description: Option<String>,
}

#[derive(Deserialize)]
struct NewMember {
    email: String,
    #[serde(flatten)]
    membership: Membership,
}

#[derive(Deserialize)]
struct Level {
    level: u32,
}

#[derive(Deserialize)]
struct Assignment {
    user: UserId,
    video: VideoId,
    assigned: bool,
}

#[derive(Deserialize)]
struct StatusChange {
    status: VideoStatus,
}

#[derive(Serialize)]
struct StatusView {
    video: VideoId,
    status: VideoStatus,
}

#[derive(Deserialize)]
struct Folder {
    path: Vec<String>,
}

#[derive(Deserialize)]
struct OntologySource {
    source: GroupId,
}

#[derive(Deserialize)]
struct DocumentName {
    name: String,
}

#[derive(Deserialize)]
struct NewThread {
    anchor: Anchor,
    text: String,
}

#[derive(Deserialize)]
struct Reply {
    text: String,
}

#[derive(Serialize)]
struct Progress {
    user: UserId,
    progress_pct: f64,
}

#[derive(Serialize)]
struct Credited {
    seconds: i64,
}

#[derive(Serialize)]
struct QuestionTypeInfo {
    name: &'static str,
}

pub fn routes() -> Router<App> {
    Router::new()
        .route("/groups", get(list).post(create))
        .route("/groups/{g}", get(view).patch(patch).delete(delete))
        .route("/groups/{g}/members", post(add_member))
        .route("/groups/{g}/members/{u}", put(update_member).delete(remove_member))
        .route("/groups/{g}/members/{u}/level", put(set_level))
        .route("/groups/{g}/members/{u}/score", get(score))
        .route("/groups/{g}/members/{u}/progress", get(progress))
        .route("/groups/{g}/assignments", put(assign))
        .route("/groups/{g}/videos", get(videos))
        .route("/groups/{g}/videos/{v}", axum::routing::delete(remove_video))
        .route("/groups/{g}/videos/{v}/level", put(video_level))
        .route("/groups/{g}/videos/{v}/status", put(status))
        .route("/groups/{g}/videos/{v}/annotations", get(video_annotations))
        .route("/groups/{g}/videos/{v}/undo", post(undo))
        .route("/groups/{g}/videos/{v}/export", get(export_video))
        .route("/groups/{g}/videos/{v}/import", post(import_video))
        .route("/groups/{g}/videos/{v}/heartbeat", post(heartbeat))
        .route("/groups/{g}/export", get(export_group))
        .route("/groups/{g}/labels", post(create_label))
        .route("/groups/{g}/labels/{l}", put(update_label).delete(delete_label))
        .route("/groups/{g}/folders", post(add_folder))
        .route("/groups/{g}/review-labels", post(review_labels))
        .route("/groups/{g}/ontology/import", post(import_ontology))
        .route("/groups/{g}/ground-truth", put(ground_truth))
        .route("/groups/{g}/documents", post(add_document))
        .route("/groups/{g}/documents/{d}", get(document).delete(delete_document))
        .route("/groups/{g}/comments", get(threads).post(open_thread))
        .route("/groups/{g}/comments/{t}", post(reply))
        .route("/groups/{g}/comments/{t}/resolve", post(resolve))
        .route("/groups/{g}/dashboard", get(dashboard))
        .route("/forms/question-types", get(question_types))
        .route("/forms/{g}/{l}", put(set_form).delete(clear_form))
}

async fn list(State(app): State<App>, auth: Auth) -> ApiResult<Json<Vec<GroupSummary>>> {
    app.with(|p| p.list_groups(&auth.user)).map(Json)
}

async fn create(State(app): State<App>, auth: Auth, Json(req): Json<NewGroup>) -> ApiResult<(StatusCode, Json<GroupView>)> {
    let view = app.with(|p| p.create_group(&auth.user, req))?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn view(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>) -> ApiResult<Json<GroupView>> {
    app.with(|p| p.group_view(&auth.user, &g)).map(Json)
}

async fn patch(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>, Json(req): Json<GroupPatch>) -> ApiResult<Json<GroupView>> {
    app.with(|p| p.update_group(&auth.user, &g, req.name, req.description)).map(Json)
}

async fn delete(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>) -> ApiResult<StatusCode> {
    app.with(|p| p.delete_group(&auth.user, &g))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn add_member(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>, Json(req): Json<NewMember>) -> ApiResult<Json<GroupView>> {
    app.with(|p| p.add_member(&auth.user, &g, &req.email, req.membership)).map(Json)
}

async fn update_member(
    State(app): State<App>,
    auth: Auth,
    Path((g, u)): Path<(GroupId, UserId)>,
    Json(m): Json<Membership>,
) -> ApiResult<Json<GroupView>> {
    app.with(|p| p.update_member(&auth.user, &g, &u, m)).map(Json)
}

async fn remove_member(State(app): State<App>, auth: Auth, Path((g, u)): Path<(GroupId, UserId)>) -> ApiResult<StatusCode> {
    app.with(|p| p.remove_member(&auth.user, &g, &u))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn set_level(State(app): State<App>, auth: Auth, Path((g, u)): Path<(GroupId, UserId)>, Json(l): Json<Level>) -> ApiResult<StatusCode> {
    app.with(|p| p.set_member_level(&auth.user, &g, &u, l.level))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn score(State(app): State<App>, auth: Auth, Path((g, u)): Path<(GroupId, UserId)>) -> ApiResult<Json<ScoreReport>> {
    app.with(|p| p.score_of(&auth.user, &g, &u)).map(Json)
}

async fn progress(State(app): State<App>, auth: Auth, Path((g, u)): Path<(GroupId, UserId)>) -> ApiResult<Json<Progress>> {
    let pct = app.with(|p| p.progress_of(&auth.user, &g, &u))?;
    Ok(Json(Progress { user: u, progress_pct: pct }))
}

async fn assign(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>, Json(a): Json<Assignment>) -> ApiResult<StatusCode> {
    app.with(|p| p.assign(&auth.user, &g, &a.user, &a.video, a.assigned))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn videos(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>) -> ApiResult<Json<Vec<VideoEntry>>> {
    app.with(|p| p.list_group_videos(&auth.user, &g)).map(Json)
}

async fn remove_video(State(app): State<App>, auth: Auth, Path((g, v)): Path<(GroupId, VideoId)>) -> ApiResult<StatusCode> {
    app.with(|p| p.remove_video_from_group(&auth.user, &g, &v))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn video_level(State(app): State<App>, auth: Auth, Path((g, v)): Path<(GroupId, VideoId)>, Json(l): Json<Level>) -> ApiResult<StatusCode> {
    app.with(|p| p.set_video_level(&auth.user, &g, &v, l.level))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn status(
    State(app): State<App>,
    auth: Auth,
    Path((g, v)): Path<(GroupId, VideoId)>,
    Json(s): Json<StatusChange>,
) -> ApiResult<Json<StatusView>> {
    let status = app.with(|p| p.set_status(&auth.user, &g, &v, s.status))?;
    Ok(Json(StatusView { video: v, status }))
}

async fn video_annotations(State(app): State<App>, auth: Auth, Path((g, v)): Path<(GroupId, VideoId)>) -> ApiResult<Json<VideoAnnotations>> {
    app.with(|p| p.video_annotations(&auth.user, &g, &v)).map(Json)
}

async fn undo(State(app): State<App>, auth: Auth, Path((g, v)): Path<(GroupId, VideoId)>) -> ApiResult<Json<Vec<framewise_core::ids::AnnotationId>>> {
    app.with(|p| p.undo(&auth.user, &g, &v)).map(Json)
}

fn json_download(body: String, name: &str) -> Response {
    let disposition = format!("attachment; filename=\"{}.json\"", name.replace(['"', '\\', '/'], "_"));
    ([(header::CONTENT_TYPE, "application/json".to_owned()), (header::CONTENT_DISPOSITION, disposition)], body).into_response()
}

async fn export_video(State(app): State<App>, auth: Auth, Path((g, v)): Path<(GroupId, VideoId)>) -> ApiResult<Response> {
    let doc = app.with(|p| p.export_video(&auth.user, &g, &v))?;
    let name = doc.video.name.clone();
    Ok(json_download(to_json(&doc), &name))
}

async fn import_video(
    State(app): State<App>,
    auth: Auth,
    Path((g, v)): Path<(GroupId, VideoId)>,
    body: String,
) -> ApiResult<(StatusCode, Json<Vec<framewise_core::annotation::Annotation>>)> {
    let created = app.with(|p| p.import_video(&auth.user, &g, &v, &body))?;
    Ok((StatusCode::CREATED, Json(created)))
}

async fn heartbeat(State(app): State<App>, auth: Auth, Path((g, v)): Path<(GroupId, VideoId)>) -> ApiResult<Json<Credited>> {
    let seconds = app.with(|p| p.heartbeat(&auth.user, &g, &v))?;
    Ok(Json(Credited { seconds }))
}

async fn export_group(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>) -> ApiResult<Response> {
    let export: GroupExport = app.with(|p| p.export_group(&auth.user, &g))?;
    let body = serde_json::to_string_pretty(&export).map_err(|e| crate::error::ApiError::Internal(e.to_string()))?;
    Ok(json_download(body, &export.group))
}

async fn create_label(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>, Json(l): Json<LabelInput>) -> ApiResult<(StatusCode, Json<Label>)> {
    let label = app.with(|p| p.create_label(&auth.user, &g, l))?;
    Ok((StatusCode::CREATED, Json(label)))
}

async fn update_label(
    State(app): State<App>,
    auth: Auth,
    Path((g, l)): Path<(GroupId, LabelId)>,
    Json(input): Json<LabelInput>,
) -> ApiResult<Json<Label>> {
    app.with(|p| p.update_label(&auth.user, &g, &l, input)).map(Json)
}

async fn delete_label(State(app): State<App>, auth: Auth, Path((g, l)): Path<(GroupId, LabelId)>) -> ApiResult<Json<Vec<Label>>> {
    app.with(|p| p.delete_label(&auth.user, &g, &l)).map(Json)
}

async fn add_folder(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>, Json(f): Json<Folder>) -> ApiResult<Json<TreeNode>> {
    app.with(|p| p.add_folder(&auth.user, &g, f.path)).map(Json)
}

async fn review_labels(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>) -> ApiResult<Json<ReviewDelta>> {
    app.with(|p| p.ensure_review_labels(&auth.user, &g)).map(Json)
}

async fn import_ontology(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>, Json(s): Json<OntologySource>) -> ApiResult<Json<Vec<Label>>> {
    app.with(|p| p.import_ontology(&auth.user, &g, &s.source)).map(Json)
}

async fn ground_truth(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>, Json(c): Json<GroundTruthConfig>) -> ApiResult<StatusCode> {
    app.with(|p| p.configure_ground_truth(&auth.user, &g, c))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn add_document(
    State(app): State<App>,
    auth: Auth,
    Path(g): Path<GroupId>,
    Query(n): Query<DocumentName>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<DocumentRef>)> {
    let doc = app.with(|p| p.add_document(&auth.user, &g, &n.name, &body))?;
    Ok((StatusCode::CREATED, Json(doc)))
}

async fn document(State(app): State<App>, auth: Auth, Path((g, d)): Path<(GroupId, DocumentId)>) -> ApiResult<Response> {
    let (doc, path) = app.with(|p| p.document_file(&auth.user, &g, &d))?;
    let bytes = tokio::fs::read(path).await?;
    let disposition = format!("inline; filename=\"{}\"", doc.name.replace(['"', '\\', '/'], "_"));
    Ok(([(header::CONTENT_TYPE, "application/pdf".to_owned()), (header::CONTENT_DISPOSITION, disposition)], Body::from(bytes)).into_response())
}

async fn delete_document(State(app): State<App>, auth: Auth, Path((g, d)): Path<(GroupId, DocumentId)>) -> ApiResult<StatusCode> {
    app.with(|p| p.delete_document(&auth.user, &g, &d))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn threads(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>) -> ApiResult<Json<Vec<CommentThread>>> {
    app.with(|p| p.threads(&auth.user, &g)).map(Json)
}

async fn open_thread(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>, Json(t): Json<NewThread>) -> ApiResult<(StatusCode, Json<CommentThread>)> {
    let thread = app.with(|p| p.post_comment(&auth.user, &g, None, Some(t.anchor), t.text))?;
    Ok((StatusCode::CREATED, Json(thread)))
}

async fn reply(State(app): State<App>, auth: Auth, Path((g, t)): Path<(GroupId, ThreadId)>, Json(r): Json<Reply>) -> ApiResult<Json<CommentThread>> {
    app.with(|p| p.post_comment(&auth.user, &g, Some(&t), None, r.text)).map(Json)
}

async fn resolve(State(app): State<App>, auth: Auth, Path((g, t)): Path<(GroupId, ThreadId)>) -> ApiResult<StatusCode> {
    app.with(|p| p.resolve_thread(&auth.user, &g, &t))?;
    Ok(StatusCode::NO_CONTENT)
}

async fn dashboard(State(app): State<App>, auth: Auth, Path(g): Path<GroupId>) -> ApiResult<Json<Dashboard>> {
    app.with(|p| p.dashboard(&auth.user, &g)).map(Json)
}

async fn question_types() -> Json<Vec<QuestionTypeInfo>> {
    Json(QUESTION_TYPES.iter().map(|d| QuestionTypeInfo { name: d.name }).collect())
}

async fn set_form(
    State(app): State<App>,
    auth: Auth,
    Path((g, l)): Path<(GroupId, LabelId)>,
    Json(form): Json<FormSchema>,
) -> ApiResult<Json<Label>> {
    app.with(|p| p.set_form(&auth.user, &g, &l, Some(form))).map(Json)
}

async fn clear_form(State(app): State<App>, auth: Auth, Path((g, l)): Path<(GroupId, LabelId)>) -> ApiResult<Json<Label>> {
    app.with(|p| p.set_form(&auth.user, &g, &l, None)).map(Json)
}
