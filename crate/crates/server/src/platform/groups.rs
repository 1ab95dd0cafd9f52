use std::collections::BTreeSet;

use framewise_core::annotation::{Color, Label, LabelKind};
use framewise_core::evaluation::{configure_ground_truth, maybe_level_up, progress, score, GroundTruthConfig, ScoreReport};
use framewise_core::forms::{attach_form, detach_form, FormSchema};
use framewise_core::ids::{DocumentId, GroupId, LabelId, ThreadId, UserId, VideoId};
use framewise_core::ontology::TreeNode;
use framewise_core::workflow::{
    ensure_review_labels, import_ontology, is_pdf, Action, Anchor, Comment, CommentThread, DocumentRef, Group, GroupType,
    Membership, ReviewDelta, VideoStatus,
};
use framewise_media::IngestState;
use serde::{Deserialize, Serialize};

use super::{Platform, RandomIds, Result};
use crate::error::ApiError;
use crate::events::{Audience, EventBody};
use crate::state::{GroupState, Role};

#[derive(Debug, Clone, Deserialize)]
pub struct NewGroup {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub gtype: GroupType,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSummary {
    pub id: GroupId,
    pub name: String,
    pub gtype: GroupType,
    pub is_manager: bool,
    pub level: Option<u32>,
    pub videos: usize,
    pub members: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberView {
    pub user: UserId,
    pub email: String,
    #[serde(flatten)]
    pub membership: Membership,
    /// Share of visible videos that are DONE; shown to the member and to managers.
    pub progress: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoEntry {
    pub id: VideoId,
    pub name: String,
    pub level: u32,
    pub status: VideoStatus,
    pub assigned: bool,
    pub fps: framewise_core::annotation::FrameRate,
    pub frame_count: u64,
    pub duration_s: f64,
    pub width: u32,
    pub height: u32,
    pub ingest: IngestState,
    pub protocol_id: Option<framewise_core::ids::ProtocolId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupView {
    pub id: GroupId,
    pub name: String,
    pub description: String,
    pub gtype: GroupType,
    /// The caller's membership; absent for administrators outside the group.
    pub me: Option<Membership>,
    pub members: Vec<MemberView>,
    pub videos: Vec<VideoEntry>,
    pub labels: Vec<Label>,
    pub tree: TreeNode,
    pub documents: Vec<DocumentRef>,
    pub ground_truth: Option<GroundTruthConfig>,
}

/// Label fields a client may set. The kind is fixed after creation.
#[derive(Debug, Clone, Deserialize)]
pub struct LabelInput {
    pub name: String,
    pub kind: LabelKind,
    #[serde(default)]
    pub color: Option<Color>,
    #[serde(default)]
    pub group_path: Vec<String>,
    #[serde(default)]
    pub form: Option<FormSchema>,
}

fn has_questions(form: Option<&FormSchema>) -> bool {
    form.is_some_and(FormSchema::is_questions)
}

impl Platform {
    pub(super) fn group_state(&self, actor: &UserId, group: &GroupId) -> Result<&GroupState> {
        self.state.group_for(actor, group)
    }

    /// Mutable access after the caller's checks passed.
    pub(super) fn group_mut(&mut self, group: &GroupId) -> &mut GroupState {
        self.state.groups.get_mut(group).expect("group checked by caller")
    }

    /// Who the core engine should see acting: the actor when a member,
    /// otherwise (administrators) one of the group's managers.
    pub(super) fn acting_as(&self, actor: &UserId, gs: &GroupState) -> Result<UserId> {
        if gs.group.is_member(actor) {
            return Ok(actor.clone());
        }
        if self.state.is_admin(actor) {
            if let Some((m, _)) = gs.group.members().iter().find(|(_, m)| m.is_manager) {
                return Ok(m.clone());
            }
        }
        Err(ApiError::PermissionDenied)
    }

    fn check(&self, actor: &UserId, group: &GroupId, action: Action) -> Result<()> {
        let gs = self.group_state(actor, group)?;
        self.state.require(actor, gs, action)
    }

    pub fn create_group(&mut self, actor: &UserId, req: NewGroup) -> Result<GroupView> {
        self.state.require_role(actor, Role::GroupCreator)?;
        if req.gtype == GroupType::Private {
            return Err(ApiError::Invalid("private groups are created with the account".into()));
        }
        if req.name.trim().is_empty() {
            return Err(ApiError::Invalid("group names must be non-empty".into()));
        }
        let id = GroupId::from(RandomIds::make("g"));
        let mut group = Group::new(id.clone(), req.name.trim(), req.gtype, actor.clone());
        group.description = req.description;
        let now = self.now();
        self.state.groups.insert(id.clone(), GroupState::new(group, now));
        self.commit()?;
        self.group_view(actor, &id)
    }

    pub fn list_groups(&self, actor: &UserId) -> Result<Vec<GroupSummary>> {
        let admin = self.state.is_admin(actor);
        Ok(self
            .state
            .groups
            .values()
            .filter(|gs| admin || gs.group.is_member(actor))
            .map(|gs| {
                let m = gs.group.membership(actor).ok();
                GroupSummary {
                    id: gs.group.id.clone(),
                    name: gs.group.name.clone(),
                    gtype: gs.group.gtype,
                    is_manager: self.state.manages(actor, gs),
                    level: m.map(|m| m.level),
                    videos: self.state.visible_videos(actor, gs).len(),
                    members: gs.group.members().len(),
                }
            })
            .collect())
    }

    pub fn group_view(&self, actor: &UserId, group: &GroupId) -> Result<GroupView> {
        let gs = self.group_state(actor, group)?;
        let sees_all = self.state.sees_all(actor, gs);
        let members = gs
            .group
            .members()
            .iter()
            .map(|(u, m)| MemberView {
                user: u.clone(),
                email: self.state.users.get(u).map(|a| a.email.clone()).unwrap_or_default(),
                membership: m.clone(),
                progress: (sees_all || u == actor).then(|| progress(&gs.group, u).ok()).flatten(),
            })
            .collect();
        Ok(GroupView {
            id: gs.group.id.clone(),
            name: gs.group.name.clone(),
            description: gs.group.description.clone(),
            gtype: gs.group.gtype,
            me: gs.group.membership(actor).ok().cloned(),
            members,
            videos: self.video_entries(actor, gs),
            labels: gs.group.ontology.labels().to_vec(),
            tree: gs.group.ontology.tree(),
            documents: gs.group.documents.clone(),
            ground_truth: if sees_all { gs.group.ground_truth.clone() } else { None },
        })
    }

    fn video_entries(&self, actor: &UserId, gs: &GroupState) -> Vec<VideoEntry> {
        self.state
            .visible_videos(actor, gs)
            .into_iter()
            .filter_map(|id| {
                let gv = gs.group.videos().get(&id)?;
                let rec = self.state.videos.get(&id)?;
                Some(VideoEntry {
                    name: rec.meta.name.clone(),
                    level: gv.level,
                    status: gv.status,
                    assigned: gs.group.is_assigned(actor, &id),
                    fps: rec.meta.fps,
                    frame_count: rec.meta.frame_count,
                    duration_s: rec.meta.duration_s,
                    width: rec.meta.source_width,
                    height: rec.meta.source_height,
                    ingest: rec.job.state.clone(),
                    protocol_id: rec.meta.protocol_id.clone(),
                    id,
                })
            })
            .collect()
    }

    pub fn list_group_videos(&self, actor: &UserId, group: &GroupId) -> Result<Vec<VideoEntry>> {
        let gs = self.group_state(actor, group)?;
        Ok(self.video_entries(actor, gs))
    }

    pub fn update_group(&mut self, actor: &UserId, group: &GroupId, name: Option<String>, description: Option<String>) -> Result<GroupView> {
        self.check(actor, group, Action::EditGroup)?;
        let g = &mut self.group_mut(group).group;
        if let Some(name) = name.filter(|n| !n.trim().is_empty()) {
            g.name = name.trim().to_owned();
        }
        if let Some(d) = description {
            g.description = d;
        }
        self.commit()?;
        self.group_view(actor, group)
    }

    /// Delete a shared group and everything scoped to it. Videos stay.
    pub fn delete_group(&mut self, actor: &UserId, group: &GroupId) -> Result<()> {
        let gs = self.group_state(actor, group)?;
        if !self.state.manages(actor, gs) {
            return Err(ApiError::PermissionDenied);
        }
        if gs.group.gtype == GroupType::Private {
            return Err(ApiError::Conflict("private groups live as long as their account".into()));
        }
        let docs: Vec<DocumentId> = gs.group.documents.iter().map(|d| d.id.clone()).collect();
        self.state.groups.remove(group);
        for v in self.state.videos.values_mut() {
            v.groups.remove(group);
        }
        for d in docs {
            let _ = std::fs::remove_file(self.document_path(&d));
        }
        self.undo.retain(|(g, _, _), _| g != group);
        self.heartbeats.retain(|(_, g, _), _| g != group);
        self.hub.drop_group(group);
        self.commit()
    }

    pub fn add_member(&mut self, actor: &UserId, group: &GroupId, email: &str, membership: Membership) -> Result<GroupView> {
        self.check(actor, group, Action::ManageMembers)?;
        let user = self.state.user_by_email(email).ok_or_else(|| ApiError::NotFound(format!("user {email}")))?.id.clone();
        self.manager_grant_check(actor, group, &membership)?;
        self.group_mut(group).group.add_member(user, membership)?;
        self.emit(group, Audience::Members, EventBody::MembersChanged);
        self.commit()?;
        self.group_view(actor, group)
    }

    /// Only managers hand out manager status.
    fn manager_grant_check(&self, actor: &UserId, group: &GroupId, m: &Membership) -> Result<()> {
        let gs = self.group_state(actor, group)?;
        if m.is_manager && !self.state.manages(actor, gs) {
            return Err(ApiError::PermissionDenied);
        }
        Ok(())
    }

    pub fn update_member(&mut self, actor: &UserId, group: &GroupId, user: &UserId, membership: Membership) -> Result<GroupView> {
        self.check(actor, group, Action::ManageMembers)?;
        self.manager_grant_check(actor, group, &membership)?;
        let gs = self.group_state(actor, group)?;
        let was_manager = gs.group.is_manager(user);
        if was_manager && !self.state.manages(actor, gs) {
            return Err(ApiError::PermissionDenied);
        }
        if was_manager && !membership.is_manager && self.last_manager(gs, user) {
            return Err(ApiError::Conflict("a group keeps at least one manager".into()));
        }
        self.group_mut(group).group.update_member(user, membership)?;
        self.emit(group, Audience::Members, EventBody::MembersChanged);
        self.commit()?;
        self.group_view(actor, group)
    }

    fn last_manager(&self, gs: &GroupState, user: &UserId) -> bool {
        gs.group.members().iter().all(|(u, m)| u == user || !m.is_manager)
    }

    pub fn remove_member(&mut self, actor: &UserId, group: &GroupId, user: &UserId) -> Result<()> {
        let gs = self.group_state(actor, group)?;
        // Anyone may leave; removing others takes the permission.
        if actor != user {
            self.state.require(actor, gs, Action::ManageMembers)?;
            if gs.group.is_manager(user) && !self.state.manages(actor, gs) {
                return Err(ApiError::PermissionDenied);
            }
        }
        if gs.group.is_manager(user) && self.last_manager(gs, user) {
            return Err(ApiError::Conflict("a group keeps at least one manager".into()));
        }
        self.group_mut(group).group.remove_member(user)?;
        self.undo.retain(|(g, u, _), _| !(g == group && u == user));
        self.hub.leave(group, user);
        self.emit(group, Audience::Members, EventBody::MembersChanged);
        self.commit()
    }

    pub fn assign(&mut self, actor: &UserId, group: &GroupId, user: &UserId, video: &VideoId, assigned: bool) -> Result<()> {
        self.check(actor, group, Action::ManageAccess)?;
        self.group_mut(group).group.assign(user, video, assigned)?;
        self.emit(group, Audience::UserAndManagers(user.clone()), EventBody::VideosChanged);
        self.commit()
    }

    pub fn set_member_level(&mut self, actor: &UserId, group: &GroupId, user: &UserId, level: u32) -> Result<()> {
        self.check(actor, group, Action::ManageAccess)?;
        self.group_mut(group).group.set_level(user, level)?;
        self.emit(group, Audience::UserAndManagers(user.clone()), EventBody::LevelChanged { user: user.clone(), level });
        self.commit()
    }

    pub fn set_video_level(&mut self, actor: &UserId, group: &GroupId, video: &VideoId, level: u32) -> Result<()> {
        self.check(actor, group, Action::ManageAccess)?;
        self.group_mut(group).group.set_video_level(video, level)?;
        self.emit(group, Audience::Members, EventBody::VideosChanged);
        self.commit()
    }

    /// Take a video out of the group. The stored file stays.
    pub fn remove_video_from_group(&mut self, actor: &UserId, group: &GroupId, video: &VideoId) -> Result<()> {
        let gs = self.group_state(actor, group)?;
        self.state.require(actor, gs, Action::RemoveVideo)?;
        self.state.require_video(actor, gs, video)?;
        self.drop_video_from_group(group, video);
        if let Some(rec) = self.state.videos.get_mut(video) {
            rec.groups.remove(group);
        }
        self.commit()
    }

    /// Move a video through the status workflow. Reaching DONE runs the
    /// level-up check for every annotator who can see the video.
    pub fn set_status(&mut self, actor: &UserId, group: &GroupId, video: &VideoId, to: VideoStatus) -> Result<VideoStatus> {
        let gs = self.group_state(actor, group)?;
        self.state.require_video(actor, gs, video)?;
        let as_user = self.acting_as(actor, gs)?;
        let status = self.group_mut(group).group.transition_status(video, to, &as_user)?;
        self.emit(group, Audience::Video(video.clone()), EventBody::StatusChanged { video: video.clone(), status });
        if status == VideoStatus::Done {
            self.run_level_checks(group, video);
        }
        self.commit()?;
        Ok(status)
    }

    fn run_level_checks(&mut self, group: &GroupId, video: &VideoId) {
        let gs = self.group_mut(group);
        let candidates: Vec<UserId> = gs
            .group
            .members()
            .iter()
            .filter(|(_, m)| !m.is_manager)
            .map(|(u, _)| u.clone())
            .filter(|u| gs.group.can_see_video(u, video))
            .collect();
        let mut events = Vec::new();
        for user in candidates {
            let Ok(outcome) = maybe_level_up(&mut gs.group, &user, gs.annotations.values(), &gs.answers) else { continue };
            if let Some(report) = outcome.report {
                events.push((user.clone(), EventBody::ScoreReport { report }));
            }
            if outcome.new_level != outcome.old_level {
                events.push((user.clone(), EventBody::LevelChanged { user: user.clone(), level: outcome.new_level }));
                events.push((user.clone(), EventBody::VideosChanged));
            }
        }
        for (user, body) in events {
            self.emit(group, Audience::UserAndManagers(user), body);
        }
    }

    pub fn configure_ground_truth(&mut self, actor: &UserId, group: &GroupId, config: GroundTruthConfig) -> Result<()> {
        let gs = self.group_state(actor, group)?;
        let as_user = self.acting_as(actor, gs)?;
        configure_ground_truth(&mut self.group_mut(group).group, &as_user, config)?;
        self.commit()
    }

    /// Score of `user` against the ground truth. Members read their own;
    /// those who see everything read anyone's.
    pub fn score_of(&self, actor: &UserId, group: &GroupId, user: &UserId) -> Result<ScoreReport> {
        let gs = self.group_state(actor, group)?;
        if actor != user && !self.state.sees_all(actor, gs) {
            return Err(ApiError::PermissionDenied);
        }
        Ok(score(&gs.group, user, gs.annotations.values(), &gs.answers)?)
    }

    pub fn progress_of(&self, actor: &UserId, group: &GroupId, user: &UserId) -> Result<f64> {
        let gs = self.group_state(actor, group)?;
        if actor != user && !self.state.sees_all(actor, gs) {
            return Err(ApiError::PermissionDenied);
        }
        Ok(progress(&gs.group, user)?)
    }

    pub fn create_label(&mut self, actor: &UserId, group: &GroupId, input: LabelInput) -> Result<Label> {
        let with_questions = has_questions(input.form.as_ref());
        self.check(actor, group, Action::CreateLabel { with_questions })?;
        if let Some(form) = &input.form {
            form.validate()?;
        }
        let mut label = Label::new(RandomIds::make("l"), input.name.trim(), input.kind);
        label.color = input.color.unwrap_or(label.color);
        label.group_path = input.group_path;
        label.form = input.form;
        self.group_mut(group).group.ontology.add_label(label.clone())?;
        self.emit(group, Audience::Members, EventBody::OntologyChanged);
        self.commit()?;
        Ok(label)
    }

    fn label(&self, actor: &UserId, group: &GroupId, label: &LabelId) -> Result<Label> {
        let gs = self.group_state(actor, group)?;
        gs.group.ontology.get(label).cloned().ok_or_else(|| ApiError::NotFound(format!("label {label}")))
    }

    /// Rename, recolor or move a label. Its form is managed separately.
    pub fn update_label(&mut self, actor: &UserId, group: &GroupId, id: &LabelId, input: LabelInput) -> Result<Label> {
        let old = self.label(actor, group, id)?;
        self.check(actor, group, Action::EditLabel { with_questions: old.has_questions() })?;
        if input.kind != old.kind {
            return Err(ApiError::Invalid("a label's kind cannot change".into()));
        }
        let mut label = old.clone();
        label.name = input.name.trim().to_owned();
        label.color = input.color.unwrap_or(old.color);
        label.group_path = input.group_path;
        let ontology = &mut self.group_mut(group).group.ontology;
        ontology.add_folder(&label.group_path)?;
        ontology.update_label(label.clone())?;
        self.emit(group, Audience::Members, EventBody::OntologyChanged);
        self.commit()?;
        Ok(label)
    }

    /// Attach, replace or remove the form of a label. Answers are pruned to
    /// the new schema.
    pub fn set_form(&mut self, actor: &UserId, group: &GroupId, id: &LabelId, form: Option<FormSchema>) -> Result<Label> {
        let old = self.label(actor, group, id)?;
        let questions = old.has_questions() || has_questions(form.as_ref());
        let action = if questions { Action::BuildQuestionForm } else { Action::EditLabel { with_questions: false } };
        self.check(actor, group, action)?;
        let gs = self.group_mut(group);
        let ids: Vec<_> = gs.annotations.values().filter(|a| a.label_id() == id).map(|a| a.id().clone()).collect();
        let mut label = old;
        match form {
            Some(schema) => attach_form(&mut label, schema, &mut gs.answers, ids.iter())?,
            None => detach_form(&mut label, &mut gs.answers, ids.iter()),
        }
        gs.group.ontology.update_label(label.clone())?;
        self.emit(group, Audience::Members, EventBody::OntologyChanged);
        self.commit()?;
        Ok(label)
    }

    /// Delete a label, its reviewer twins and every annotation using them.
    pub fn delete_label(&mut self, actor: &UserId, group: &GroupId, id: &LabelId) -> Result<Vec<Label>> {
        let old = self.label(actor, group, id)?;
        self.check(actor, group, Action::DeleteLabel { with_questions: old.has_questions() })?;
        let gs = self.group_mut(group);
        let removed = gs.group.ontology.remove_label(id)?;
        let gone_labels: BTreeSet<&LabelId> = removed.iter().map(|l| &l.id).collect();
        let gone: Vec<_> = gs.annotations.values().filter(|a| gone_labels.contains(a.label_id())).cloned().collect();
        for a in &gone {
            gs.annotations.remove(a.id());
            gs.answers.remove(a.id());
            gs.comments.drop_anchor(&Anchor::Annotation(a.id().clone()));
        }
        for log in self.undo.iter_mut().filter(|((g, _, _), _)| g == group).map(|(_, l)| l) {
            gone.iter().for_each(|a| log.forget(a.id()));
        }
        for a in gone {
            let audience = Audience::Work { author: a.created_by().clone(), video: a.video_id().clone() };
            let body = EventBody::AnnotationDeleted { id: a.id().clone(), video: a.video_id().clone(), version: a.version() + 1 };
            self.emit(group, audience, body);
        }
        self.emit(group, Audience::Members, EventBody::OntologyChanged);
        self.commit()?;
        Ok(removed)
    }

    pub fn add_folder(&mut self, actor: &UserId, group: &GroupId, path: Vec<String>) -> Result<TreeNode> {
        self.check(actor, group, Action::CreateLabel { with_questions: false })?;
        let ontology = &mut self.group_mut(group).group.ontology;
        ontology.add_folder(&path)?;
        let tree = ontology.tree();
        self.emit(group, Audience::Members, EventBody::OntologyChanged);
        self.commit()?;
        Ok(tree)
    }

    /// Give every label its reviewer twin.
    pub fn ensure_review_labels(&mut self, actor: &UserId, group: &GroupId) -> Result<ReviewDelta> {
        self.check(actor, group, Action::CreateLabel { with_questions: false })?;
        let delta = ensure_review_labels(&mut self.group_mut(group).group.ontology, &mut RandomIds)?;
        if !delta.is_empty() {
            self.emit(group, Audience::Members, EventBody::OntologyChanged);
            self.commit()?;
        }
        Ok(delta)
    }

    /// Copy the ontology of `source` (which the actor must belong to).
    pub fn import_ontology(&mut self, actor: &UserId, group: &GroupId, source: &GroupId) -> Result<Vec<Label>> {
        let src = self.group_state(actor, source)?.group.ontology.clone();
        let with_questions = src.labels().iter().any(Label::has_questions);
        self.check(actor, group, Action::CreateLabel { with_questions })?;
        let mut target = self.group_state(actor, group)?.group.ontology.clone();
        let copies = import_ontology(&src, &mut target, &mut RandomIds)?;
        self.group_mut(group).group.ontology = target;
        self.emit(group, Audience::Members, EventBody::OntologyChanged);
        self.commit()?;
        Ok(copies)
    }

    pub(super) fn document_path(&self, id: &DocumentId) -> std::path::PathBuf {
        self.policy.media_dir.join("documents").join(format!("{id}.pdf"))
    }

    pub fn add_document(&mut self, actor: &UserId, group: &GroupId, name: &str, bytes: &[u8]) -> Result<DocumentRef> {
        self.check(actor, group, Action::EditGroup)?;
        if !is_pdf(bytes) {
            return Err(ApiError::Invalid("documents must be PDF files".into()));
        }
        let doc = DocumentRef { id: RandomIds::make("d").into(), name: name.to_owned(), size: bytes.len() as u64 };
        let path = self.document_path(&doc.id);
        std::fs::create_dir_all(path.parent().expect("has parent"))?;
        std::fs::write(&path, bytes)?;
        self.group_mut(group).group.documents.push(doc.clone());
        self.commit()?;
        Ok(doc)
    }

    /// Path of a group document the actor may read.
    pub fn document_file(&self, actor: &UserId, group: &GroupId, id: &DocumentId) -> Result<(DocumentRef, std::path::PathBuf)> {
        let gs = self.group_state(actor, group)?;
        let doc = gs.group.documents.iter().find(|d| &d.id == id).ok_or_else(|| ApiError::NotFound(format!("document {id}")))?;
        Ok((doc.clone(), self.document_path(id)))
    }

    pub fn delete_document(&mut self, actor: &UserId, group: &GroupId, id: &DocumentId) -> Result<()> {
        self.document_file(actor, group, id)?;
        self.check(actor, group, Action::EditGroup)?;
        self.group_mut(group).group.documents.retain(|d| &d.id != id);
        let _ = std::fs::remove_file(self.document_path(id));
        self.commit()
    }

    fn anchor_target(&self, actor: &UserId, gs: &GroupState, anchor: &Anchor) -> Option<(Option<VideoId>, Option<UserId>)> {
        match anchor {
            Anchor::Group => Some((None, None)),
            Anchor::Video(v) => self.state.sees_video(actor, gs, v).then(|| (Some(v.clone()), None)),
            Anchor::Annotation(a) => {
                let a = gs.annotations.get(a)?;
                let ok = self.state.sees_video(actor, gs, a.video_id()) && self.state.sees_work(actor, gs, a.created_by());
                ok.then(|| (Some(a.video_id().clone()), Some(a.created_by().clone())))
            }
        }
    }

    pub fn threads(&self, actor: &UserId, group: &GroupId) -> Result<Vec<CommentThread>> {
        let gs = self.group_state(actor, group)?;
        let viewer = self.acting_as(actor, gs)?;
        Ok(gs.comments.visible_to(&gs.group, &viewer, |a| self.anchor_target(actor, gs, a).is_some()))
    }

    /// Open a thread, or reply to `thread` when given.
    pub fn post_comment(&mut self, actor: &UserId, group: &GroupId, thread: Option<&ThreadId>, anchor: Option<Anchor>, text: String) -> Result<CommentThread> {
        let gs = self.group_state(actor, group)?;
        let anchor = match (thread, anchor) {
            (Some(t), _) => gs.comments.thread(t).ok_or_else(|| ApiError::NotFound(format!("thread {t}")))?.anchor.clone(),
            (None, Some(a)) => a,
            (None, None) => return Err(ApiError::Invalid("a new thread needs an anchor".into())),
        };
        let target = self.anchor_target(actor, gs, &anchor);
        let visible = target.is_some();
        let comment = Comment { author: actor.clone(), at: self.now(), text };
        let comments = &mut self.group_mut(group).comments;
        let posted = match thread {
            Some(t) => comments.reply(t, comment.clone(), visible)?.clone(),
            None => comments.open(RandomIds::make("t").into(), anchor.clone(), comment.clone(), visible)?.clone(),
        };
        let (video, work_of) = target.expect("visible");
        let audience = Audience::Comment { author: actor.clone(), video, work_of };
        self.emit(group, audience, EventBody::CommentPosted { thread: posted.id.clone(), anchor, comment });
        self.commit()?;
        Ok(posted)
    }

    /// Resolve a thread: its opener or a reviewer.
    pub fn resolve_thread(&mut self, actor: &UserId, group: &GroupId, thread: &ThreadId) -> Result<()> {
        let gs = self.group_state(actor, group)?;
        let t = gs.comments.thread(thread).ok_or_else(|| ApiError::NotFound(format!("thread {thread}")))?;
        let target = self.anchor_target(actor, gs, &t.anchor).ok_or_else(|| ApiError::NotFound(format!("thread {thread}")))?;
        let opener = &t.comments[0].author;
        if opener != actor && !self.state.can(actor, gs, Action::Review) {
            return Err(ApiError::PermissionDenied);
        }
        let (opener, anchor) = (opener.clone(), t.anchor.clone());
        self.group_mut(group).comments.resolve(thread)?;
        let audience = Audience::Comment { author: opener, video: target.0, work_of: target.1 };
        self.emit(group, audience, EventBody::ThreadResolved { thread: thread.clone(), anchor });
        self.commit()
    }
}
