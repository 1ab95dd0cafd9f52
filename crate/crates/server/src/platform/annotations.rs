use std::collections::{BTreeMap, BTreeSet};

use framewise_core::annotation::{
    create_annotation, cut_annotation, duplicate_annotation, Annotation, Inverse, Label, ShapeGeometry, UndoAction, VideoMeta,
};
use framewise_core::forms::{
    clear_answer, completeness, owner_for, readable_sets, record_answer, submit, AnswerBook, AnswerSet, AnswerValue,
    Completeness, FormMode, Owner,
};
use framewise_core::ids::{AnnotationId, GroupId, LabelId, QuestionId, UserId, VideoId};
use framewise_core::interchange::{export_annotations, import_annotations, parse_document, AnnotationDocument, GroupExport};
use framewise_core::workflow::{Action, Anchor};
use serde::{Deserialize, Serialize};

use super::{Platform, RandomIds, Result};
use crate::error::ApiError;
use crate::events::{Audience, EventBody};
use crate::state::GroupState;

#[derive(Debug, Clone, Deserialize)]
pub struct NewAnnotation {
    pub video: VideoId,
    pub label: LabelId,
    pub start_frame: u64,
    pub n_frames: u64,
    #[serde(default)]
    pub shape: Option<ShapeGeometry>,
    #[serde(default)]
    pub instance: Option<String>,
}

/// Field changes to one annotation; absent fields stay as they are.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct AnnotationPatch {
    pub start_frame: Option<u64>,
    pub n_frames: Option<u64>,
    /// An empty string clears the instance name.
    pub instance: Option<String>,
    #[serde(default)]
    pub keyframes: BTreeMap<u64, ShapeGeometry>,
    #[serde(default)]
    pub remove_keyframes: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnswerEntry {
    pub annotation: AnnotationId,
    pub owner: Owner,
    #[serde(flatten)]
    pub set: AnswerSet,
}

/// One video's annotation page as the caller may see it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoAnnotations {
    pub video: VideoId,
    pub annotations: Vec<Annotation>,
    pub answers: Vec<AnswerEntry>,
    pub completeness: Completeness,
    /// Annotations with an open comment thread.
    pub flagged: BTreeSet<AnnotationId>,
}

fn work(a: &Annotation) -> Audience {
    Audience::Work { author: a.created_by().clone(), video: a.video_id().clone() }
}

impl Platform {
    fn video_meta(&self, video: &VideoId) -> Result<VideoMeta> {
        let rec = self.state.videos.get(video).ok_or_else(|| ApiError::NotFound(format!("video {video}")))?;
        if rec.meta.frame_count == 0 {
            return Err(ApiError::Conflict("the video has not been probed yet".into()));
        }
        Ok(rec.meta.clone())
    }

    fn label_in(gs: &GroupState, id: &LabelId) -> Result<Label> {
        gs.group.ontology.get(id).cloned().ok_or_else(|| ApiError::NotFound(format!("label {id}")))
    }

    /// The annotation if the actor can see both its video and its author's work.
    fn visible_annotation(&self, actor: &UserId, gs: &GroupState, id: &AnnotationId) -> Result<Annotation> {
        match gs.annotations.get(id) {
            Some(a) if self.state.sees_video(actor, gs, a.video_id()) && self.state.sees_work(actor, gs, a.created_by()) => {
                Ok(a.clone())
            }
            _ => Err(ApiError::NotFound(format!("annotation {id}"))),
        }
    }

    /// Find which group holds an annotation the actor can see.
    pub fn group_of_annotation(&self, actor: &UserId, id: &AnnotationId) -> Result<GroupId> {
        self.state
            .groups
            .values()
            .filter(|gs| gs.annotations.contains_key(id))
            .find(|gs| self.state.group_for(actor, &gs.group.id).is_ok() && self.visible_annotation(actor, gs, id).is_ok())
            .map(|gs| gs.group.id.clone())
            .ok_or_else(|| ApiError::NotFound(format!("annotation {id}")))
    }

    pub fn video_annotations(&self, actor: &UserId, group: &GroupId, video: &VideoId) -> Result<VideoAnnotations> {
        let gs = self.group_state(actor, group)?;
        self.state.require_video(actor, gs, video)?;
        let manages = self.state.manages(actor, gs);
        let annotations: Vec<Annotation> = gs
            .annotations
            .values()
            .filter(|a| a.video_id() == video && self.state.sees_work(actor, gs, a.created_by()))
            .cloned()
            .collect();
        let mut answers = Vec::new();
        let mut with_forms = Vec::new();
        for a in &annotations {
            let form = gs.group.ontology.get(a.label_id()).and_then(|l| l.form.as_ref());
            with_forms.push((a, form));
            let Some(form) = form else { continue };
            for (owner, set) in readable_sets(&gs.answers, form, a.id(), actor, manages) {
                answers.push(AnswerEntry { annotation: a.id().clone(), owner, set: set.clone() });
            }
        }
        let flagged = match self.acting_as(actor, gs) {
            Ok(viewer) => gs.comments.flagged_annotations(&gs.group, &viewer).into_iter().filter(|id| annotations.iter().any(|a| a.id() == id)).collect(),
            Err(_) => BTreeSet::new(),
        };
        Ok(VideoAnnotations {
            video: video.clone(),
            completeness: completeness(&with_forms, &gs.answers, actor),
            annotations,
            answers,
            flagged,
        })
    }

    pub fn annotation(&self, actor: &UserId, id: &AnnotationId) -> Result<Annotation> {
        let group = self.group_of_annotation(actor, id)?;
        self.visible_annotation(actor, &self.state.groups[&group], id)
    }

    fn undo_log(&mut self, group: &GroupId, user: &UserId, video: &VideoId) -> &mut framewise_core::annotation::UndoLog {
        self.undo.entry((group.clone(), user.clone(), video.clone())).or_default()
    }

    /// Record that `video` gained an annotation (NEW/TODO move to DOING).
    fn note_added(&mut self, group: &GroupId, video: &VideoId) {
        if let Some(status) = self.group_mut(group).group.note_annotation_added(video) {
            self.emit(group, Audience::Video(video.clone()), EventBody::StatusChanged { video: video.clone(), status });
        }
    }

    pub fn create_annotation(&mut self, actor: &UserId, group: &GroupId, req: NewAnnotation) -> Result<Annotation> {
        let gs = self.group_state(actor, group)?;
        self.state.require_video(actor, gs, &req.video)?;
        let label = Self::label_in(gs, &req.label)?;
        self.state.require(actor, gs, Action::CreateAnnotation { with_questions: label.has_questions() })?;
        let meta = self.video_meta(&req.video)?;
        let id = AnnotationId::from(RandomIds::make("a"));
        let mut ann = create_annotation(id, &label, &meta, req.start_frame, req.n_frames, req.shape, actor.clone())?;
        if req.instance.is_some() {
            ann.set_instance(req.instance);
        }
        self.group_mut(group).annotations.insert(ann.id().clone(), ann.clone());
        self.undo_log(group, actor, &req.video).record(UndoAction::Created(ann.clone()));
        self.note_added(group, &req.video);
        self.emit(group, work(&ann), EventBody::AnnotationCreated { annotation: ann.clone() });
        self.commit()?;
        Ok(ann)
    }

    /// Check that `actor` may edit (or delete) `id`; returns it with its label.
    fn editable(&self, actor: &UserId, group: &GroupId, id: &AnnotationId, delete: bool) -> Result<(Annotation, Label)> {
        let gs = self.group_state(actor, group)?;
        let ann = self.visible_annotation(actor, gs, id)?;
        let label = Self::label_in(gs, ann.label_id())?;
        let own = ann.created_by() == actor;
        let with_questions = label.has_questions();
        let action = if delete { Action::DeleteAnnotation { own, with_questions } } else { Action::EditAnnotation { own, with_questions } };
        self.state.require(actor, gs, action)?;
        Ok((ann, label))
    }

    pub fn patch_annotation(&mut self, actor: &UserId, id: &AnnotationId, patch: AnnotationPatch) -> Result<Annotation> {
        let group = self.group_of_annotation(actor, id)?;
        let (before, label) = self.editable(actor, &group, id, false)?;
        let meta = self.video_meta(before.video_id())?;
        let mut ann = before.clone();
        if patch.start_frame.is_some() || patch.n_frames.is_some() {
            let start = patch.start_frame.unwrap_or(ann.start_frame());
            let n = patch.n_frames.unwrap_or(ann.n_frames());
            ann.set_span(&meta, start, n)?;
        }
        if let Some(instance) = patch.instance {
            ann.set_instance(Some(instance));
        }
        for (frame, shape) in patch.keyframes {
            ann.set_keyframe(&label, frame, shape)?;
        }
        for frame in patch.remove_keyframes {
            ann.remove_keyframe(frame)?;
        }
        if ann == before {
            return Ok(ann);
        }
        self.group_mut(&group).annotations.insert(id.clone(), ann.clone());
        self.undo_log(&group, actor, ann.video_id()).record(UndoAction::Edited { before });
        self.emit(&group, work(&ann), EventBody::AnnotationUpdated { annotation: ann.clone() });
        self.commit()?;
        Ok(ann)
    }

    /// Split at `frame`; returns both halves.
    pub fn cut_annotation(&mut self, actor: &UserId, id: &AnnotationId, frame: u64) -> Result<(Annotation, Annotation)> {
        let group = self.group_of_annotation(actor, id)?;
        let (before, label) = self.editable(actor, &group, id, false)?;
        self.check_create(actor, &group, &label)?;
        let (first, second) = cut_annotation(&before, frame, RandomIds::make("a").into())?;
        // The new half belongs to whoever cut.
        let second = reown(second, actor, &label, &self.video_meta(before.video_id())?)?;
        let gs = self.group_mut(&group);
        gs.annotations.insert(first.id().clone(), first.clone());
        gs.annotations.insert(second.id().clone(), second.clone());
        self.undo_log(&group, actor, before.video_id())
            .record_batch(vec![UndoAction::Edited { before }, UndoAction::Created(second.clone())]);
        self.emit(&group, work(&first), EventBody::AnnotationUpdated { annotation: first.clone() });
        self.emit(&group, work(&second), EventBody::AnnotationCreated { annotation: second.clone() });
        self.commit()?;
        Ok((first, second))
    }

    fn check_create(&self, actor: &UserId, group: &GroupId, label: &Label) -> Result<()> {
        let gs = self.group_state(actor, group)?;
        self.state.require(actor, gs, Action::CreateAnnotation { with_questions: label.has_questions() })
    }

    /// Copy under a fresh id, owned by the caller. Answers are not copied.
    pub fn duplicate_annotation(&mut self, actor: &UserId, id: &AnnotationId) -> Result<Annotation> {
        let group = self.group_of_annotation(actor, id)?;
        let gs = self.group_state(actor, &group)?;
        let original = self.visible_annotation(actor, gs, id)?;
        let label = Self::label_in(gs, original.label_id())?;
        self.check_create(actor, &group, &label)?;
        let copy = duplicate_annotation(&original, RandomIds::make("a").into());
        let copy = reown(copy, actor, &label, &self.video_meta(original.video_id())?)?;
        self.group_mut(&group).annotations.insert(copy.id().clone(), copy.clone());
        self.undo_log(&group, actor, copy.video_id()).record(UndoAction::Created(copy.clone()));
        self.emit(&group, work(&copy), EventBody::AnnotationCreated { annotation: copy.clone() });
        self.commit()?;
        Ok(copy)
    }

    pub fn delete_annotation(&mut self, actor: &UserId, id: &AnnotationId) -> Result<()> {
        let group = self.group_of_annotation(actor, id)?;
        let (ann, _) = self.editable(actor, &group, id, true)?;
        self.remove_annotation(&group, &ann);
        self.undo_log(&group, actor, ann.video_id()).record(UndoAction::Deleted(ann));
        self.commit()
    }

    fn remove_annotation(&mut self, group: &GroupId, ann: &Annotation) {
        let gs = self.group_mut(group);
        gs.annotations.remove(ann.id());
        gs.answers.remove(ann.id());
        gs.comments.drop_anchor(&Anchor::Annotation(ann.id().clone()));
        for ((g, _, _), log) in self.undo.iter_mut() {
            if g == group {
                log.forget(ann.id());
            }
        }
        let body = EventBody::AnnotationDeleted { id: ann.id().clone(), video: ann.video_id().clone(), version: ann.version() + 1 };
        self.emit(group, work(ann), body);
    }

    /// Revert the caller's latest change on `video`. Returns the ids touched.
    pub fn undo(&mut self, actor: &UserId, group: &GroupId, video: &VideoId) -> Result<Vec<AnnotationId>> {
        let gs = self.group_state(actor, group)?;
        self.state.require_video(actor, gs, video)?;
        let key = (group.clone(), actor.clone(), video.clone());
        let inverses = self.undo.get_mut(&key).ok_or_else(|| ApiError::Conflict("nothing to undo".into()))?.undo().map_err(|e| ApiError::Conflict(e.to_string()))?;
        let mut touched = Vec::new();
        for inv in inverses {
            let id = inv.annotation_id().clone();
            match &inv {
                Inverse::Remove(_) => {
                    if let Some(ann) = self.state.groups[group].annotations.get(&id).cloned() {
                        let gs = self.group_mut(group);
                        gs.annotations.remove(&id);
                        gs.answers.remove(&id);
                        gs.comments.drop_anchor(&Anchor::Annotation(id.clone()));
                        let body = EventBody::AnnotationDeleted { id: id.clone(), video: ann.video_id().clone(), version: ann.version() + 1 };
                        self.emit(group, work(&ann), body);
                    }
                }
                Inverse::Restore(_) => {
                    let gs = self.group_mut(group);
                    let existed = gs.annotations.contains_key(&id);
                    inv.apply(&mut gs.annotations);
                    let ann = gs.annotations[&id].clone();
                    let body = if existed { EventBody::AnnotationUpdated { annotation: ann.clone() } } else { EventBody::AnnotationCreated { annotation: ann.clone() } };
                    self.emit(group, work(&ann), body);
                }
            }
            touched.push(id);
        }
        self.commit()?;
        Ok(touched)
    }

    /// Resolve the form and write action for answering on `id`.
    fn answer_target(&self, actor: &UserId, id: &AnnotationId) -> Result<(GroupId, Annotation, Label)> {
        let group = self.group_of_annotation(actor, id)?;
        let gs = &self.state.groups[&group];
        let ann = self.visible_annotation(actor, gs, id)?;
        let label = Self::label_in(gs, ann.label_id())?;
        let form = label.form.as_ref().ok_or(framewise_core::forms::FormError::FormNotAttached)?;
        let action = match form.mode {
            FormMode::Questions => Action::AnswerQuestions,
            FormMode::Attributes => Action::EditAttributes,
        };
        self.state.require(actor, gs, action)?;
        Ok((group, ann, label))
    }

    fn answers_changed(&mut self, group: &GroupId, actor: &UserId, ann: &Annotation, label: &Label) {
        let form = label.form.as_ref().expect("checked");
        let owner = owner_for(form, actor);
        let answers = self.state.groups[group].answers.set_of(ann.id(), &owner).cloned();
        let audience = match &owner {
            Owner::Shared => work(ann),
            Owner::User(u) => Audience::UserAndManagers(u.clone()),
        };
        self.emit(group, audience, EventBody::AnswersChanged { annotation: ann.id().clone(), video: ann.video_id().clone(), owner, answers });
    }

    pub fn record_answer(&mut self, actor: &UserId, id: &AnnotationId, question: &QuestionId, value: AnswerValue) -> Result<AnswerSet> {
        let (group, ann, label) = self.answer_target(actor, id)?;
        let set = record_answer(&mut self.group_mut(&group).answers, label.form.as_ref(), id, actor, question, value)?.clone();
        self.answers_changed(&group, actor, &ann, &label);
        self.commit()?;
        Ok(set)
    }

    pub fn clear_answer(&mut self, actor: &UserId, id: &AnnotationId, question: &QuestionId) -> Result<()> {
        let (group, ann, label) = self.answer_target(actor, id)?;
        clear_answer(&mut self.group_mut(&group).answers, label.form.as_ref(), id, actor, question)?;
        self.answers_changed(&group, actor, &ann, &label);
        self.commit()
    }

    pub fn submit_answers(&mut self, actor: &UserId, id: &AnnotationId) -> Result<()> {
        let (group, ann, label) = self.answer_target(actor, id)?;
        submit(&mut self.group_mut(&group).answers, label.form.as_ref(), id, actor)?;
        self.answers_changed(&group, actor, &ann, &label);
        self.commit()
    }

    /// Answers on one annotation the caller may read.
    pub fn answers_of(&self, actor: &UserId, id: &AnnotationId) -> Result<Vec<AnswerEntry>> {
        let group = self.group_of_annotation(actor, id)?;
        let gs = &self.state.groups[&group];
        let ann = self.visible_annotation(actor, gs, id)?;
        let Some(form) = gs.group.ontology.get(ann.label_id()).and_then(|l| l.form.as_ref()) else { return Ok(Vec::new()) };
        let manages = self.state.manages(actor, gs);
        Ok(readable_sets(&gs.answers, form, id, actor, manages)
            .into_iter()
            .map(|(owner, set)| AnswerEntry { annotation: id.clone(), owner, set: set.clone() })
            .collect())
    }

    /// The canonical document of one video. Managers export everyone's
    /// work; other members export what they can see.
    pub fn export_video(&self, actor: &UserId, group: &GroupId, video: &VideoId) -> Result<AnnotationDocument> {
        let gs = self.group_state(actor, group)?;
        self.state.require(actor, gs, Action::DownloadAnnotations)?;
        self.state.require_video(actor, gs, video)?;
        Ok(self.export_one(actor, gs, video))
    }

    fn export_one(&self, actor: &UserId, gs: &GroupState, video: &VideoId) -> AnnotationDocument {
        let meta = self.state.videos.get(video).map(|r| r.meta.clone()).unwrap_or_else(|| {
            VideoMeta::new(video.clone(), video.to_string(), framewise_core::annotation::FrameRate::integer(25).expect("valid"), 0)
        });
        let manages = self.state.manages(actor, gs);
        let anns: Vec<&Annotation> = gs
            .annotations
            .values()
            .filter(|a| a.video_id() == video && (manages || self.state.sees_work(actor, gs, a.created_by())))
            .collect();
        let book = if manages { gs.answers.clone() } else { self.readable_book(actor, gs, &anns) };
        export_annotations(&meta, anns, &gs.group.ontology, &book)
    }

    fn readable_book(&self, actor: &UserId, gs: &GroupState, anns: &[&Annotation]) -> AnswerBook {
        let mut book = AnswerBook::new();
        for a in anns {
            let Some(form) = gs.group.ontology.get(a.label_id()).and_then(|l| l.form.as_ref()) else { continue };
            for (owner, set) in readable_sets(&gs.answers, form, a.id(), actor, false) {
                book.put(a.id(), owner, set.clone());
            }
        }
        book
    }

    pub fn export_group(&self, actor: &UserId, group: &GroupId) -> Result<GroupExport> {
        let gs = self.group_state(actor, group)?;
        self.state.require(actor, gs, Action::DownloadAnnotations)?;
        let videos = self.state.visible_videos(actor, gs).iter().map(|v| self.export_one(actor, gs, v)).collect();
        Ok(GroupExport { group: gs.group.name.clone(), exported_at: self.now(), videos })
    }

    /// Import a canonical document into `video`. Labels the group lacks are
    /// created; answers by other users need manager rights.
    pub fn import_video(&mut self, actor: &UserId, group: &GroupId, video: &VideoId, json: &str) -> Result<Vec<Annotation>> {
        let doc = parse_document(json)?;
        let gs = self.group_state(actor, group)?;
        self.state.require_video(actor, gs, video)?;
        let meta = self.video_meta(video)?;
        let mut ontology = gs.group.ontology.clone();
        let outcome = import_annotations(&doc, &meta, &mut ontology, |id| gs.annotations.contains_key(id), &mut RandomIds, actor)?;
        let with_questions = outcome.annotations.iter().any(|a| ontology.get(a.label_id()).is_some_and(Label::has_questions));
        self.state.require(actor, gs, Action::CreateAnnotation { with_questions })?;
        if !outcome.created_labels.is_empty() {
            let with_questions = outcome.created_labels.iter().any(Label::has_questions);
            self.state.require(actor, gs, Action::CreateLabel { with_questions })?;
        }
        let foreign = outcome.answers.iter().any(|(_, e)| e.per_user.keys().any(|u| u != actor));
        if foreign && !self.state.manages(actor, gs) {
            return Err(ApiError::PermissionDenied);
        }

        let gs = self.group_mut(group);
        gs.group.ontology = ontology;
        for (id, entry) in outcome.answers.iter() {
            if let Some(shared) = &entry.shared {
                gs.answers.put(id, Owner::Shared, shared.clone());
            }
            for (u, set) in &entry.per_user {
                gs.answers.put(id, Owner::User(u.clone()), set.clone());
            }
        }
        for a in &outcome.annotations {
            gs.annotations.insert(a.id().clone(), a.clone());
        }
        self.undo_log(group, actor, video).record_batch(outcome.annotations.iter().cloned().map(UndoAction::Created).collect());
        if !outcome.created_labels.is_empty() {
            self.emit(group, Audience::Members, EventBody::OntologyChanged);
        }
        if !outcome.annotations.is_empty() {
            self.note_added(group, video);
        }
        for a in &outcome.annotations {
            self.emit(group, work(a), EventBody::AnnotationCreated { annotation: a.clone() });
        }
        self.commit()?;
        Ok(outcome.annotations)
    }
}

/// Rebuild `a` with `owner` as its creator.
fn reown(a: Annotation, owner: &UserId, label: &Label, video: &VideoMeta) -> Result<Annotation> {
    if a.created_by() == owner {
        return Ok(a);
    }
    let rebuilt = framewise_core::annotation::restore_annotation(
        a.id().clone(),
        label,
        video,
        a.start_frame(),
        a.n_frames(),
        a.instance().map(str::to_owned),
        a.keyframes().clone(),
        owner.clone(),
    )?;
    Ok(rebuilt)
}
