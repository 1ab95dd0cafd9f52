//! Ground-truth scoring, progress and automatic level-up.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::Annotation;
use crate::forms::{compare_answers, AnswerBook, AnswerSet, Comparison};
use crate::ids::{AnnotationId, GroupId, UserId, VideoId};
use crate::workflow::{Action, Group, VideoStatus, WorkflowError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error("no ground truth configured or recorded")]
    NoGroundTruth,
    #[error("threshold {0} is outside 0..=100")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
}

/// Whose answers count as truth and what score earns the next level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthConfig {
    pub source_user: UserId,
    pub threshold_pct: f64,
    /// Overrides of `threshold_pct` keyed by the annotator's current level.
    #[serde(default)]
    pub per_level: BTreeMap<u32, f64>,
}

impl GroundTruthConfig {
    pub fn new(source_user: UserId, threshold_pct: f64) -> Self {
        GroundTruthConfig { source_user, threshold_pct, per_level: BTreeMap::new() }
    }

    pub fn threshold_for(&self, level: u32) -> f64 {
        self.per_level.get(&level).copied().unwrap_or(self.threshold_pct)
    }

    fn validate(&self) -> Result<(), EvaluationError> {
        let valid = |t: f64| (0.0..=100.0).contains(&t);
        if let Some(bad) = std::iter::once(self.threshold_pct).chain(self.per_level.values().copied()).find(|t| !valid(*t)) {
            return Err(EvaluationError::InvalidThreshold(bad));
        }
        Ok(())
    }
}

/// Set the group's ground truth on behalf of `actor` (managers only).
pub fn configure_ground_truth(group: &mut Group, actor: &UserId, config: GroundTruthConfig) -> Result<(), EvaluationError> {
    if !group.check(actor, Action::ConfigureGroundTruth) {
        return Err(WorkflowError::PermissionDenied.into());
    }
    config.validate()?;
    group.membership(&config.source_user)?;
    group.ground_truth = Some(config);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoScore {
    pub video: VideoId,
    pub n_correct: usize,
    pub n_total: usize,
    pub score_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub user: UserId,
    pub group: GroupId,
    pub level: u32,
    pub n_correct: usize,
    pub n_total: usize,
    pub score_pct: f64,
    pub leveled_up: bool,
    pub per_video: Vec<VideoScore>,
}

fn ratio_pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Share of `user`'s visible videos that are DONE, in percent. An empty
/// visible set counts as complete.
pub fn progress(group: &Group, user: &UserId) -> Result<f64, WorkflowError> {
    let (done, total) = progress_counts(group, user)?;
    Ok(if total == 0 { 100.0 } else { 100.0 * done as f64 / total as f64 })
}

fn progress_counts(group: &Group, user: &UserId) -> Result<(usize, usize), WorkflowError> {
    let visible = group.visible_videos(user)?;
    let done = visible.iter().filter(|v| group.videos()[*v].status == VideoStatus::Done).count();
    Ok((done, visible.len()))
}

/// Compare `user`'s Questions-form answers with the ground-truth user's on
/// every video visible to `user`. `annotations` may cover any videos of the
/// group; the rest are ignored.
pub fn score<'a>(
    group: &Group,
    user: &UserId,
    annotations: impl IntoIterator<Item = &'a Annotation>,
    book: &AnswerBook,
) -> Result<ScoreReport, EvaluationError> {
    let config = group.ground_truth.as_ref().ok_or(EvaluationError::NoGroundTruth)?;
    let member = group.membership(user)?;
    let visible = group.visible_videos(user)?;

    let mut by_video: BTreeMap<&VideoId, BTreeSet<&AnnotationId>> = BTreeMap::new();
    let mut label_of = BTreeMap::new();
    for a in annotations {
        if visible.contains(a.video_id()) {
            by_video.entry(a.video_id()).or_default().insert(a.id());
            label_of.insert(a.id().clone(), a.label_id().clone());
        }
    }
    let schema_of = |id: &AnnotationId| label_of.get(id).and_then(|l| group.ontology.get(l)).and_then(|l| l.form.as_ref());

    let truth_all = book.sheet_of(&config.source_user);
    let cand_all = book.sheet_of(user);
    let restrict = |sheet: &BTreeMap<AnnotationId, AnswerSet>, ids: &BTreeSet<&AnnotationId>| -> BTreeMap<AnnotationId, AnswerSet> {
        sheet.iter().filter(|(a, _)| ids.contains(a)).map(|(a, s)| (a.clone(), s.clone())).collect()
    };

    let mut total = Comparison::default();
    let mut per_video = Vec::new();
    let mut any_truth = false;
    for (video, ids) in &by_video {
        // A video without truth answers does not count.
        let Ok(cmp) = compare_answers(&restrict(&truth_all, ids), &restrict(&cand_all, ids), schema_of) else {
            continue;
        };
        any_truth = true;
        per_video.push(VideoScore {
            video: (*video).clone(),
            n_correct: cmp.n_correct,
            n_total: cmp.n_total,
            score_pct: ratio_pct(cmp.n_correct, cmp.n_total),
        });
        total.absorb(cmp);
    }
    if !any_truth {
        return Err(EvaluationError::NoGroundTruth);
    }
    Ok(ScoreReport {
        user: user.clone(),
        group: group.id.clone(),
        level: member.level,
        n_correct: total.n_correct,
        n_total: total.n_total,
        score_pct: ratio_pct(total.n_correct, total.n_total),
        leveled_up: false,
        per_video,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelOutcome {
    pub old_level: u32,
    pub new_level: u32,
    pub report: Option<ScoreReport>,
}

/// Raise `user` one level when all their visible videos are DONE and their
/// score reaches the threshold for their level (inclusive). Managers are
/// never leveled. Unmet conditions leave the group untouched. A visible set
/// that already earned a level-up earns nothing more until a new video
/// joins it.
pub fn maybe_level_up<'a>(
    group: &mut Group,
    user: &UserId,
    annotations: impl IntoIterator<Item = &'a Annotation>,
    book: &AnswerBook,
) -> Result<LevelOutcome, WorkflowError> {
    let member = group.membership(user)?;
    let old_level = member.level;
    let unchanged = |report| LevelOutcome { old_level, new_level: old_level, report };
    if member.is_manager {
        return Ok(unchanged(None));
    }
    let report = match score(group, user, annotations, book) {
        Ok(r) => r,
        Err(EvaluationError::Workflow(e)) => return Err(e),
        Err(_) => return Ok(unchanged(None)),
    };
    let (done, visible) = progress_counts(group, user)?;
    let threshold = group.ground_truth.as_ref().map_or(f64::INFINITY, |c| c.threshold_for(old_level));
    let seen = group.visible_videos(user)?;
    let nothing_new = group.credited_videos(user).is_some_and(|c| seen.is_subset(c));
    if done < visible || nothing_new || report.n_total == 0 || report.score_pct < threshold {
        return Ok(unchanged(Some(report)));
    }
    let new_level = old_level + 1;
    group.set_level(user, new_level)?;
    group.credit_videos(user, seen);
    Ok(LevelOutcome { old_level, new_level, report: Some(ScoreReport { leveled_up: true, level: new_level, ..report }) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{create_annotation, FrameRate, Label, LabelKind, VideoMeta};
    use crate::forms::{record_answer, AnswerValue, FormMode, FormSchema, Question, QuestionType};
    use crate::workflow::{GroupType, Membership, Permission, PermissionSet};

    struct School {
        group: Group,
        annotations: Vec<Annotation>,
        book: AnswerBook,
    }

    /// Manager "boss" creates one 4-question annotation per video and
    /// answers all true; "ann" is a level-1 annotator.
    fn school(levels: &[u32]) -> School {
        let boss = UserId::from("boss");
        let mut group = Group::new("g", "school", GroupType::Supervised, boss.clone());
        let perms = PermissionSet::EMPTY.with(Permission::AnswerQuestions);
        group.add_member("ann".into(), Membership::annotator(perms, 1)).unwrap();
        let questions = (1..=4).map(|i| Question::new(format!("q{i}"), "ok?", QuestionType::TrueFalse)).collect();
        let label = Label::new("l", "assessment", LabelKind::Temporal).with_form(FormSchema::flat(FormMode::Questions, questions));
        group.ontology.add_label(label.clone()).unwrap();
        let mut annotations = Vec::new();
        let mut book = AnswerBook::new();
        for (i, level) in levels.iter().enumerate() {
            let vid = VideoId::from(format!("v{i}"));
            group.add_video(vid.clone(), *level).unwrap();
            group.assign(&"ann".into(), &vid, true).unwrap();
            let video = VideoMeta::new(vid, "clip", FrameRate::integer(25).unwrap(), 100);
            let a = create_annotation(format!("a{i}").into(), &label, &video, 0, 10, None, boss.clone()).unwrap();
            for q in 1..=4 {
                record_answer(&mut book, label.form.as_ref(), a.id(), &boss, &format!("q{q}").into(), AnswerValue::Bool(true)).unwrap();
            }
            annotations.push(a);
        }
        configure_ground_truth(&mut group, &boss, GroundTruthConfig::new(boss.clone(), 75.0)).unwrap();
        School { group, annotations, book }
    }

    fn answer(s: &mut School, video: usize, correct: usize) {
        let form = s.group.ontology.get(&"l".into()).unwrap().form.clone();
        let id = s.annotations[video].id().clone();
        for q in 1..=4 {
            let v = AnswerValue::Bool(q <= correct);
            record_answer(&mut s.book, form.as_ref(), &id, &"ann".into(), &format!("q{q}").into(), v).unwrap();
        }
    }

    fn finish_all(s: &mut School) {
        let ids: Vec<VideoId> = s.group.visible_videos(&"ann".into()).unwrap().into_iter().collect();
        for v in ids {
            s.group.note_annotation_added(&v);
            s.group.transition_status(&v, VideoStatus::Reviewing, &"ann".into()).unwrap();
            s.group.transition_status(&v, VideoStatus::Done, &"boss".into()).unwrap();
        }
    }

    #[test]
    fn progress_ratios() {
        let mut s = school(&[1, 1, 1, 1]);
        let ann = UserId::from("ann");
        assert_eq!(progress(&s.group, &ann).unwrap(), 0.0);
        finish_all(&mut s);
        assert_eq!(progress(&s.group, &ann).unwrap(), 100.0);
        let empty = Group::new("e", "e", GroupType::Supervised, "m".into());
        assert_eq!(progress(&empty, &"m".into()).unwrap(), 100.0);
    }

    #[test]
    fn aggregate_over_videos() {
        let mut s = school(&[1, 1]);
        answer(&mut s, 0, 3);
        answer(&mut s, 1, 1);
        let r = score(&s.group, &"ann".into(), &s.annotations, &s.book).unwrap();
        assert_eq!((r.n_correct, r.n_total, r.score_pct), (4, 8, 50.0));
        assert_eq!(r.per_video.len(), 2);
    }

    #[test]
    fn self_truth_is_perfect() {
        let s = school(&[1]);
        let r = score(&s.group, &"boss".into(), &s.annotations, &s.book).unwrap();
        assert_eq!(r.score_pct, 100.0);
    }

    #[test]
    fn missing_truth() {
        let mut s = school(&[1]);
        s.group.ground_truth = None;
        assert_eq!(score(&s.group, &"ann".into(), &s.annotations, &s.book), Err(EvaluationError::NoGroundTruth));
    }

    #[test]
    fn threshold_is_inclusive_and_needs_progress() {
        let mut s = school(&[1, 1, 1, 1]);
        for v in 0..4 {
            answer(&mut s, v, 3);
        }
        let ann = UserId::from("ann");
        let out = maybe_level_up(&mut s.group, &ann, &s.annotations, &s.book).unwrap();
        assert_eq!(out.new_level, 1, "nothing is DONE yet");
        finish_all(&mut s);
        let out = maybe_level_up(&mut s.group, &ann, &s.annotations, &s.book).unwrap();
        assert_eq!((out.old_level, out.new_level), (1, 2));
        assert!(out.report.unwrap().leveled_up);
    }

    #[test]
    fn below_threshold_stays() {
        let mut s = school(&[1]);
        answer(&mut s, 0, 2);
        finish_all(&mut s);
        let out = maybe_level_up(&mut s.group, &"ann".into(), &s.annotations, &s.book).unwrap();
        assert_eq!(out.new_level, 1);
    }

    #[test]
    fn thresholds_are_validated() {
        let mut s = school(&[1]);
        let boss = UserId::from("boss");
        assert_eq!(
            configure_ground_truth(&mut s.group, &boss, GroundTruthConfig::new(boss.clone(), 120.0)),
            Err(EvaluationError::InvalidThreshold(120.0))
        );
        assert!(configure_ground_truth(&mut s.group, &"ann".into(), GroundTruthConfig::new(boss, 50.0)).is_err());
    }
}
