//! Form schemas attached to labels and the answers recorded against them.
//!
//! A form in [`FormMode::Attributes`] keeps one shared answer set per
//! annotation that any annotator may overwrite. A form in
//! [`FormMode::Questions`] keeps one answer set per annotation and user;
//! only managers read other users' sets.

mod schema;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use schema::{FormClass, FormItem, FormMode, FormSchema, Question, QuestionType, QuestionTypeDef, QUESTION_TYPES};

use crate::annotation::{Annotation, Label};
use crate::ids::{AnnotationId, LabelId, QuestionId, UserId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("invalid form: {0}")]
    InvalidSchema(String),
    #[error("the annotation's label has no form")]
    FormNotAttached,
    #[error("unknown question `{0}`")]
    UnknownQuestion(QuestionId),
    #[error("value does not fit question `{question}` ({expected})")]
    TypeMismatch { question: QuestionId, expected: &'static str },
    #[error("required questions unanswered: {0:?}")]
    MissingRequired(Vec<QuestionId>),
    #[error("no ground truth answers")]
    NoGroundTruth,
}

/// A typed answer. Serialized without a tag: `true`, `3`, `"text"`, `["a","b"]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Bool(bool),
    Number(f64),
    Text(String),
    Choices(BTreeSet<String>),
}

/// Answers of one owner (or the shared owner) on one annotation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnswerSet {
    pub values: BTreeMap<QuestionId, AnswerValue>,
    #[serde(default)]
    pub submitted: bool,
}

impl AnswerSet {
    pub fn from_values(values: BTreeMap<QuestionId, AnswerValue>) -> Self {
        AnswerSet { values, submitted: false }
    }

    pub fn missing_required(&self, schema: &FormSchema) -> Vec<QuestionId> {
        schema
            .required_questions()
            .filter(|q| !self.values.contains_key(&q.id))
            .map(|q| q.id.clone())
            .collect()
    }
}

/// Owner of an answer set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Owner {
    Shared,
    User(UserId),
}

/// Answer sets of one annotation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationAnswers {
    #[serde(default)]
    pub shared: Option<AnswerSet>,
    #[serde(default)]
    pub per_user: BTreeMap<UserId, AnswerSet>,
}

impl AnnotationAnswers {
    fn is_empty(&self) -> bool {
        self.shared.is_none() && self.per_user.is_empty()
    }
}

/// All answers of a group, keyed by annotation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnswerBook(BTreeMap<AnnotationId, AnnotationAnswers>);

impl AnswerBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, annotation: &AnnotationId) -> Option<&AnnotationAnswers> {
        self.0.get(annotation)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AnnotationId, &AnnotationAnswers)> {
        self.0.iter()
    }

    /// The set `owner` writes to under `schema`'s mode.
    fn slot(&mut self, annotation: &AnnotationId, owner: &Owner) -> &mut AnswerSet {
        let entry = self.0.entry(annotation.clone()).or_default();
        match owner {
            Owner::Shared => entry.shared.get_or_insert_with(AnswerSet::default),
            Owner::User(u) => entry.per_user.entry(u.clone()).or_default(),
        }
    }

    pub fn set_of(&self, annotation: &AnnotationId, owner: &Owner) -> Option<&AnswerSet> {
        let entry = self.0.get(annotation)?;
        match owner {
            Owner::Shared => entry.shared.as_ref(),
            Owner::User(u) => entry.per_user.get(u),
        }
    }

    /// Replace a whole answer set without validation (import, restore).
    pub fn put(&mut self, annotation: &AnnotationId, owner: Owner, set: AnswerSet) {
        *self.slot(annotation, &owner) = set;
    }

    /// Drop all answers of an annotation, returning them.
    pub fn remove(&mut self, annotation: &AnnotationId) -> Option<AnnotationAnswers> {
        self.0.remove(annotation)
    }

    /// Every per-user set of `user`, keyed by annotation.
    pub fn sheet_of(&self, user: &UserId) -> BTreeMap<AnnotationId, AnswerSet> {
        self.0
            .iter()
            .filter_map(|(a, e)| e.per_user.get(user).map(|s| (a.clone(), s.clone())))
            .collect()
    }

    /// Keep only answers that still make sense under `schema` for the given
    /// annotations: same mode, existing question, value still type-checks.
    pub fn conform<'a>(&mut self, annotations: impl IntoIterator<Item = &'a AnnotationId>, schema: Option<&FormSchema>) {
        for id in annotations {
            let Some(entry) = self.0.get_mut(id) else { continue };
            match schema {
                None => *entry = AnnotationAnswers::default(),
                Some(schema) => {
                    let prune = |set: &mut AnswerSet| {
                        set.values
                            .retain(|q, v| schema.question(q).is_some_and(|q| q.qtype.accepts(v)));
                        if !set.missing_required(schema).is_empty() {
                            set.submitted = false;
                        }
                    };
                    match schema.mode {
                        FormMode::Attributes => {
                            entry.per_user.clear();
                            entry.shared.as_mut().map(prune);
                        }
                        FormMode::Questions => {
                            entry.shared = None;
                            entry.per_user.values_mut().for_each(prune);
                        }
                    }
                }
            }
            if entry.is_empty() {
                self.0.remove(id);
            }
        }
    }
}

/// Who writes to which set under `schema`.
pub fn owner_for(schema: &FormSchema, user: &UserId) -> Owner {
    match schema.mode {
        FormMode::Attributes => Owner::Shared,
        FormMode::Questions => Owner::User(user.clone()),
    }
}

/// Attach (or replace) the form of `label`. Answers on `annotations` (the
/// label's annotations) are pruned to the new schema: answers to removed
/// questions are deleted, answers to kept question ids survive unchanged.
pub fn attach_form<'a>(
    label: &mut Label,
    schema: FormSchema,
    book: &mut AnswerBook,
    annotations: impl IntoIterator<Item = &'a AnnotationId>,
) -> Result<(), FormError> {
    schema.validate()?;
    book.conform(annotations, Some(&schema));
    label.form = Some(schema);
    Ok(())
}

/// Remove the form of `label` together with every answer recorded under it.
pub fn detach_form<'a>(label: &mut Label, book: &mut AnswerBook, annotations: impl IntoIterator<Item = &'a AnnotationId>) {
    book.conform(annotations, None);
    label.form = None;
}

fn check_value(schema: &FormSchema, question: &QuestionId, value: &AnswerValue) -> Result<(), FormError> {
    let q = schema.question(question).ok_or_else(|| FormError::UnknownQuestion(question.clone()))?;
    if q.qtype.accepts(value) {
        Ok(())
    } else {
        Err(FormError::TypeMismatch { question: question.clone(), expected: q.qtype.name() })
    }
}

/// Record `user`'s answer. Attributes forms write to the shared set,
/// Questions forms to the user's own set. Returns the updated set.
pub fn record_answer<'b>(
    book: &'b mut AnswerBook,
    schema: Option<&FormSchema>,
    annotation: &AnnotationId,
    user: &UserId,
    question: &QuestionId,
    value: AnswerValue,
) -> Result<&'b AnswerSet, FormError> {
    let schema = schema.ok_or(FormError::FormNotAttached)?;
    check_value(schema, question, &value)?;
    let set = book.slot(annotation, &owner_for(schema, user));
    set.values.insert(question.clone(), value);
    Ok(set)
}

/// Remove an answer. A submitted set that loses a required answer is
/// reopened.
pub fn clear_answer(
    book: &mut AnswerBook,
    schema: Option<&FormSchema>,
    annotation: &AnnotationId,
    user: &UserId,
    question: &QuestionId,
) -> Result<(), FormError> {
    let schema = schema.ok_or(FormError::FormNotAttached)?;
    if schema.question(question).is_none() {
        return Err(FormError::UnknownQuestion(question.clone()));
    }
    let set = book.slot(annotation, &owner_for(schema, user));
    set.values.remove(question);
    if !set.missing_required(schema).is_empty() {
        set.submitted = false;
    }
    Ok(())
}

/// Mark `user`'s set as submitted; refused while required answers are missing.
pub fn submit(
    book: &mut AnswerBook,
    schema: Option<&FormSchema>,
    annotation: &AnnotationId,
    user: &UserId,
) -> Result<(), FormError> {
    let schema = schema.ok_or(FormError::FormNotAttached)?;
    let set = book.slot(annotation, &owner_for(schema, user));
    let missing = set.missing_required(schema);
    if !missing.is_empty() {
        return Err(FormError::MissingRequired(missing));
    }
    set.submitted = true;
    Ok(())
}

/// Answer sets of one annotation that `viewer` may read.
pub fn readable_sets<'b>(
    book: &'b AnswerBook,
    schema: &FormSchema,
    annotation: &AnnotationId,
    viewer: &UserId,
    viewer_is_manager: bool,
) -> Vec<(Owner, &'b AnswerSet)> {
    let Some(entry) = book.get(annotation) else { return Vec::new() };
    match schema.mode {
        FormMode::Attributes => entry.shared.iter().map(|s| (Owner::Shared, s)).collect(),
        FormMode::Questions => entry
            .per_user
            .iter()
            .filter(|(u, _)| viewer_is_manager || *u == viewer)
            .map(|(u, s)| (Owner::User(u.clone()), s))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelProgress {
    pub label_id: LabelId,
    pub answered: usize,
    pub required: usize,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completeness {
    pub overall_pct: f64,
    pub per_label: Vec<LabelProgress>,
    pub next_incomplete: Option<AnnotationId>,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        100.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Form progress of one video as `viewer` sees it: the shared set for
/// Attributes forms, the viewer's own set for Questions forms.
///
/// `annotations` are the annotations visible to the viewer with their
/// label's schema.
pub fn completeness(annotations: &[(&Annotation, Option<&FormSchema>)], book: &AnswerBook, viewer: &UserId) -> Completeness {
    let mut per_label: BTreeMap<LabelId, (usize, usize)> = BTreeMap::new();
    let mut incomplete: Option<(u64, &AnnotationId)> = None;
    for (ann, schema) in annotations {
        let Some(schema) = schema else { continue };
        let required = schema.required_questions().count();
        if required == 0 {
            continue;
        }
        let missing = book
            .set_of(ann.id(), &owner_for(schema, viewer))
            .map_or(required, |s| s.missing_required(schema).len());
        let slot = per_label.entry(ann.label_id().clone()).or_default();
        slot.0 += required - missing;
        slot.1 += required;
        let key = (ann.start_frame(), ann.id());
        if missing > 0 && incomplete.map_or(true, |best| key < best) {
            incomplete = Some(key);
        }
    }
    let (answered, required) = per_label.values().fold((0, 0), |acc, (a, r)| (acc.0 + a, acc.1 + r));
    Completeness {
        overall_pct: pct(answered, required),
        per_label: per_label
            .into_iter()
            .map(|(label_id, (answered, required))| LabelProgress { label_id, answered, required, pct: pct(answered, required) })
            .collect(),
        next_incomplete: incomplete.map(|(_, id)| id.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Match,
    Mismatch,
    Unanswered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionOutcome {
    pub annotation_id: AnnotationId,
    pub question_id: QuestionId,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub per_question: Vec<QuestionOutcome>,
    pub n_correct: usize,
    pub n_total: usize,
}

impl Comparison {
    pub fn absorb(&mut self, other: Comparison) {
        self.n_correct += other.n_correct;
        self.n_total += other.n_total;
        self.per_question.extend(other.per_question);
    }
}

/// Compare a candidate's answer sheet against the truth sheet.
///
/// Every truth answer to a scored question of a Questions-mode form counts
/// once; free text is skipped. A candidate answer must be exactly equal
/// (multi-select answers compare as sets); a missing one is `Unanswered`
/// and counts as wrong.
pub fn compare_answers<'s>(
    truth: &BTreeMap<AnnotationId, AnswerSet>,
    candidate: &BTreeMap<AnnotationId, AnswerSet>,
    schema_of: impl Fn(&AnnotationId) -> Option<&'s FormSchema>,
) -> Result<Comparison, FormError> {
    if truth.values().all(|s| s.values.is_empty()) {
        return Err(FormError::NoGroundTruth);
    }
    let mut cmp = Comparison::default();
    for (ann, truth_set) in truth {
        let Some(schema) = schema_of(ann).filter(|s| s.is_questions()) else { continue };
        for (qid, want) in &truth_set.values {
            if !schema.question(qid).is_some_and(|q| q.qtype.is_scored()) {
                continue;
            }
            let outcome = match candidate.get(ann).and_then(|s| s.values.get(qid)) {
                None => Outcome::Unanswered,
                Some(got) if got == want => Outcome::Match,
                Some(_) => Outcome::Mismatch,
            };
            cmp.n_total += 1;
            cmp.n_correct += usize::from(outcome == Outcome::Match);
            cmp.per_question.push(QuestionOutcome { annotation_id: ann.clone(), question_id: qid.clone(), outcome });
        }
    }
    Ok(cmp)
}
