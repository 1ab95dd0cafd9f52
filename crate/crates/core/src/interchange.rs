//! The JSON annotation document used for export and import.
//!
//! ```json
//! {"format_version": 1,
//!  "video": {"name": "...", "fps": [25, 1], "frame_count": 250},
//!  "labels": [{"name": "...", "kind": "bounding_box", "color": "#ff0000", "group_path": []}],
//!  "annotations": [{"id": "...", "label": "...", "start_frame": 0, "n_frames": 10,
//!                   "instance": null, "keyframes": {"0": [0.1, 0.1, 0.3, 0.3]},
//!                   "attributes": {}, "answers": {"<user>": {"<question>": true}}}]}
//! ```
//!
//! Export is deterministic: labels sorted by name, annotations by label
//! name, start frame and id, keyframes by frame.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::annotation::{restore_annotation, Annotation, AnnotationError, Color, FrameRate, Label, LabelKind, ShapeGeometry, VideoMeta};
use crate::forms::{AnswerBook, AnswerSet, AnswerValue, FormSchema, Owner};
use crate::ids::{AnnotationId, IdSource, QuestionId, UserId};
use crate::ontology::{Ontology, OntologyError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterchangeError {
    #[error("schema violation at `{path}`: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("annotation {index} covers frames [{start}, {end}) beyond the video's {frame_count} frames")]
    FrameOutOfRange { index: usize, start: u64, end: u64, frame_count: u64 },
}

fn violation(path: impl Into<String>, message: impl ToString) -> InterchangeError {
    InterchangeError::SchemaViolation { path: path.into(), message: message.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationDocument {
    pub format_version: u32,
    pub video: VideoHeader,
    pub labels: Vec<LabelEntry>,
    pub annotations: Vec<AnnotationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoHeader {
    pub name: String,
    pub fps: FrameRate,
    pub frame_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelEntry {
    pub name: String,
    pub kind: LabelKind,
    pub color: Color,
    #[serde(default)]
    pub group_path: Vec<String>,
}

type Values = BTreeMap<QuestionId, AnswerValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationEntry {
    pub id: AnnotationId,
    pub label: String,
    pub start_frame: u64,
    pub n_frames: u64,
    #[serde(default)]
    pub instance: Option<String>,
    #[serde(default)]
    pub keyframes: BTreeMap<u64, Value>,
    #[serde(default)]
    pub attributes: Values,
    #[serde(default)]
    pub answers: BTreeMap<UserId, Values>,
}

/// A group-wide export: one document per video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupExport {
    pub group: String,
    pub exported_at: DateTime<Utc>,
    pub videos: Vec<AnnotationDocument>,
}

/// Build the document for `annotations` of `video`. Every label of the
/// ontology is listed; `answers` should already be filtered to what the
/// exporting user may see.
pub fn export_annotations<'a>(
    video: &VideoMeta,
    annotations: impl IntoIterator<Item = &'a Annotation>,
    ontology: &Ontology,
    answers: &AnswerBook,
) -> AnnotationDocument {
    let mut labels: Vec<LabelEntry> = ontology
        .labels()
        .iter()
        .map(|l| LabelEntry { name: l.name.clone(), kind: l.kind, color: l.color, group_path: l.group_path.clone() })
        .collect();
    labels.sort_by(|a, b| a.name.cmp(&b.name));

    let mut entries: Vec<AnnotationEntry> = annotations
        .into_iter()
        .filter(|a| a.video_id() == &video.id)
        .filter_map(|a| {
            let label = ontology.get(a.label_id())?;
            let stored = answers.get(a.id());
            Some(AnnotationEntry {
                id: a.id().clone(),
                label: label.name.clone(),
                start_frame: a.start_frame(),
                n_frames: a.n_frames(),
                instance: a.instance().map(str::to_owned),
                keyframes: a.keyframes().iter().map(|(f, s)| (*f, s.to_coords())).collect(),
                attributes: stored.and_then(|s| s.shared.as_ref()).map(|s| s.values.clone()).unwrap_or_default(),
                answers: stored
                    .map(|s| s.per_user.iter().map(|(u, set)| (u.clone(), set.values.clone())).collect())
                    .unwrap_or_default(),
            })
        })
        .collect();
    entries.sort_by(|a, b| (&a.label, a.start_frame, &a.id).cmp(&(&b.label, b.start_frame, &b.id)));

    AnnotationDocument {
        format_version: FORMAT_VERSION,
        video: VideoHeader { name: video.name.clone(), fps: video.fps, frame_count: video.frame_count },
        labels,
        annotations: entries,
    }
}

pub fn to_json(doc: &AnnotationDocument) -> String {
    serde_json::to_string_pretty(doc).expect("documents always serialize")
}

/// Parse a document, reporting the JSON path of the first problem.
pub fn parse_document(json: &str) -> Result<AnnotationDocument, InterchangeError> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let doc: AnnotationDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        violation(path, e.into_inner())
    })?;
    if doc.format_version != FORMAT_VERSION {
        return Err(violation("format_version", format!("unsupported version {}", doc.format_version)));
    }
    Ok(doc)
}

/// Result of a successful import.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportOutcome {
    pub annotations: Vec<Annotation>,
    pub answers: AnswerBook,
    /// Labels added to the ontology for names it did not know.
    pub created_labels: Vec<Label>,
}

/// Import a document into `video`.
///
/// Annotation labels are resolved by name. Names missing from `ontology`
/// are created from the document's label list; a name neither known nor
/// declared is a schema violation. Document ids are kept unless
/// `id_taken` reports a collision, in which case a fresh id is minted.
/// Nothing is modified unless the whole document is valid.
pub fn import_annotations(
    doc: &AnnotationDocument,
    video: &VideoMeta,
    ontology: &mut Ontology,
    id_taken: impl Fn(&AnnotationId) -> bool,
    ids: &mut dyn IdSource,
    importer: &UserId,
) -> Result<ImportOutcome, InterchangeError> {
    let mut target = ontology.clone();
    let mut created_labels = Vec::new();
    for (i, entry) in doc.labels.iter().enumerate() {
        match target.by_name(&entry.name) {
            Some(existing) if existing.kind != entry.kind => {
                return Err(violation(
                    format!("labels[{i}].kind"),
                    format!("label `{}` already exists as {}", entry.name, existing.kind.name()),
                ));
            }
            Some(_) => {}
            None => {
                let mut label = Label::new(ids.label_id(), entry.name.clone(), entry.kind).with_color(entry.color);
                label.group_path = entry.group_path.clone();
                target.add_label(label.clone()).map_err(|e: OntologyError| violation(format!("labels[{i}]"), e))?;
                created_labels.push(label);
            }
        }
    }

    let mut seen = BTreeSet::new();
    let mut annotations = Vec::with_capacity(doc.annotations.len());
    let mut answers = AnswerBook::new();
    for (i, entry) in doc.annotations.iter().enumerate() {
        let at = |field: &str| format!("annotations[{i}].{field}");
        let label = target
            .by_name(&entry.label)
            .ok_or_else(|| violation(at("label"), format!("label `{}` is not declared", entry.label)))?;

        let end = entry.start_frame.saturating_add(entry.n_frames);
        if end > video.frame_count {
            return Err(InterchangeError::FrameOutOfRange {
                index: i,
                start: entry.start_frame,
                end,
                frame_count: video.frame_count,
            });
        }
        let keyframes = decode_keyframes(entry, label, &at)?;

        let id = if id_taken(&entry.id) || seen.contains(&entry.id) { ids.annotation_id() } else { entry.id.clone() };
        seen.insert(id.clone());
        let ann = restore_annotation(
            id,
            label,
            video,
            entry.start_frame,
            entry.n_frames,
            entry.instance.clone(),
            keyframes,
            importer.clone(),
        )
        .map_err(|e| match e {
            AnnotationError::EmptySpan => violation(at("n_frames"), e),
            _ => violation(at("keyframes"), e),
        })?;

        let form = label.form.as_ref();
        if !entry.attributes.is_empty() {
            check_values(form, &entry.attributes, &at("attributes"))?;
            answers.put(ann.id(), Owner::Shared, AnswerSet::from_values(entry.attributes.clone()));
        }
        for (user, values) in &entry.answers {
            check_values(form, values, &format!("{}.{user}", at("answers")))?;
            answers.put(ann.id(), Owner::User(user.clone()), AnswerSet::from_values(values.clone()));
        }
        annotations.push(ann);
    }

    *ontology = target;
    Ok(ImportOutcome { annotations, answers, created_labels })
}

fn decode_keyframes(
    entry: &AnnotationEntry,
    label: &Label,
    at: &dyn Fn(&str) -> String,
) -> Result<BTreeMap<u64, ShapeGeometry>, InterchangeError> {
    let Some(kind) = label.kind.shape_kind() else {
        if entry.keyframes.is_empty() {
            return Ok(BTreeMap::new());
        }
        return Err(violation(at("keyframes"), "temporal labels carry no keyframes"));
    };
    entry
        .keyframes
        .iter()
        .map(|(f, v)| {
            let shape = ShapeGeometry::from_coords(kind, v).map_err(|e| violation(format!("{}.{f}", at("keyframes")), e))?;
            shape.validate().map_err(|e| violation(format!("{}.{f}", at("keyframes")), e))?;
            Ok((*f, shape))
        })
        .collect()
}

/// Answers must fit the label's form when it has one; without a form they
/// are kept as given.
fn check_values(form: Option<&FormSchema>, values: &Values, path: &str) -> Result<(), InterchangeError> {
    let Some(form) = form else { return Ok(()) };
    for (qid, value) in values {
        let q = form.question(qid).ok_or_else(|| violation(format!("{path}.{qid}"), "unknown question"))?;
        if !q.qtype.accepts(value) {
            return Err(violation(format!("{path}.{qid}"), format!("expected a {} answer", q.qtype.name())));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{create_annotation, Point2};
    use crate::ids::SequentialIds;

    fn video(frames: u64) -> VideoMeta {
        VideoMeta::new("v", "clip.mp4", FrameRate::integer(25).unwrap(), frames)
    }

    #[test]
    fn empty_set_has_header() {
        let doc = export_annotations(&video(100), [], &Ontology::new(), &AnswerBook::new());
        let json: Value = serde_json::from_str(&to_json(&doc)).unwrap();
        assert_eq!(json["annotations"], serde_json::json!([]));
        assert_eq!(json["video"]["fps"], serde_json::json!([25, 1]));
        assert_eq!(json["format_version"], 1);
    }

    #[test]
    fn field_order_is_fixed() {
        let mut o = Ontology::new();
        let label = Label::new("l", "tool", LabelKind::Point);
        o.add_label(label.clone()).unwrap();
        let shape = ShapeGeometry::Point(Point2::new(0.5, 0.25));
        let a = create_annotation("a".into(), &label, &video(100), 3, 2, Some(shape), "u".into()).unwrap();
        let json = serde_json::to_string(&export_annotations(&video(100), [&a], &o, &AnswerBook::new())).unwrap();
        let keys = ["\"format_version\"", "\"video\"", "\"labels\"", "\"annotations\"", "\"id\"", "\"label\"", "\"start_frame\"",
            "\"n_frames\"", "\"instance\"", "\"keyframes\"", "\"attributes\"", "\"answers\""];
        let positions: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{json}");
        assert!(json.contains(r#""keyframes":{"3":[0.5,0.25]}"#));
    }

    #[test]
    fn out_of_range_frames() {
        let json = r##"{"format_version":1,"video":{"name":"x","fps":[25,1],"frame_count":1000},
            "labels":[{"name":"p","kind":"temporal","color":"#000000","group_path":[]}],
            "annotations":[{"id":"a","label":"p","start_frame":500,"n_frames":1,"instance":null,
            "keyframes":{},"attributes":{},"answers":{}}]}"##;
        let doc = parse_document(json).unwrap();
        let err = import_annotations(&doc, &video(100), &mut Ontology::new(), |_| false, &mut SequentialIds::new("i"), &"u".into());
        assert!(matches!(err, Err(InterchangeError::FrameOutOfRange { index: 0, start: 500, .. })));
    }

    #[test]
    fn schema_errors_carry_paths() {
        let bad_kind = r##"{"format_version":1,"video":{"name":"x","fps":[25,1],"frame_count":10},
            "labels":[{"name":"p","kind":"blob","color":"#000000"}],"annotations":[]}"##;
        match parse_document(bad_kind) {
            Err(InterchangeError::SchemaViolation { path, .. }) => assert_eq!(path, "labels[0].kind"),
            other => panic!("{other:?}"),
        }
        let extra = r##"{"format_version":1,"video":{"name":"x","fps":[25,1],"frame_count":10,"x":1},"labels":[],"annotations":[]}"##;
        assert!(matches!(parse_document(extra), Err(InterchangeError::SchemaViolation { .. })));
        let v2 = r##"{"format_version":2,"video":{"name":"x","fps":[25,1],"frame_count":10},"labels":[],"annotations":[]}"##;
        match parse_document(v2) {
            Err(InterchangeError::SchemaViolation { path, .. }) => assert_eq!(path, "format_version"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn undeclared_label_is_rejected_and_nothing_changes() {
        let json = r##"{"format_version":1,"video":{"name":"x","fps":[25,1],"frame_count":10},
            "labels":[{"name":"p","kind":"temporal","color":"#112233"}],
            "annotations":[{"id":"a","label":"q","start_frame":0,"n_frames":1}]}"##;
        let doc = parse_document(json).unwrap();
        let mut o = Ontology::new();
        let err = import_annotations(&doc, &video(10), &mut o, |_| false, &mut SequentialIds::new("i"), &"u".into()).unwrap_err();
        assert_eq!(err, violation("annotations[0].label", "label `q` is not declared"));
        assert!(o.is_empty());
    }

    #[test]
    fn declared_labels_are_created_and_ids_kept_unless_taken() {
        let json = r##"{"format_version":1,"video":{"name":"x","fps":[25,1],"frame_count":10},
            "labels":[{"name":"p","kind":"temporal","color":"#112233","group_path":["phases"]}],
            "annotations":[{"id":"a","label":"p","start_frame":0,"n_frames":1},
                           {"id":"b","label":"p","start_frame":2,"n_frames":1}]}"##;
        let doc = parse_document(json).unwrap();
        let mut o = Ontology::new();
        let out = import_annotations(&doc, &video(10), &mut o, |id| id.as_str() == "b", &mut SequentialIds::new("i"), &"u".into())
            .unwrap();
        assert_eq!(out.created_labels.len(), 1);
        assert_eq!(o.by_name("p").unwrap().color.to_string(), "#112233");
        assert_eq!(out.annotations[0].id().as_str(), "a");
        assert_ne!(out.annotations[1].id().as_str(), "b");
    }
}
