//! Labels, annotations and their keyframed geometry.

mod geometry;
mod interpolate;
mod timebase;
mod undo;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use geometry::{GeometryError, Point2, ShapeGeometry, ShapeKind};
pub use interpolate::{corresponding_vertices, lerp_shapes, resample};
pub use timebase::{frame_from_time, time_from_frame, FrameRate, TimebaseError, HALF_FRAME_SLACK};
pub use undo::{Inverse, UndoAction, UndoError, UndoLog, UNDO_DEPTH};

use crate::forms::FormSchema;
use crate::ids::{AnnotationId, LabelId, ProtocolId, UserId, VideoId};
use crate::workflow::VideoStatus;

/// What an annotation of a label records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    Temporal,
    BoundingBox,
    Point,
    Polygon,
    Polyline,
    Segment,
}

impl LabelKind {
    pub const ALL: [LabelKind; 6] = [
        LabelKind::Temporal,
        LabelKind::BoundingBox,
        LabelKind::Point,
        LabelKind::Polygon,
        LabelKind::Polyline,
        LabelKind::Segment,
    ];

    /// Geometry drawn by spatiotemporal kinds; `None` for temporal labels.
    pub fn shape_kind(self) -> Option<ShapeKind> {
        match self {
            LabelKind::Temporal => None,
            LabelKind::BoundingBox => Some(ShapeKind::BoundingBox),
            LabelKind::Point => Some(ShapeKind::Point),
            LabelKind::Polygon => Some(ShapeKind::Polygon),
            LabelKind::Polyline => Some(ShapeKind::Polyline),
            LabelKind::Segment => Some(ShapeKind::Segment),
        }
    }

    pub fn is_spatial(self) -> bool {
        self != LabelKind::Temporal
    }

    pub fn name(self) -> &'static str {
        match self.shape_kind() {
            Some(kind) => kind.name(),
            None => "temporal",
        }
    }
}

impl FromStr for LabelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LabelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown label kind `{s}`"))
    }
}

/// 24-bit RGB color, serialized as `#rrggbb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Color(pub [u8; 3]);

impl Color {
    /// Used for labels created without an explicit color.
    pub const DEFAULT: Color = Color([0x9e, 0x9e, 0x9e]);
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b] = self.0;
        write!(f, "#{r:02x}{g:02x}{b:02x}")
    }
}

impl FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s.strip_prefix('#').filter(|h| h.len() == 6 && h.is_ascii());
        let hex = hex.ok_or_else(|| format!("`{s}` is not a #rrggbb color"))?;
        let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| format!("`{s}` is not a #rrggbb color"));
        Ok(Color([byte(0)?, byte(2)?, byte(4)?]))
    }
}

impl TryFrom<String> for Color {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Color> for String {
    fn from(c: Color) -> Self {
        c.to_string()
    }
}

/// An entry of a group's ontology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub id: LabelId,
    pub name: String,
    pub color: Color,
    pub kind: LabelKind,
    /// Folder path in the ontology tree; empty for top-level labels.
    #[serde(default)]
    pub group_path: Vec<String>,
    #[serde(default)]
    pub form: Option<FormSchema>,
    /// Set on reviewer `correct_X` labels, pointing at `X`.
    #[serde(default)]
    pub review_of: Option<LabelId>,
}

impl Label {
    pub fn new(id: impl Into<LabelId>, name: impl Into<String>, kind: LabelKind) -> Self {
        Label {
            id: id.into(),
            name: name.into(),
            color: Color::DEFAULT,
            kind,
            group_path: Vec::new(),
            form: None,
            review_of: None,
        }
    }

    pub fn with_color(mut self, color: Color) -> Self {
        self.color = color;
        self
    }

    pub fn with_form(mut self, form: FormSchema) -> Self {
        self.form = Some(form);
        self
    }

    pub fn has_questions(&self) -> bool {
        self.form.as_ref().is_some_and(FormSchema::is_questions)
    }
}

/// Metadata of an uploaded video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub id: VideoId,
    pub name: String,
    pub fps: FrameRate,
    pub frame_count: u64,
    pub duration_s: f64,
    pub source_width: u32,
    pub source_height: u32,
    /// Difficulty level; 0 means unleveled.
    #[serde(default)]
    pub level: u32,
    #[serde(default)]
    pub status: VideoStatus,
    #[serde(default)]
    pub protocol_id: Option<ProtocolId>,
    /// Set by the prober when frame durations vary.
    #[serde(default)]
    pub variable_frame_rate: bool,
}

impl VideoMeta {
    /// Constant-frame-rate video with `frame_count` frames.
    pub fn new(id: impl Into<VideoId>, name: impl Into<String>, fps: FrameRate, frame_count: u64) -> Self {
        VideoMeta {
            id: id.into(),
            name: name.into(),
            fps,
            frame_count,
            duration_s: time_from_frame(frame_count, fps),
            source_width: 1920,
            source_height: 1080,
            level: 0,
            status: VideoStatus::New,
            protocol_id: None,
            variable_frame_rate: false,
        }
    }

    /// `|frame_count - round(duration * fps)| <= 1`.
    pub fn is_consistent(&self) -> bool {
        let expected = (self.duration_s * self.fps.as_f64()).round();
        (self.frame_count as f64 - expected).abs() <= 1.0
    }

    /// Frame displayed at playback time `t`, clamped to the video.
    pub fn frame_at(&self, t: f64) -> Result<u64, TimebaseError> {
        if self.variable_frame_rate {
            return Err(TimebaseError::NonConstantFrameRate);
        }
        let frame = frame_from_time(t, self.fps)?;
        Ok(frame.min(self.frame_count.saturating_sub(1)))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnotationError {
    #[error("label expects {expected:?} geometry, got {found:?}")]
    ShapeKindMismatch { expected: Option<ShapeKind>, found: Option<ShapeKind> },
    #[error("frames [{start}, {start}+{n_frames}) exceed the video's {frame_count} frames")]
    OutOfBounds { start: u64, n_frames: u64, frame_count: u64 },
    #[error("an annotation spans at least one frame")]
    EmptySpan,
    #[error("frame {frame} is outside the annotation span")]
    OutsideSpan { frame: u64 },
    #[error("cut frame {frame} must fall strictly inside the annotation span")]
    CutOutsideSpan { frame: u64 },
    #[error("temporal annotations carry no geometry")]
    NoGeometry,
    #[error("the first keyframe anchors the annotation and cannot be removed")]
    FirstKeyframe,
    #[error("annotation belongs to a different label")]
    LabelMismatch,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A labeled frame interval on one video, with keyframed geometry for
/// spatiotemporal labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    id: AnnotationId,
    video_id: VideoId,
    label_id: LabelId,
    start_frame: u64,
    n_frames: u64,
    #[serde(default)]
    instance: Option<String>,
    #[serde(default)]
    keyframes: BTreeMap<u64, ShapeGeometry>,
    created_by: UserId,
    version: u64,
}

impl Annotation {
    pub fn id(&self) -> &AnnotationId {
        &self.id
    }

    pub fn video_id(&self) -> &VideoId {
        &self.video_id
    }

    pub fn label_id(&self) -> &LabelId {
        &self.label_id
    }

    pub fn start_frame(&self) -> u64 {
        self.start_frame
    }

    pub fn n_frames(&self) -> u64 {
        self.n_frames
    }

    /// One past the last covered frame.
    pub fn end_frame(&self) -> u64 {
        self.start_frame + self.n_frames
    }

    pub fn covers(&self, frame: u64) -> bool {
        (self.start_frame..self.end_frame()).contains(&frame)
    }

    pub fn instance(&self) -> Option<&str> {
        self.instance.as_deref()
    }

    pub fn keyframes(&self) -> &BTreeMap<u64, ShapeGeometry> {
        &self.keyframes
    }

    pub fn created_by(&self) -> &UserId {
        &self.created_by
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub(crate) fn set_version(&mut self, version: u64) {
        self.version = version;
    }

    /// Replace the id, e.g. when an imported id collides with an existing one.
    pub fn with_id(mut self, id: AnnotationId) -> Self {
        self.id = id;
        self
    }

    pub fn set_instance(&mut self, instance: Option<String>) {
        self.instance = instance.filter(|s| !s.is_empty());
        self.version += 1;
    }

    /// Add or replace the keyframe at `frame`.
    pub fn set_keyframe(&mut self, label: &Label, frame: u64, shape: ShapeGeometry) -> Result<(), AnnotationError> {
        self.check_label(label)?;
        check_shape(label, Some(&shape))?;
        if !self.covers(frame) {
            return Err(AnnotationError::OutsideSpan { frame });
        }
        self.keyframes.insert(frame, shape);
        self.version += 1;
        Ok(())
    }

    pub fn remove_keyframe(&mut self, frame: u64) -> Result<ShapeGeometry, AnnotationError> {
        if frame == self.start_frame {
            return Err(AnnotationError::FirstKeyframe);
        }
        let shape = self.keyframes.remove(&frame).ok_or(AnnotationError::OutsideSpan { frame })?;
        self.version += 1;
        Ok(shape)
    }

    /// Move or resize the span. Keyframes falling outside are dropped and,
    /// for spatial annotations, the shape at the new start frame becomes the
    /// first keyframe so the visible geometry inside the span is unchanged.
    pub fn set_span(&mut self, video: &VideoMeta, start_frame: u64, n_frames: u64) -> Result<(), AnnotationError> {
        check_bounds(video, start_frame, n_frames)?;
        if !self.keyframes.is_empty() {
            let end = start_frame + n_frames;
            let anchor = match self.keyframes.range(..=start_frame).next_back() {
                Some(_) if self.covers(start_frame) => self.interpolate(start_frame)?,
                Some((_, shape)) => shape.clone(),
                None => self.keyframes.values().next().cloned().expect("non-empty"),
            };
            let tail = match self.keyframes.range(end..).next() {
                Some(_) if self.covers(end - 1) && end - 1 > start_frame => Some(self.interpolate(end - 1)?),
                _ => None,
            };
            self.keyframes.retain(|f, _| (start_frame..end).contains(f));
            self.keyframes.entry(start_frame).or_insert(anchor);
            if let Some(tail) = tail {
                self.keyframes.entry(end - 1).or_insert(tail);
            }
        }
        self.start_frame = start_frame;
        self.n_frames = n_frames;
        self.version += 1;
        Ok(())
    }

    /// Geometry at `frame`; see [`interpolate_shape`].
    pub fn interpolate(&self, frame: u64) -> Result<ShapeGeometry, AnnotationError> {
        interpolate_shape(self, frame)
    }

    fn check_label(&self, label: &Label) -> Result<(), AnnotationError> {
        if label.id != self.label_id {
            return Err(AnnotationError::LabelMismatch);
        }
        Ok(())
    }
}

fn check_bounds(video: &VideoMeta, start: u64, n_frames: u64) -> Result<(), AnnotationError> {
    if n_frames == 0 {
        return Err(AnnotationError::EmptySpan);
    }
    match start.checked_add(n_frames) {
        Some(end) if end <= video.frame_count => Ok(()),
        _ => Err(AnnotationError::OutOfBounds { start, n_frames, frame_count: video.frame_count }),
    }
}

fn check_shape(label: &Label, shape: Option<&ShapeGeometry>) -> Result<(), AnnotationError> {
    let expected = label.kind.shape_kind();
    let found = shape.map(ShapeGeometry::kind);
    if expected != found {
        return Err(AnnotationError::ShapeKindMismatch { expected, found });
    }
    if let Some(shape) = shape {
        shape.validate()?;
    }
    Ok(())
}

/// Start a new annotation of `label` at `start_frame`.
///
/// Spatiotemporal labels require `first_shape`, which becomes the keyframe
/// at `start_frame`; temporal labels must not pass one.
pub fn create_annotation(
    id: AnnotationId,
    label: &Label,
    video: &VideoMeta,
    start_frame: u64,
    n_frames: u64,
    first_shape: Option<ShapeGeometry>,
    created_by: UserId,
) -> Result<Annotation, AnnotationError> {
    check_shape(label, first_shape.as_ref())?;
    check_bounds(video, start_frame, n_frames)?;
    let keyframes = first_shape.into_iter().map(|s| (start_frame, s)).collect();
    Ok(Annotation {
        id,
        video_id: video.id.clone(),
        label_id: label.id.clone(),
        start_frame,
        n_frames,
        instance: None,
        keyframes,
        created_by,
        version: 1,
    })
}

/// Rebuild an annotation from stored parts, checking every invariant.
#[allow(clippy::too_many_arguments)]
pub fn restore_annotation(
    id: AnnotationId,
    label: &Label,
    video: &VideoMeta,
    start_frame: u64,
    n_frames: u64,
    instance: Option<String>,
    keyframes: BTreeMap<u64, ShapeGeometry>,
    created_by: UserId,
) -> Result<Annotation, AnnotationError> {
    check_bounds(video, start_frame, n_frames)?;
    match keyframes.keys().next() {
        None => check_shape(label, None)?,
        Some(&first) if first != start_frame => return Err(AnnotationError::OutsideSpan { frame: first }),
        Some(_) => {}
    }
    for (&frame, shape) in &keyframes {
        check_shape(label, Some(shape))?;
        if !(start_frame..start_frame + n_frames).contains(&frame) {
            return Err(AnnotationError::OutsideSpan { frame });
        }
    }
    Ok(Annotation {
        id,
        video_id: video.id.clone(),
        label_id: label.id.clone(),
        start_frame,
        n_frames,
        instance: instance.filter(|s| !s.is_empty()),
        keyframes,
        created_by,
        version: 1,
    })
}

/// Geometry of `annotation` at `frame`.
///
/// Keyframes are returned verbatim; between two keyframes the shape is
/// interpolated; after the last keyframe it is held.
pub fn interpolate_shape(annotation: &Annotation, frame: u64) -> Result<ShapeGeometry, AnnotationError> {
    if annotation.keyframes.is_empty() {
        return Err(AnnotationError::NoGeometry);
    }
    if !annotation.covers(frame) {
        return Err(AnnotationError::OutsideSpan { frame });
    }
    let (&f0, before) = annotation
        .keyframes
        .range(..=frame)
        .next_back()
        .ok_or(AnnotationError::OutsideSpan { frame })?;
    if f0 == frame {
        return Ok(before.clone());
    }
    match annotation.keyframes.range(frame + 1..).next() {
        None => Ok(before.clone()),
        Some((&f1, after)) => {
            let t = (frame - f0) as f64 / (f1 - f0) as f64;
            lerp_shapes(before, after, t).ok_or(AnnotationError::ShapeKindMismatch {
                expected: Some(before.kind()),
                found: Some(after.kind()),
            })
        }
    }
}

/// Split an annotation at `cut_frame` into `[start, cut)` and `[cut, end)`.
///
/// The first half keeps the original id; the second half takes `second_id`.
/// Interpolated geometry is preserved on every frame: the second half gets a
/// keyframe at `cut_frame`, and when the interpolation crosses the cut the
/// first half gets one at `cut_frame - 1`.
pub fn cut_annotation(
    annotation: &Annotation,
    cut_frame: u64,
    second_id: AnnotationId,
) -> Result<(Annotation, Annotation), AnnotationError> {
    if cut_frame <= annotation.start_frame || cut_frame >= annotation.end_frame() {
        return Err(AnnotationError::CutOutsideSpan { frame: cut_frame });
    }
    let mut first = annotation.clone();
    first.n_frames = cut_frame - annotation.start_frame;
    first.version += 1;
    let mut second = annotation.clone();
    second.id = second_id;
    second.start_frame = cut_frame;
    second.n_frames = annotation.end_frame() - cut_frame;
    second.version = 1;

    if !annotation.keyframes.is_empty() {
        let crosses = annotation.keyframes.range(cut_frame..).next().is_some();
        let last_of_first = cut_frame - 1;
        first.keyframes = annotation.keyframes.range(..cut_frame).map(|(f, s)| (*f, s.clone())).collect();
        if crosses && !first.keyframes.contains_key(&last_of_first) {
            first.keyframes.insert(last_of_first, interpolate_shape(annotation, last_of_first)?);
        }
        second.keyframes = annotation.keyframes.range(cut_frame..).map(|(f, s)| (*f, s.clone())).collect();
        if !second.keyframes.contains_key(&cut_frame) {
            second.keyframes.insert(cut_frame, interpolate_shape(annotation, cut_frame)?);
        }
    }
    Ok((first, second))
}

/// Deep copy under a fresh id with version 1. Form answers are not part of
/// an annotation and are therefore never copied.
pub fn duplicate_annotation(annotation: &Annotation, new_id: AnnotationId) -> Annotation {
    Annotation { id: new_id, version: 1, ..annotation.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn video(frames: u64) -> VideoMeta {
        VideoMeta::new("v1", "clip.mp4", FrameRate::integer(25).unwrap(), frames)
    }

    fn bbox_label() -> Label {
        Label::new("box", "tool", LabelKind::BoundingBox)
    }

    fn boxed(keys: &[(u64, [f64; 4])], n: u64) -> Annotation {
        let label = bbox_label();
        let [a, b, c, d] = keys[0].1;
        let mut ann = create_annotation(
            "a1".into(),
            &label,
            &video(1000),
            keys[0].0,
            n,
            Some(ShapeGeometry::bbox(a, b, c, d)),
            "u1".into(),
        )
        .unwrap();
        for &(f, [a, b, c, d]) in &keys[1..] {
            ann.set_keyframe(&label, f, ShapeGeometry::bbox(a, b, c, d)).unwrap();
        }
        ann
    }

    fn assert_box(shape: &ShapeGeometry, want: [f64; 4]) {
        for (got, want) in shape.scalars().iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{shape:?} != {want:?}");
        }
    }

    #[test]
    fn one_frame_temporal_annotation() {
        let label = Label::new("phase", "phase", LabelKind::Temporal);
        let ann = create_annotation("a".into(), &label, &video(1000), 100, 1, None, "u".into()).unwrap();
        assert_eq!((ann.start_frame(), ann.end_frame() - 1), (100, 100));
        assert_eq!(ann.version(), 1);
        assert!(ann.keyframes().is_empty());
    }

    #[test]
    fn bbox_creation_places_first_keyframe() {
        let ann = boxed(&[(0, [0.1, 0.1, 0.3, 0.3])], 50);
        assert_eq!(ann.keyframes().keys().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn creation_errors() {
        let temporal = Label::new("phase", "phase", LabelKind::Temporal);
        assert_eq!(
            create_annotation("a".into(), &temporal, &video(100), 90, 20, None, "u".into()),
            Err(AnnotationError::OutOfBounds { start: 90, n_frames: 20, frame_count: 100 })
        );
        assert!(matches!(
            create_annotation("a".into(), &bbox_label(), &video(100), 0, 5, None, "u".into()),
            Err(AnnotationError::ShapeKindMismatch { found: None, .. })
        ));
        let point = Some(ShapeGeometry::Point(Point2::new(0.5, 0.5)));
        assert!(matches!(
            create_annotation("a".into(), &bbox_label(), &video(100), 0, 5, point, "u".into()),
            Err(AnnotationError::ShapeKindMismatch { .. })
        ));
        assert_eq!(
            create_annotation("a".into(), &temporal, &video(100), 0, 0, None, "u".into()),
            Err(AnnotationError::EmptySpan)
        );
    }

    #[test]
    fn interpolation_midpoint_keyframe_and_hold() {
        let ann = boxed(&[(0, [0.0, 0.0, 0.2, 0.2]), (10, [0.2, 0.2, 0.4, 0.4])], 30);
        assert_box(&interpolate_shape(&ann, 5).unwrap(), [0.1, 0.1, 0.3, 0.3]);
        assert_eq!(interpolate_shape(&ann, 10).unwrap(), ShapeGeometry::bbox(0.2, 0.2, 0.4, 0.4));
        assert_eq!(interpolate_shape(&ann, 29).unwrap(), ShapeGeometry::bbox(0.2, 0.2, 0.4, 0.4));
        assert_eq!(interpolate_shape(&ann, 30), Err(AnnotationError::OutsideSpan { frame: 30 }));
    }

    #[test]
    fn cut_temporal_interval() {
        let label = Label::new("phase", "phase", LabelKind::Temporal);
        let ann = create_annotation("a".into(), &label, &video(1000), 0, 100, None, "u".into()).unwrap();
        let (a, b) = cut_annotation(&ann, 40, "b".into()).unwrap();
        assert_eq!((a.start_frame(), a.end_frame()), (0, 40));
        assert_eq!((b.start_frame(), b.end_frame()), (40, 100));
        assert_eq!(b.id().as_str(), "b");
    }

    #[test]
    fn cut_synthesizes_keyframes() {
        let ann = boxed(&[(0, [0.0, 0.0, 0.2, 0.2]), (10, [0.2, 0.2, 0.4, 0.4])], 20);
        let (first, second) = cut_annotation(&ann, 5, "b".into()).unwrap();
        let (&start, shape) = second.keyframes().iter().next().unwrap();
        assert_eq!(start, 5);
        assert_box(shape, [0.1, 0.1, 0.3, 0.3]);
        assert!(first.keyframes().contains_key(&4));
        for f in 0..20 {
            let half = if f < 5 { &first } else { &second };
            let (got, want) = (interpolate_shape(half, f).unwrap(), interpolate_shape(&ann, f).unwrap());
            for (g, w) in got.scalars().iter().zip(want.scalars()) {
                assert!((g - w).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cut_rejects_boundaries() {
        let ann = boxed(&[(10, [0.0, 0.0, 0.2, 0.2])], 20);
        assert_eq!(cut_annotation(&ann, 10, "b".into()), Err(AnnotationError::CutOutsideSpan { frame: 10 }));
        assert_eq!(cut_annotation(&ann, 30, "b".into()), Err(AnnotationError::CutOutsideSpan { frame: 30 }));
    }

    #[test]
    fn cut_copies_instance() {
        let mut ann = boxed(&[(0, [0.0, 0.0, 0.2, 0.2])], 20);
        ann.set_instance(Some("grasper-1".into()));
        let (a, b) = cut_annotation(&ann, 7, "b".into()).unwrap();
        assert_eq!(a.instance(), Some("grasper-1"));
        assert_eq!(b.instance(), Some("grasper-1"));
    }

    #[test]
    fn duplicate_is_isolated() {
        let ann = boxed(&[(0, [0.0, 0.0, 0.2, 0.2]), (5, [0.1, 0.1, 0.2, 0.2]), (9, [0.3, 0.3, 0.4, 0.4])], 20);
        let mut copy = duplicate_annotation(&ann, "copy".into());
        assert_ne!(copy.id(), ann.id());
        assert_eq!(copy.version(), 1);
        assert_eq!(copy.keyframes(), ann.keyframes());
        assert_eq!((copy.start_frame(), copy.n_frames()), (ann.start_frame(), ann.n_frames()));
        copy.set_keyframe(&bbox_label(), 5, ShapeGeometry::bbox(0.5, 0.5, 0.6, 0.6)).unwrap();
        assert_eq!(ann.keyframes()[&5], ShapeGeometry::bbox(0.1, 0.1, 0.2, 0.2));
        assert_eq!(ann.keyframes().len(), 3);
    }

    #[test]
    fn set_span_keeps_visible_geometry() {
        let mut ann = boxed(&[(0, [0.0, 0.0, 0.2, 0.2]), (10, [0.2, 0.2, 0.4, 0.4])], 20);
        let before = interpolate_shape(&ann, 7).unwrap();
        ann.set_span(&video(1000), 5, 10).unwrap();
        assert_eq!(ann.keyframes().keys().copied().collect::<Vec<_>>(), vec![5, 10]);
        let after = interpolate_shape(&ann, 7).unwrap();
        for (g, w) in after.scalars().iter().zip(before.scalars()) {
            assert!((g - w).abs() < 1e-9);
        }
        assert!(ann.set_span(&video(1000), 995, 10).is_err());
    }

    #[test]
    fn first_keyframe_is_pinned() {
        let mut ann = boxed(&[(0, [0.0, 0.0, 0.2, 0.2]), (10, [0.2, 0.2, 0.4, 0.4])], 20);
        assert_eq!(ann.remove_keyframe(0), Err(AnnotationError::FirstKeyframe));
        assert!(ann.remove_keyframe(10).is_ok());
    }

    #[test]
    fn frame_at_clamps_and_refuses_vfr() {
        let mut v = video(100);
        assert_eq!(v.frame_at(100.0), Ok(99));
        v.variable_frame_rate = true;
        assert_eq!(v.frame_at(1.0), Err(TimebaseError::NonConstantFrameRate));
    }

    #[test]
    fn colors_parse() {
        assert_eq!("#FF8000".parse::<Color>(), Ok(Color([255, 128, 0])));
        assert_eq!(Color([255, 128, 0]).to_string(), "#ff8000");
        assert!("red".parse::<Color>().is_err());
    }
}
