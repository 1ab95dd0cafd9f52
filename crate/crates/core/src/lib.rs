//! Domain engine for group-centric video annotation and assessment.
//!
//! Everything in this crate is a pure function of its inputs: identifiers
//! and timestamps are supplied by the caller, nothing touches the clock,
//! the filesystem or a random source. The HTTP service and the browser
//! demo both build on it.
//!
//! * [`annotation`]: labels, shapes, keyframe interpolation, frame/time
//!   conversion, cut/duplicate and the undo log.
//! * [`ontology`]: a group's label vocabulary and its folder tree.
//! * [`interchange`]: the canonical JSON annotation document.
//! * [`forms`]: rubric schemas, answer sets, completeness and answer comparison.
//! * [`workflow`]: groups, permissions, video visibility, status machine,
//!   reviewer labels and comment threads.
//! * [`evaluation`]: progress, scoring against ground truth and level-up.

pub mod annotation;
pub mod evaluation;
pub mod forms;
pub mod ids;
pub mod interchange;
pub mod ontology;
pub mod workflow;

pub use ids::{
    AnnotationId, DocumentId, GroupId, IdSource, LabelId, ProtocolId, QuestionId,
    SequentialIds, ThreadId, UserId, VideoId,
};
