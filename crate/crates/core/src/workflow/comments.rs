use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Group, WorkflowError};
use crate::ids::{AnnotationId, ThreadId, UserId, VideoId};

/// What a thread is attached to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Anchor {
    Group,
    Video(VideoId),
    Annotation(AnnotationId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub author: UserId,
    pub at: DateTime<Utc>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentThread {
    pub id: ThreadId,
    pub anchor: Anchor,
    pub comments: Vec<Comment>,
    pub resolved: bool,
}

/// Comment threads of one group.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommentBoard {
    threads: BTreeMap<ThreadId, CommentThread>,
}

impl CommentBoard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn thread(&self, id: &ThreadId) -> Option<&CommentThread> {
        self.threads.get(id)
    }

    /// Open a new thread on `anchor` with a first comment. `anchor_visible`
    /// tells whether the author can see the anchored entity.
    pub fn open(
        &mut self,
        id: ThreadId,
        anchor: Anchor,
        comment: Comment,
        anchor_visible: bool,
    ) -> Result<&CommentThread, WorkflowError> {
        if !anchor_visible {
            return Err(WorkflowError::NotVisibleAnchor);
        }
        if comment.text.trim().is_empty() {
            return Err(WorkflowError::EmptyComment);
        }
        let thread = CommentThread { id: id.clone(), anchor, comments: vec![comment], resolved: false };
        Ok(self.threads.entry(id).or_insert(thread))
    }

    /// Reply to a thread. Posting to a resolved thread reopens it.
    pub fn reply(&mut self, id: &ThreadId, comment: Comment, anchor_visible: bool) -> Result<&CommentThread, WorkflowError> {
        if !anchor_visible {
            return Err(WorkflowError::NotVisibleAnchor);
        }
        if comment.text.trim().is_empty() {
            return Err(WorkflowError::EmptyComment);
        }
        let thread = self.threads.get_mut(id).ok_or_else(|| WorkflowError::UnknownThread(id.clone()))?;
        thread.comments.push(comment);
        thread.resolved = false;
        Ok(thread)
    }

    pub fn resolve(&mut self, id: &ThreadId) -> Result<&CommentThread, WorkflowError> {
        let thread = self.threads.get_mut(id).ok_or_else(|| WorkflowError::UnknownThread(id.clone()))?;
        thread.resolved = true;
        Ok(thread)
    }

    /// Drop threads anchored to something that no longer exists.
    pub fn drop_anchor(&mut self, anchor: &Anchor) {
        self.threads.retain(|_, t| &t.anchor != anchor);
    }

    /// Threads as `viewer` sees them: in supervised groups annotators only
    /// see their own comments and those of managers. Threads left empty by
    /// the filter are omitted.
    pub fn visible_to(&self, group: &Group, viewer: &UserId, anchor_visible: impl Fn(&Anchor) -> bool) -> Vec<CommentThread> {
        self.threads
            .values()
            .filter(|t| anchor_visible(&t.anchor))
            .filter_map(|t| {
                let comments: Vec<Comment> =
                    t.comments.iter().filter(|c| group.sees_work_of(viewer, &c.author)).cloned().collect();
                (!comments.is_empty()).then(|| CommentThread { comments, ..t.clone() })
            })
            .collect()
    }

    /// Annotations carrying an unresolved thread visible to `viewer`.
    pub fn flagged_annotations(&self, group: &Group, viewer: &UserId) -> BTreeSet<AnnotationId> {
        self.visible_to(group, viewer, |a| matches!(a, Anchor::Annotation(_)))
            .into_iter()
            .filter(|t| !t.resolved)
            .filter_map(|t| match t.anchor {
                Anchor::Annotation(id) => Some(id),
                _ => None,
            })
            .collect()
    }
}
