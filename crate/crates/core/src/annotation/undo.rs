use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Annotation;
use crate::ids::AnnotationId;

/// Entries kept per (video, user) history.
pub const UNDO_DEPTH: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UndoError {
    #[error("nothing to undo")]
    EmptyHistory,
}

/// A recorded change to an annotation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UndoAction {
    Created(Annotation),
    Deleted(Annotation),
    /// Snapshot taken before an edit.
    Edited { before: Annotation },
}

impl UndoAction {
    fn inverse(self) -> Inverse {
        match self {
            UndoAction::Created(a) => Inverse::Remove(a.id().clone()),
            UndoAction::Deleted(a) | UndoAction::Edited { before: a } => Inverse::Restore(a),
        }
    }
}

/// The change that reverts an [`UndoAction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Inverse {
    Remove(AnnotationId),
    Restore(Annotation),
}

impl Inverse {
    pub fn annotation_id(&self) -> &AnnotationId {
        match self {
            Inverse::Remove(id) => id,
            Inverse::Restore(a) => a.id(),
        }
    }

    /// Apply to `set`. A restored annotation takes a version above whatever
    /// it replaces so clients never see versions go backwards.
    pub fn apply(&self, set: &mut BTreeMap<AnnotationId, Annotation>) -> Option<Annotation> {
        match self {
            Inverse::Remove(id) => set.remove(id),
            Inverse::Restore(before) => {
                let mut restored = before.clone();
                let floor = set.get(before.id()).map_or(before.version(), Annotation::version);
                restored.set_version(floor.max(before.version()) + 1);
                set.insert(restored.id().clone(), restored)
            }
        }
    }
}

/// Bounded history of annotation changes. Each entry is a batch of actions
/// undone together (a cut edits one annotation and creates another).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UndoLog {
    entries: VecDeque<Vec<UndoAction>>,
    depth: usize,
}

impl Default for UndoLog {
    fn default() -> Self {
        Self::with_depth(UNDO_DEPTH)
    }
}

impl UndoLog {
    pub fn with_depth(depth: usize) -> Self {
        Self { entries: VecDeque::new(), depth: depth.max(1) }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn record(&mut self, action: UndoAction) {
        self.record_batch(vec![action]);
    }

    pub fn record_batch(&mut self, actions: Vec<UndoAction>) {
        if actions.is_empty() {
            return;
        }
        if self.entries.len() == self.depth {
            self.entries.pop_front();
        }
        self.entries.push_back(actions);
    }

    /// Pop the latest entry and return its inverses, most recent action first.
    pub fn undo(&mut self) -> Result<Vec<Inverse>, UndoError> {
        let batch = self.entries.pop_back().ok_or(UndoError::EmptyHistory)?;
        Ok(batch.into_iter().rev().map(UndoAction::inverse).collect())
    }

    /// Forget entries touching `id`, e.g. after someone else deleted it.
    pub fn forget(&mut self, id: &AnnotationId) {
        self.entries.retain(|batch| {
            !batch.iter().any(|a| match a {
                UndoAction::Created(x) | UndoAction::Deleted(x) | UndoAction::Edited { before: x } => x.id() == id,
            })
        });
    }
}
