//! A group's label vocabulary, organized in a folder tree.
//!
//! Labels reference folders through their `group_path`; annotations only
//! reference label ids, so moving labels between folders never touches
//! annotation data.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::Label;
use crate::ids::LabelId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("label names must be non-empty")]
    EmptyName,
    #[error("a label named `{0}` already exists")]
    DuplicateName(String),
    #[error("label id `{0}` already exists")]
    DuplicateId(LabelId),
    #[error("unknown label `{0}`")]
    UnknownLabel(LabelId),
    #[error("folder {0:?} does not exist")]
    UnknownFolder(Vec<String>),
    #[error("review label must pair with an existing label of the same kind")]
    BadReviewTarget,
    #[error("folder names must be non-empty")]
    EmptyFolderName,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ontology {
    labels: Vec<Label>,
    folders: BTreeSet<Vec<String>>,
}

/// Folder node of [`Ontology::tree`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub name: String,
    pub labels: Vec<LabelId>,
    pub children: Vec<TreeNode>,
}

impl Ontology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, id: &LabelId) -> Option<&Label> {
        self.labels.iter().find(|l| &l.id == id)
    }

    pub fn by_name(&self, name: &str) -> Option<&Label> {
        self.labels.iter().find(|l| l.name == name)
    }

    pub fn folders(&self) -> impl Iterator<Item = &Vec<String>> {
        self.folders.iter()
    }

    /// Create a folder and its ancestors.
    pub fn add_folder(&mut self, path: &[String]) -> Result<(), OntologyError> {
        if path.iter().any(|p| p.trim().is_empty()) {
            return Err(OntologyError::EmptyFolderName);
        }
        for depth in 1..=path.len() {
            self.folders.insert(path[..depth].to_vec());
        }
        Ok(())
    }

    fn check_path(&self, path: &[String]) -> Result<(), OntologyError> {
        if path.is_empty() || self.folders.contains(path) {
            Ok(())
        } else {
            Err(OntologyError::UnknownFolder(path.to_vec()))
        }
    }

    fn check_review(&self, label: &Label) -> Result<(), OntologyError> {
        if let Some(target) = &label.review_of {
            match self.get(target) {
                Some(t) if t.kind == label.kind && t.id != label.id => {}
                _ => return Err(OntologyError::BadReviewTarget),
            }
        }
        Ok(())
    }

    /// Insert a label. Folders named in its path are created on the fly.
    pub fn add_label(&mut self, label: Label) -> Result<(), OntologyError> {
        if label.name.trim().is_empty() {
            return Err(OntologyError::EmptyName);
        }
        if self.by_name(&label.name).is_some() {
            return Err(OntologyError::DuplicateName(label.name));
        }
        if self.get(&label.id).is_some() {
            return Err(OntologyError::DuplicateId(label.id));
        }
        self.check_review(&label)?;
        self.add_folder(&label.group_path)?;
        self.labels.push(label);
        Ok(())
    }

    /// Replace a label's attributes (name, color, path, form, review link).
    /// The kind is fixed once annotations may exist.
    pub fn update_label(&mut self, label: Label) -> Result<Label, OntologyError> {
        if label.name.trim().is_empty() {
            return Err(OntologyError::EmptyName);
        }
        if self.labels.iter().any(|l| l.name == label.name && l.id != label.id) {
            return Err(OntologyError::DuplicateName(label.name));
        }
        self.check_path(&label.group_path)?;
        self.check_review(&label)?;
        let slot = self
            .labels
            .iter_mut()
            .find(|l| l.id == label.id)
            .ok_or_else(|| OntologyError::UnknownLabel(label.id.clone()))?;
        let mut label = label;
        label.kind = slot.kind;
        Ok(std::mem::replace(slot, label))
    }

    /// Move a label to an existing folder.
    pub fn move_label(&mut self, id: &LabelId, path: Vec<String>) -> Result<(), OntologyError> {
        self.check_path(&path)?;
        let label = self
            .labels
            .iter_mut()
            .find(|l| &l.id == id)
            .ok_or_else(|| OntologyError::UnknownLabel(id.clone()))?;
        label.group_path = path;
        Ok(())
    }

    /// Remove a label; reviewer labels pointing at it are removed too.
    /// Returns every removed label.
    pub fn remove_label(&mut self, id: &LabelId) -> Result<Vec<Label>, OntologyError> {
        if self.get(id).is_none() {
            return Err(OntologyError::UnknownLabel(id.clone()));
        }
        let (removed, kept) = self
            .labels
            .drain(..)
            .partition(|l| &l.id == id || l.review_of.as_ref() == Some(id));
        self.labels = kept;
        Ok(removed)
    }

    /// Nested view of folders and labels; top-level labels sit in the root node.
    pub fn tree(&self) -> TreeNode {
        fn build(ontology: &Ontology, prefix: &[String], name: String) -> TreeNode {
            let labels = ontology
                .labels
                .iter()
                .filter(|l| l.group_path == prefix)
                .map(|l| l.id.clone())
                .collect();
            let children = ontology
                .folders
                .iter()
                .filter(|f| f.len() == prefix.len() + 1 && f.starts_with(prefix))
                .map(|f| build(ontology, f, f.last().cloned().unwrap_or_default()))
                .collect();
            TreeNode { name, labels, children }
        }
        build(self, &[], String::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::LabelKind;

    fn path(p: &[&str]) -> Vec<String> {
        p.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn names_are_unique_and_non_empty() {
        let mut o = Ontology::new();
        o.add_label(Label::new("1", "phase", LabelKind::Temporal)).unwrap();
        assert_eq!(
            o.add_label(Label::new("2", "phase", LabelKind::Point)),
            Err(OntologyError::DuplicateName("phase".into()))
        );
        assert_eq!(o.add_label(Label::new("3", " ", LabelKind::Point)), Err(OntologyError::EmptyName));
    }

    #[test]
    fn review_link_needs_same_kind() {
        let mut o = Ontology::new();
        o.add_label(Label::new("a", "A", LabelKind::BoundingBox)).unwrap();
        let mut bad = Label::new("b", "correct_A", LabelKind::Point);
        bad.review_of = Some("a".into());
        assert_eq!(o.add_label(bad), Err(OntologyError::BadReviewTarget));
    }

    #[test]
    fn tree_reflects_paths() {
        let mut o = Ontology::new();
        let mut step = Label::new("s", "dissection", LabelKind::Temporal);
        step.group_path = path(&["phases", "steps"]);
        o.add_label(step).unwrap();
        o.add_label(Label::new("t", "tool", LabelKind::BoundingBox)).unwrap();
        let tree = o.tree();
        assert_eq!(tree.labels, vec![LabelId::from("t")]);
        assert_eq!(tree.children[0].name, "phases");
        assert_eq!(tree.children[0].children[0].labels, vec![LabelId::from("s")]);

        o.move_label(&"s".into(), path(&["phases"])).unwrap();
        assert_eq!(o.tree().children[0].labels, vec![LabelId::from("s")]);
        assert!(o.move_label(&"s".into(), path(&["nowhere"])).is_err());
    }

    #[test]
    fn removing_a_label_drops_its_review_twin() {
        let mut o = Ontology::new();
        o.add_label(Label::new("a", "A", LabelKind::Point)).unwrap();
        let mut twin = Label::new("c", "correct_A", LabelKind::Point);
        twin.review_of = Some("a".into());
        o.add_label(twin).unwrap();
        assert_eq!(o.remove_label(&"a".into()).unwrap().len(), 2);
        assert!(o.is_empty());
    }

    #[test]
    fn kind_is_immutable_on_update() {
        let mut o = Ontology::new();
        o.add_label(Label::new("a", "A", LabelKind::Point)).unwrap();
        let mut changed = Label::new("a", "B", LabelKind::Polygon);
        changed.color = "#ff0000".parse().unwrap();
        o.update_label(changed).unwrap();
        let l = o.get(&"a".into()).unwrap();
        assert_eq!((l.name.as_str(), l.kind), ("B", LabelKind::Point));
    }
}
