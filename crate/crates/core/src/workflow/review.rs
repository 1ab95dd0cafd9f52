use std::collections::BTreeMap;

use serde::Serialize;

use crate::annotation::Label;
use crate::ids::{IdSource, LabelId};
use crate::ontology::{Ontology, OntologyError};

/// Name prefix of reviewer labels.
pub const REVIEW_PREFIX: &str = "correct_";

/// Changes made by [`ensure_review_labels`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReviewDelta {
    pub created: Vec<Label>,
    /// Existing `correct_X` labels now linked to `X`.
    pub linked: Vec<LabelId>,
    /// Base labels whose `correct_` name is taken by a label of another kind.
    pub conflicts: Vec<LabelId>,
}

impl ReviewDelta {
    pub fn is_empty(&self) -> bool {
        self.created.is_empty() && self.linked.is_empty() && self.conflicts.is_empty()
    }
}

pub fn is_review_label(label: &Label) -> bool {
    label.review_of.is_some()
}

/// Give every ordinary label `X` a reviewer twin `correct_X` of the same
/// kind. Idempotent. An existing, unlinked `correct_X` of the right kind is
/// linked instead of duplicated.
pub fn ensure_review_labels(ontology: &mut Ontology, ids: &mut dyn IdSource) -> Result<ReviewDelta, OntologyError> {
    let mut delta = ReviewDelta::default();
    let twin_name = |l: &Label| format!("{REVIEW_PREFIX}{}", l.name);

    // Link first, so a pre-existing correct_X is not itself treated as a base.
    let bases: Vec<Label> = ontology.labels().iter().filter(|l| !is_review_label(l)).cloned().collect();
    let mut linked_twins = Vec::new();
    for base in &bases {
        let linked_meanwhile = ontology.get(&base.id).is_some_and(is_review_label);
        if linked_meanwhile || ontology.labels().iter().any(|l| l.review_of.as_ref() == Some(&base.id)) {
            continue;
        }
        if let Some(existing) = ontology.by_name(&twin_name(base)).filter(|l| !is_review_label(l)).cloned() {
            if existing.kind == base.kind {
                let mut twin = existing;
                twin.review_of = Some(base.id.clone());
                linked_twins.push(twin.id.clone());
                ontology.update_label(twin)?;
            } else {
                delta.conflicts.push(base.id.clone());
            }
        }
    }
    delta.linked = linked_twins;

    for base in ontology.labels().iter().filter(|l| !is_review_label(l)).cloned().collect::<Vec<_>>() {
        let has_twin = ontology.labels().iter().any(|l| l.review_of.as_ref() == Some(&base.id));
        if has_twin || delta.conflicts.contains(&base.id) {
            continue;
        }
        let mut twin = Label::new(ids.label_id(), twin_name(&base), base.kind).with_color(base.color);
        twin.group_path = base.group_path.clone();
        twin.review_of = Some(base.id.clone());
        ontology.add_label(twin.clone())?;
        delta.created.push(twin);
    }
    Ok(delta)
}

/// Copy every label of `source` into `target` under fresh ids. Colliding
/// names get a `_2`, `_3`, ... suffix. Returns the copies.
pub fn import_ontology(source: &Ontology, target: &mut Ontology, ids: &mut dyn IdSource) -> Result<Vec<Label>, OntologyError> {
    for folder in source.folders() {
        target.add_folder(folder)?;
    }
    let mut new_ids: BTreeMap<LabelId, LabelId> = BTreeMap::new();
    for l in source.labels() {
        new_ids.insert(l.id.clone(), ids.label_id());
    }
    // Review targets first so links can be checked on insertion.
    let mut ordered: Vec<&Label> = source.labels().iter().filter(|l| !is_review_label(l)).collect();
    ordered.extend(source.labels().iter().filter(|l| is_review_label(l)));

    let mut copies = Vec::new();
    for l in ordered {
        let mut copy = l.clone();
        copy.id = new_ids[&l.id].clone();
        copy.review_of = l.review_of.as_ref().and_then(|r| new_ids.get(r).cloned());
        copy.name = free_name(target, &l.name);
        target.add_label(copy.clone())?;
        copies.push(copy);
    }
    Ok(copies)
}

fn free_name(ontology: &Ontology, name: &str) -> String {
    if ontology.by_name(name).is_none() {
        return name.to_owned();
    }
    (2..)
        .map(|i| format!("{name}_{i}"))
        .find(|n| ontology.by_name(n).is_none())
        .expect("unbounded search")
}
