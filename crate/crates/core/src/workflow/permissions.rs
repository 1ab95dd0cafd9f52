use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Group-level permissions a member can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Permission {
    AddRemoveUsers,
    ManageUserAccess,
    AddVideos,
    RemoveVideos,
    CreateAnnotations,
    ManageAnnotations,
    DownloadAnnotations,
    ManageQuestions,
    AnswerQuestions,
    CreateLabels,
    ManageLabels,
    EditGroup,
}

impl Permission {
    pub const ALL: [Permission; 12] = [
        Permission::AddRemoveUsers,
        Permission::ManageUserAccess,
        Permission::AddVideos,
        Permission::RemoveVideos,
        Permission::CreateAnnotations,
        Permission::ManageAnnotations,
        Permission::DownloadAnnotations,
        Permission::ManageQuestions,
        Permission::AnswerQuestions,
        Permission::CreateLabels,
        Permission::ManageLabels,
        Permission::EditGroup,
    ];

    fn bit(self) -> u16 {
        1 << self as u16
    }

    pub fn name(self) -> &'static str {
        match self {
            Permission::AddRemoveUsers => "add_remove_users",
            Permission::ManageUserAccess => "manage_user_access",
            Permission::AddVideos => "add_videos",
            Permission::RemoveVideos => "remove_videos",
            Permission::CreateAnnotations => "create_annotations",
            Permission::ManageAnnotations => "manage_annotations",
            Permission::DownloadAnnotations => "download_annotations",
            Permission::ManageQuestions => "manage_questions",
            Permission::AnswerQuestions => "answer_questions",
            Permission::CreateLabels => "create_labels",
            Permission::ManageLabels => "manage_labels",
            Permission::EditGroup => "edit_group",
        }
    }
}

impl FromStr for Permission {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Permission::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown permission `{s}`"))
    }
}

/// A set of [`Permission`]s, serialized as a list of names.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Permission>", into = "Vec<Permission>")]
pub struct PermissionSet(u16);

impl PermissionSet {
    pub const EMPTY: PermissionSet = PermissionSet(0);
    pub const ALL: PermissionSet = PermissionSet((1 << 12) - 1);

    /// The set whose bit `i` is `Permission::ALL[i]`; higher bits are ignored.
    pub fn from_bits(bits: u16) -> Self {
        PermissionSet(bits & Self::ALL.0)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn contains(self, p: Permission) -> bool {
        self.0 & p.bit() != 0
    }

    pub fn insert(&mut self, p: Permission) {
        self.0 |= p.bit();
    }

    pub fn remove(&mut self, p: Permission) {
        self.0 &= !p.bit();
    }

    pub fn with(mut self, p: Permission) -> Self {
        self.insert(p);
        self
    }

    pub fn iter(self) -> impl Iterator<Item = Permission> {
        Permission::ALL.into_iter().filter(move |p| self.contains(*p))
    }
}

impl FromIterator<Permission> for PermissionSet {
    fn from_iter<I: IntoIterator<Item = Permission>>(iter: I) -> Self {
        iter.into_iter().fold(PermissionSet::EMPTY, PermissionSet::with)
    }
}

impl From<Vec<Permission>> for PermissionSet {
    fn from(v: Vec<Permission>) -> Self {
        v.into_iter().collect()
    }
}

impl From<PermissionSet> for Vec<Permission> {
    fn from(s: PermissionSet) -> Self {
        s.iter().collect()
    }
}

impl fmt::Debug for PermissionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(Permission::name)).finish()
    }
}

/// Something a member attempts inside a group.
///
/// `own` tells whether the target annotation was created by the actor;
/// `with_questions` whether the target label (or the label of the target
/// annotation) carries a Questions form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    ManageMembers,
    /// Levels, assignments and video status on behalf of others.
    ManageAccess,
    AddVideo,
    RemoveVideo,
    CreateAnnotation { with_questions: bool },
    EditAnnotation { own: bool, with_questions: bool },
    DeleteAnnotation { own: bool, with_questions: bool },
    EditAttributes,
    AnswerQuestions,
    DownloadAnnotations,
    CreateLabel { with_questions: bool },
    EditLabel { with_questions: bool },
    DeleteLabel { with_questions: bool },
    BuildQuestionForm,
    EditGroup,
    ConfigureGroundTruth,
    Review,
}

impl Action {
    /// Every distinct action value.
    pub fn all() -> Vec<Action> {
        use Action::*;
        let mut all = vec![
            ManageMembers,
            ManageAccess,
            AddVideo,
            RemoveVideo,
            EditAttributes,
            AnswerQuestions,
            DownloadAnnotations,
            BuildQuestionForm,
            EditGroup,
            ConfigureGroundTruth,
            Review,
        ];
        for q in [false, true] {
            all.extend([CreateAnnotation { with_questions: q }, CreateLabel { with_questions: q }]);
            all.extend([EditLabel { with_questions: q }, DeleteLabel { with_questions: q }]);
            for own in [false, true] {
                all.extend([EditAnnotation { own, with_questions: q }, DeleteAnnotation { own, with_questions: q }]);
            }
        }
        all
    }
}

/// Decide `action` for a member holding `perms`. Managers hold every
/// permission and may also do the manager-only actions.
pub fn allows(perms: PermissionSet, is_manager: bool, action: Action) -> bool {
    use Permission::*;
    if is_manager {
        return true;
    }
    let has = |p| perms.contains(p);
    let questions_ok = |with_questions: bool| !with_questions || has(ManageQuestions);
    match action {
        Action::ManageMembers => has(AddRemoveUsers),
        Action::ManageAccess => has(ManageUserAccess),
        Action::AddVideo => has(AddVideos),
        Action::RemoveVideo => has(RemoveVideos),
        Action::CreateAnnotation { with_questions } => has(CreateAnnotations) && questions_ok(with_questions),
        Action::EditAnnotation { own, with_questions } | Action::DeleteAnnotation { own, with_questions } => {
            let base = if own { has(CreateAnnotations) || has(ManageAnnotations) } else { has(ManageAnnotations) };
            base && questions_ok(with_questions)
        }
        Action::EditAttributes => has(CreateAnnotations) || has(ManageAnnotations),
        Action::AnswerQuestions => has(AnswerQuestions),
        Action::DownloadAnnotations => has(DownloadAnnotations),
        Action::CreateLabel { with_questions } => has(CreateLabels) && questions_ok(with_questions),
        Action::EditLabel { with_questions } | Action::DeleteLabel { with_questions } => {
            has(ManageLabels) && questions_ok(with_questions)
        }
        Action::BuildQuestionForm => has(ManageLabels) && has(ManageQuestions),
        Action::EditGroup => has(EditGroup),
        Action::ConfigureGroundTruth => false,
        Action::Review => has(ManageAnnotations),
    }
}
