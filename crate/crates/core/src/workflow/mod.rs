//! Groups, memberships, video assignment and the annotation workflow.

mod comments;
mod permissions;
mod review;
mod status;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use comments::{Anchor, Comment, CommentBoard, CommentThread};
pub use permissions::{allows, Action, Permission, PermissionSet};
pub use review::{ensure_review_labels, import_ontology, is_review_label, ReviewDelta, REVIEW_PREFIX};
pub use status::{on_first_annotation, transition_rule, Requirement, VideoStatus};

use crate::evaluation::GroundTruthConfig;
use crate::ids::{DocumentId, GroupId, ThreadId, UserId, VideoId};
use crate::ontology::Ontology;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkflowError {
    #[error("`{0}` is not a member of the group")]
    NotAMember(UserId),
    #[error("`{0}` is already a member of the group")]
    AlreadyMember(UserId),
    #[error("private groups have a single member")]
    PrivateGroupClosed,
    #[error("the owner cannot leave their private group")]
    OwnerCannotLeave,
    #[error("video `{0}` is not in the group")]
    UnknownVideo(VideoId),
    #[error("video `{0}` is already in the group")]
    DuplicateVideo(VideoId),
    #[error("status cannot change from {from} to {to}")]
    IllegalTransition { from: VideoStatus, to: VideoStatus },
    #[error("only reviewers can make this status change")]
    NotAReviewer,
    #[error("the comment target is not visible")]
    NotVisibleAnchor,
    #[error("unknown comment thread `{0}`")]
    UnknownThread(ThreadId),
    #[error("comments must not be empty")]
    EmptyComment,
    #[error("permission denied")]
    PermissionDenied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupType {
    /// Everyone works on every video and sees everyone's work live.
    Collaborative,
    /// Videos are assigned and level-gated; annotators are blinded from each other.
    Supervised,
    /// A single user's sandbox.
    Private,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub permissions: PermissionSet,
    pub level: u32,
    pub is_manager: bool,
}

impl Membership {
    pub fn manager() -> Self {
        Membership { permissions: PermissionSet::ALL, level: 0, is_manager: true }
    }

    pub fn annotator(permissions: PermissionSet, level: u32) -> Self {
        Membership { permissions, level, is_manager: false }
    }

    /// Managers hold every permission regardless of the stored set.
    pub fn effective(&self) -> PermissionSet {
        if self.is_manager {
            PermissionSet::ALL
        } else {
            self.permissions
        }
    }

    pub fn allows(&self, action: Action) -> bool {
        allows(self.effective(), self.is_manager, action)
    }

    /// Sees every video and every member's work.
    pub fn sees_everything(&self) -> bool {
        self.is_manager || self.permissions.contains(Permission::ManageUserAccess)
    }

    pub fn is_reviewer(&self) -> bool {
        self.is_manager || self.permissions.contains(Permission::ManageAnnotations)
    }
}

/// Per-group state of a shared video.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupVideo {
    pub level: u32,
    pub status: VideoStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRef {
    pub id: DocumentId,
    pub name: String,
    pub size: u64,
}

/// True for PDF content.
pub fn is_pdf(bytes: &[u8]) -> bool {
    bytes.starts_with(b"%PDF-")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub id: GroupId,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub gtype: GroupType,
    /// Owner of a private group.
    #[serde(default)]
    pub owner: Option<UserId>,
    members: BTreeMap<UserId, Membership>,
    videos: BTreeMap<VideoId, GroupVideo>,
    assignments: BTreeSet<(UserId, VideoId)>,
    #[serde(default)]
    pub ontology: Ontology,
    #[serde(default)]
    pub documents: Vec<DocumentRef>,
    #[serde(default)]
    pub ground_truth: Option<GroundTruthConfig>,
    /// Visible videos that earned each member's last level-up.
    #[serde(default)]
    credited: BTreeMap<UserId, BTreeSet<VideoId>>,
}

impl Group {
    /// A group whose creator becomes its first manager.
    pub fn new(id: impl Into<GroupId>, name: impl Into<String>, gtype: GroupType, creator: UserId) -> Self {
        let mut group = Group {
            id: id.into(),
            name: name.into(),
            description: String::new(),
            gtype,
            owner: (gtype == GroupType::Private).then(|| creator.clone()),
            members: BTreeMap::new(),
            videos: BTreeMap::new(),
            assignments: BTreeSet::new(),
            ontology: Ontology::new(),
            documents: Vec::new(),
            ground_truth: None,
            credited: BTreeMap::new(),
        };
        group.members.insert(creator, Membership::manager());
        group
    }

    pub fn private(id: impl Into<GroupId>, owner: UserId) -> Self {
        let name = format!("{owner} (private)");
        Group::new(id, name, GroupType::Private, owner)
    }

    pub fn members(&self) -> &BTreeMap<UserId, Membership> {
        &self.members
    }

    pub fn membership(&self, user: &UserId) -> Result<&Membership, WorkflowError> {
        self.members.get(user).ok_or_else(|| WorkflowError::NotAMember(user.clone()))
    }

    pub fn is_member(&self, user: &UserId) -> bool {
        self.members.contains_key(user)
    }

    pub fn is_manager(&self, user: &UserId) -> bool {
        self.members.get(user).is_some_and(|m| m.is_manager)
    }

    pub fn is_reviewer(&self, user: &UserId) -> bool {
        self.members.get(user).is_some_and(Membership::is_reviewer)
    }

    /// Whether `user` may perform `action`; non-members may do nothing.
    pub fn check(&self, user: &UserId, action: Action) -> bool {
        self.members.get(user).is_some_and(|m| m.allows(action))
    }

    pub fn add_member(&mut self, user: UserId, membership: Membership) -> Result<(), WorkflowError> {
        if self.gtype == GroupType::Private {
            return Err(WorkflowError::PrivateGroupClosed);
        }
        if self.members.contains_key(&user) {
            return Err(WorkflowError::AlreadyMember(user));
        }
        self.members.insert(user, membership);
        Ok(())
    }

    /// Replace a member's permissions, manager flag and level.
    pub fn update_member(&mut self, user: &UserId, membership: Membership) -> Result<(), WorkflowError> {
        if self.gtype == GroupType::Private && !membership.is_manager {
            return Err(WorkflowError::PrivateGroupClosed);
        }
        let slot = self.members.get_mut(user).ok_or_else(|| WorkflowError::NotAMember(user.clone()))?;
        *slot = membership;
        Ok(())
    }

    pub fn set_level(&mut self, user: &UserId, level: u32) -> Result<(), WorkflowError> {
        let slot = self.members.get_mut(user).ok_or_else(|| WorkflowError::NotAMember(user.clone()))?;
        slot.level = level;
        Ok(())
    }

    /// Videos already counted towards `user`'s last level-up.
    pub fn credited_videos(&self, user: &UserId) -> Option<&BTreeSet<VideoId>> {
        self.credited.get(user)
    }

    pub(crate) fn credit_videos(&mut self, user: &UserId, videos: BTreeSet<VideoId>) {
        self.credited.insert(user.clone(), videos);
    }

    pub fn remove_member(&mut self, user: &UserId) -> Result<Membership, WorkflowError> {
        if self.owner.as_ref() == Some(user) {
            return Err(WorkflowError::OwnerCannotLeave);
        }
        let m = self.members.remove(user).ok_or_else(|| WorkflowError::NotAMember(user.clone()))?;
        self.assignments.retain(|(u, _)| u != user);
        self.credited.remove(user);
        Ok(m)
    }

    pub fn videos(&self) -> &BTreeMap<VideoId, GroupVideo> {
        &self.videos
    }

    pub fn video(&self, id: &VideoId) -> Result<&GroupVideo, WorkflowError> {
        self.videos.get(id).ok_or_else(|| WorkflowError::UnknownVideo(id.clone()))
    }

    pub fn add_video(&mut self, id: VideoId, level: u32) -> Result<(), WorkflowError> {
        if self.videos.contains_key(&id) {
            return Err(WorkflowError::DuplicateVideo(id));
        }
        self.videos.insert(id, GroupVideo { level, status: VideoStatus::New });
        Ok(())
    }

    /// Remove a video from the group only; its file stays in storage.
    pub fn remove_video(&mut self, id: &VideoId) -> Result<GroupVideo, WorkflowError> {
        let v = self.videos.remove(id).ok_or_else(|| WorkflowError::UnknownVideo(id.clone()))?;
        self.assignments.retain(|(_, vid)| vid != id);
        Ok(v)
    }

    pub fn set_video_level(&mut self, id: &VideoId, level: u32) -> Result<(), WorkflowError> {
        let v = self.videos.get_mut(id).ok_or_else(|| WorkflowError::UnknownVideo(id.clone()))?;
        v.level = level;
        Ok(())
    }

    pub fn assign(&mut self, user: &UserId, video: &VideoId, assigned: bool) -> Result<(), WorkflowError> {
        self.membership(user)?;
        self.video(video)?;
        let key = (user.clone(), video.clone());
        if assigned {
            self.assignments.insert(key);
        } else {
            self.assignments.remove(&key);
        }
        Ok(())
    }

    pub fn is_assigned(&self, user: &UserId, video: &VideoId) -> bool {
        self.assignments.contains(&(user.clone(), video.clone()))
    }

    /// Videos `user` can open. Supervised groups restrict plain annotators
    /// to videos assigned to them whose level does not exceed theirs.
    pub fn visible_videos(&self, user: &UserId) -> Result<BTreeSet<VideoId>, WorkflowError> {
        let m = self.membership(user)?;
        let gated = self.gtype == GroupType::Supervised && !m.sees_everything();
        Ok(self
            .videos
            .iter()
            .filter(|(id, v)| !gated || (self.is_assigned(user, id) && v.level <= m.level))
            .map(|(id, _)| id.clone())
            .collect())
    }

    pub fn can_see_video(&self, user: &UserId, video: &VideoId) -> bool {
        self.visible_videos(user).is_ok_and(|s| s.contains(video))
    }

    /// Whether `viewer` may see work (annotations, answers) by `author`.
    /// Supervised groups blind annotators from each other; work by managers
    /// stays visible to everyone.
    pub fn sees_work_of(&self, viewer: &UserId, author: &UserId) -> bool {
        if !self.is_member(viewer) {
            return false;
        }
        self.gtype != GroupType::Supervised || viewer == author || self.is_manager(viewer) || self.is_manager(author)
    }

    /// Change a video's status on behalf of `actor`.
    pub fn transition_status(&mut self, video: &VideoId, to: VideoStatus, actor: &UserId) -> Result<VideoStatus, WorkflowError> {
        let m = self.membership(actor)?;
        if !self.can_see_video(actor, video) {
            return Err(WorkflowError::UnknownVideo(video.clone()));
        }
        let reviewer = m.is_reviewer();
        let from = self.video(video)?.status;
        match transition_rule(from, to) {
            None => return Err(WorkflowError::IllegalTransition { from, to }),
            Some(Requirement::Reviewer) if !reviewer => return Err(WorkflowError::NotAReviewer),
            Some(_) => {}
        }
        self.videos.get_mut(video).expect("checked").status = to;
        Ok(to)
    }

    /// Apply the automatic NEW/TODO -> DOING change when an annotation is
    /// added. Returns the new status when it changed.
    pub fn note_annotation_added(&mut self, video: &VideoId) -> Option<VideoStatus> {
        let v = self.videos.get_mut(video)?;
        let next = on_first_annotation(v.status)?;
        v.status = next;
        Some(next)
    }
}
