//! Access decisions shared by every operation. Administrators act as
//! managers of every group.

use std::collections::BTreeSet;

use framewise_core::ids::{GroupId, UserId, VideoId};
use framewise_core::workflow::Action;

use super::Result;
use crate::error::ApiError;
use crate::state::{AccountState, GroupState, Role, State, UserAccount};

impl State {
    pub fn user(&self, id: &UserId) -> Result<&UserAccount> {
        self.users.get(id).ok_or_else(|| ApiError::NotFound(format!("user {id}")))
    }

    pub fn user_by_email(&self, email: &str) -> Option<&UserAccount> {
        let email = email.trim();
        self.users.values().find(|u| u.email.eq_ignore_ascii_case(email))
    }

    pub fn is_admin(&self, user: &UserId) -> bool {
        self.users.get(user).is_some_and(|u| u.state == AccountState::Active && u.roles.contains(&Role::Administrator))
    }

    pub fn require_role(&self, user: &UserId, role: Role) -> Result<()> {
        if self.users.get(user).is_some_and(|u| u.has(role)) {
            Ok(())
        } else {
            Err(ApiError::RoleMissing(role))
        }
    }

    pub fn require_admin(&self, user: &UserId) -> Result<()> {
        if self.is_admin(user) {
            Ok(())
        } else {
            Err(ApiError::PermissionDenied)
        }
    }

    /// The group if `user` belongs to it (or administers the platform).
    /// Outsiders get NotFound so group ids do not leak.
    pub fn group_for(&self, user: &UserId, group: &GroupId) -> Result<&GroupState> {
        match self.groups.get(group) {
            Some(gs) if gs.group.is_member(user) || self.is_admin(user) => Ok(gs),
            _ => Err(ApiError::NotFound(format!("group {group}"))),
        }
    }

    pub fn can(&self, user: &UserId, gs: &GroupState, action: Action) -> bool {
        self.is_admin(user) || gs.group.check(user, action)
    }

    pub fn require(&self, user: &UserId, gs: &GroupState, action: Action) -> Result<()> {
        if self.can(user, gs, action) {
            Ok(())
        } else {
            Err(ApiError::PermissionDenied)
        }
    }

    pub fn manages(&self, user: &UserId, gs: &GroupState) -> bool {
        self.is_admin(user) || gs.group.is_manager(user)
    }

    /// Sees every video and is not level-gated.
    pub fn sees_all(&self, user: &UserId, gs: &GroupState) -> bool {
        self.is_admin(user) || gs.group.membership(user).is_ok_and(|m| m.sees_everything())
    }

    pub fn visible_videos(&self, user: &UserId, gs: &GroupState) -> BTreeSet<VideoId> {
        if self.is_admin(user) {
            return gs.group.videos().keys().cloned().collect();
        }
        gs.group.visible_videos(user).unwrap_or_default()
    }

    pub fn sees_video(&self, user: &UserId, gs: &GroupState, video: &VideoId) -> bool {
        if self.is_admin(user) {
            return gs.group.videos().contains_key(video);
        }
        gs.group.can_see_video(user, video)
    }

    pub fn require_video(&self, user: &UserId, gs: &GroupState, video: &VideoId) -> Result<()> {
        if self.sees_video(user, gs, video) {
            Ok(())
        } else {
            Err(ApiError::NotFound(format!("video {video}")))
        }
    }

    /// Whether `viewer` may see annotations and answers by `author`.
    pub fn sees_work(&self, viewer: &UserId, gs: &GroupState, author: &UserId) -> bool {
        self.is_admin(viewer) || gs.group.sees_work_of(viewer, author)
    }
}
