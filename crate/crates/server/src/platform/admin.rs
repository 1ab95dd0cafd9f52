use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use framewise_core::ids::{UserId, VideoId};
use serde::{Deserialize, Serialize};

use super::{Platform, Result, UserView, VideoView};
use crate::error::ApiError;
use crate::events::{Audience, EventBody};
use crate::mail::Mail;
use crate::state::{AccountState, AuditEntry, CredentialKind, Role, Settings};

#[derive(Debug, Clone, Default, Deserialize)]
pub struct SettingsPatch {
    pub two_factor: Option<bool>,
    #[serde(default)]
    pub features: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub user: UserId,
    pub email: String,
    pub kind: CredentialKind,
    pub created_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
}

impl Platform {
    pub fn admin_users(&self, actor: &UserId) -> Result<Vec<UserView>> {
        self.state.require_admin(actor)?;
        Ok(self.state.users.values().map(UserView::from).collect())
    }

    /// Move an account to `to`. Leaving Active revokes every credential.
    pub fn admin_set_state(&mut self, actor: &UserId, user: &UserId, to: AccountState) -> Result<UserView> {
        self.state.require_admin(actor)?;
        if actor == user && to != AccountState::Active {
            return Err(ApiError::Conflict("administrators cannot lock themselves out".into()));
        }
        let before = self.state.user(user)?.state;
        match to {
            AccountState::Active => self.activate_account(user)?,
            AccountState::Pending => return Err(ApiError::Invalid("accounts cannot return to pending".into())),
            _ => {
                self.state.users.get_mut(user).expect("checked").state = to;
                self.revoke_credentials(user);
            }
        }
        self.audit(actor, "set_account_state", user, before, to);
        self.commit()?;
        self.me(user)
    }

    pub fn admin_set_roles(&mut self, actor: &UserId, user: &UserId, roles: BTreeSet<Role>) -> Result<UserView> {
        self.state.require_admin(actor)?;
        if actor == user && !roles.contains(&Role::Administrator) {
            return Err(ApiError::Conflict("administrators cannot drop their own role".into()));
        }
        let account = self.state.users.get_mut(user).ok_or_else(|| ApiError::NotFound(format!("user {user}")))?;
        let before = std::mem::replace(&mut account.roles, roles.clone());
        if !roles.contains(&Role::ScriptUser) {
            self.state.sessions.retain(|_, s| !(&s.user == user && s.kind == CredentialKind::ApiToken));
        }
        self.audit(actor, "set_roles", user, before, roles);
        self.commit()?;
        self.me(user)
    }

    pub fn settings(&self) -> &Settings {
        &self.state.settings
    }

    /// Operator override from the command line; not an audited admin action.
    pub fn force_two_factor(&mut self, on: bool) -> Result<()> {
        self.state.settings.two_factor = on;
        self.commit()
    }

    pub fn admin_update_settings(&mut self, actor: &UserId, patch: SettingsPatch) -> Result<Settings> {
        self.state.require_admin(actor)?;
        let before = self.state.settings.clone();
        if let Some(on) = patch.two_factor {
            self.state.settings.two_factor = on;
        }
        self.state.settings.features.extend(patch.features);
        let after = self.state.settings.clone();
        self.audit(actor, "update_settings", "settings", before, &after);
        self.commit()?;
        Ok(after)
    }

    /// Publish new terms of use; everyone must accept the new version.
    pub fn admin_set_terms(&mut self, actor: &UserId, text: String) -> Result<Settings> {
        self.state.require_admin(actor)?;
        let before = (self.state.settings.terms_version, self.state.settings.terms_text.clone());
        self.state.settings.terms_version += 1;
        self.state.settings.terms_text = text;
        let after = (self.state.settings.terms_version, self.state.settings.terms_text.clone());
        self.audit(actor, "set_terms", "settings", before, after);
        self.commit()?;
        Ok(self.state.settings.clone())
    }

    /// Mail every active account. Returns the number of messages.
    pub fn admin_broadcast(&mut self, actor: &UserId, subject: String, body: String) -> Result<usize> {
        self.state.require_admin(actor)?;
        let to: Vec<String> = self.state.users.values().filter(|u| u.state == AccountState::Active).map(|u| u.email.clone()).collect();
        for email in &to {
            self.mailer.send(Mail { to: email.clone(), subject: subject.clone(), body: body.clone() });
        }
        self.audit(actor, "broadcast_mail", "users", (), serde_json::json!({ "subject": subject, "recipients": to.len() }));
        self.commit()?;
        Ok(to.len())
    }

    pub fn admin_videos(&self, actor: &UserId) -> Result<Vec<VideoView>> {
        self.state.require_admin(actor)?;
        Ok(self.state.videos.values().map(VideoView::from).collect())
    }

    pub fn admin_rename_video(&mut self, actor: &UserId, video: &VideoId, name: String) -> Result<VideoView> {
        self.state.require_admin(actor)?;
        let rec = self.state.videos.get_mut(video).ok_or_else(|| ApiError::NotFound(format!("video {video}")))?;
        let before = std::mem::replace(&mut rec.meta.name, name.clone());
        let view = VideoView::from(&*rec);
        self.audit(actor, "rename_video", video, before, name);
        self.commit()?;
        Ok(view)
    }

    /// Delete a video everywhere: group data, stored files and renditions.
    pub fn admin_delete_video(&mut self, actor: &UserId, video: &VideoId) -> Result<()> {
        self.state.require_admin(actor)?;
        let rec = self.state.videos.remove(video).ok_or_else(|| ApiError::NotFound(format!("video {video}")))?;
        for g in &rec.groups {
            self.drop_video_from_group(g, video);
        }
        let dir = self.video_dir(video);
        if dir.exists() {
            std::fs::remove_dir_all(dir)?;
        }
        self.audit(actor, "delete_video", video, VideoView::from(&rec), ());
        self.commit()
    }

    pub fn admin_sessions(&self, actor: &UserId) -> Result<Vec<SessionView>> {
        self.state.require_admin(actor)?;
        let now = self.now();
        Ok(self
            .state
            .sessions
            .values()
            .filter(|s| s.expires_at > now)
            .map(|s| SessionView {
                id: s.id.clone(),
                user: s.user.clone(),
                email: self.state.users.get(&s.user).map(|u| u.email.clone()).unwrap_or_default(),
                kind: s.kind,
                created_at: s.created_at,
                expires_at: s.expires_at,
            })
            .collect())
    }

    pub fn admin_audit(&self, actor: &UserId) -> Result<&[AuditEntry]> {
        self.state.require_admin(actor)?;
        Ok(&self.state.audit)
    }

    /// Remove group-scoped data of `video` from group `g`.
    pub(super) fn drop_video_from_group(&mut self, g: &framewise_core::ids::GroupId, video: &VideoId) {
        let Some(gs) = self.state.groups.get_mut(g) else { return };
        let _ = gs.group.remove_video(video);
        let gone: Vec<_> = gs.annotations.values().filter(|a| a.video_id() == video).map(|a| a.id().clone()).collect();
        for id in &gone {
            gs.annotations.remove(id);
            gs.answers.remove(id);
            gs.comments.drop_anchor(&framewise_core::workflow::Anchor::Annotation(id.clone()));
        }
        gs.comments.drop_anchor(&framewise_core::workflow::Anchor::Video(video.clone()));
        self.undo.retain(|(gid, _, v), _| !(gid == g && v == video));
        self.emit(g, Audience::Members, EventBody::VideosChanged);
    }
}
