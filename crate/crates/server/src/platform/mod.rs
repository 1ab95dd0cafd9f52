//! The platform: all state behind one writer. HTTP handlers lock it, call
//! one method and release it; every method checks its actor's rights.

mod access;
mod accounts;
mod activity;
mod admin;
mod annotations;
mod groups;
mod media;

use std::path::PathBuf;
use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use framewise_core::ids::{AnnotationId, GroupId, IdSource, LabelId, UserId};
use framewise_media::Transcoder;
use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use tokio::sync::{broadcast, mpsc};

pub use accounts::{LoginStep, SessionGrant, SignupRequest, UserView};
pub use activity::{Dashboard, VideoActivity};
pub use admin::{SessionView, SettingsPatch};
pub use annotations::{AnnotationPatch, AnswerEntry, NewAnnotation, VideoAnnotations};
pub use groups::{GroupSummary, GroupView, LabelInput, MemberView, NewGroup, VideoEntry};
pub use media::{IngestTask, NewProtocol, NewUpload, VideoView};

use crate::clock::Clock;
use crate::error::ApiError;
use crate::events::{Audience, Event, EventBody, EventHub};
use crate::mail::Mailer;
use crate::state::{AuditEntry, State};
use crate::store::Store;

pub type Result<T, E = ApiError> = std::result::Result<T, E>;

/// Tunables that are not part of the persisted state.
#[derive(Debug, Clone)]
pub struct Policy {
    pub session_ttl: Duration,
    pub token_max: Duration,
    pub code_ttl: Duration,
    pub code_attempts: u32,
    /// Gap after which a heartbeat starts a new activity session.
    pub idle_gap: Duration,
    /// Credit for the first heartbeat of a session.
    pub heartbeat_interval: Duration,
    pub media_dir: PathBuf,
    pub transcoder: Option<Transcoder>,
}

impl Policy {
    pub fn new(media_dir: impl Into<PathBuf>) -> Self {
        Policy {
            session_ttl: Duration::hours(12),
            token_max: Duration::days(30),
            code_ttl: Duration::minutes(10),
            code_attempts: 5,
            idle_gap: Duration::seconds(60),
            heartbeat_interval: Duration::seconds(15),
            media_dir: media_dir.into(),
            transcoder: None,
        }
    }
}

pub struct Platform {
    state: State,
    store: Box<dyn Store>,
    clock: Arc<dyn Clock>,
    mailer: Arc<dyn Mailer>,
    hub: EventHub,
    policy: Policy,
    undo: std::collections::HashMap<(GroupId, UserId, framewise_core::ids::VideoId), framewise_core::annotation::UndoLog>,
    heartbeats: std::collections::HashMap<(UserId, GroupId, framewise_core::ids::VideoId), DateTime<Utc>>,
    ingest_queue: Option<mpsc::UnboundedSender<framewise_core::ids::VideoId>>,
}

impl Platform {
    /// Open on whatever `store` holds (or empty state).
    pub fn open(store: Box<dyn Store>, clock: Arc<dyn Clock>, mailer: Arc<dyn Mailer>, policy: Policy) -> std::io::Result<Self> {
        let state = store.load()?.unwrap_or_default();
        Ok(Platform {
            state,
            store,
            clock,
            mailer,
            hub: EventHub::default(),
            policy,
            undo: Default::default(),
            heartbeats: Default::default(),
            ingest_queue: None,
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    pub fn hub(&mut self) -> &mut EventHub {
        &mut self.hub
    }

    /// Where ingest work is sent. Without a queue, uploads stay Queued.
    pub fn set_ingest_queue(&mut self, tx: mpsc::UnboundedSender<framewise_core::ids::VideoId>) {
        self.ingest_queue = Some(tx);
    }

    fn commit(&mut self) -> Result<()> {
        self.store.save(&self.state).map_err(|e| ApiError::Internal(format!("persisting state: {e}")))
    }

    fn emit(&mut self, group: &GroupId, audience: Audience, body: EventBody) {
        let now = self.clock.now();
        self.hub.emit(group, now, audience, body);
    }

    fn audit(&mut self, actor: &UserId, action: &str, target: impl ToString, before: impl Serialize, after: impl Serialize) {
        let entry = AuditEntry {
            seq: self.state.audit.len() as u64 + 1,
            at: self.clock.now(),
            actor: actor.clone(),
            action: action.to_owned(),
            target: target.to_string(),
            before: serde_json::to_value(before).unwrap_or_default(),
            after: serde_json::to_value(after).unwrap_or_default(),
        };
        self.state.audit.push(entry);
    }

    /// Open an event feed on `group` for `user`: logged events after
    /// `after` that the user may see, plus a receiver for what follows.
    /// Counts the user as present. `None` in the replay slot means the log
    /// no longer reaches back to `after` and the client must resync.
    pub fn open_feed(&mut self, user: &UserId, group: &GroupId, after: u64) -> Result<(Option<Vec<Arc<Event>>>, broadcast::Receiver<Arc<Event>>)> {
        self.state.group_for(user, group)?;
        let rx = self.hub.subscribe(group);
        let logged = self.hub.since(group, after);
        let complete = after == 0 || logged.first().is_none_or(|e| e.seq == after + 1) && after <= self.hub.last_seq(group);
        let replay = complete.then(|| logged.into_iter().filter(|e| after > 0 && self.delivers(e, user)).collect());
        let users = self.hub.join(group, user);
        self.emit(group, Audience::Members, EventBody::PresenceChanged { users });
        Ok((replay, rx))
    }

    /// Undo the presence count of [`Platform::open_feed`].
    pub fn close_feed(&mut self, user: &UserId, group: &GroupId) {
        if !self.state.groups.contains_key(group) {
            return;
        }
        let users = self.hub.leave(group, user);
        self.emit(group, Audience::Members, EventBody::PresenceChanged { users });
    }

    /// Whether `viewer` should receive `event` given the group as it is now.
    pub fn delivers(&self, event: &Event, viewer: &UserId) -> bool {
        let Ok(gs) = self.state.group_for(viewer, &event.group) else { return false };
        match &event.audience {
            Audience::Members => true,
            Audience::Video(v) => self.state.sees_video(viewer, gs, v),
            Audience::Work { author, video } => self.state.sees_video(viewer, gs, video) && self.state.sees_work(viewer, gs, author),
            Audience::UserAndManagers(u) => u == viewer || self.state.manages(viewer, gs),
            Audience::Comment { author, video, work_of } => {
                self.state.sees_work(viewer, gs, author)
                    && video.as_ref().is_none_or(|v| self.state.sees_video(viewer, gs, v))
                    && work_of.as_ref().is_none_or(|w| self.state.sees_work(viewer, gs, w))
            }
        }
    }
}

/// Random identifiers: a short kind prefix plus a UUID.
pub struct RandomIds;

impl RandomIds {
    pub fn make(prefix: &str) -> String {
        format!("{prefix}_{}", uuid::Uuid::new_v4().simple())
    }
}

impl IdSource for RandomIds {
    fn annotation_id(&mut self) -> AnnotationId {
        Self::make("a").into()
    }

    fn label_id(&mut self) -> LabelId {
        Self::make("l").into()
    }
}

/// 32 random bytes, hex encoded.
pub fn secret() -> String {
    hex::encode(rand::rng().random::<[u8; 32]>())
}

pub fn sha256_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}
