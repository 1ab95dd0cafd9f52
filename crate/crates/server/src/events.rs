//! Per-group ordered event log with audience-filtered fan-out.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use framewise_core::annotation::Annotation;
use framewise_core::evaluation::ScoreReport;
use framewise_core::forms::{AnswerSet, Owner};
use framewise_core::ids::{AnnotationId, GroupId, ThreadId, UserId, VideoId};
use framewise_core::workflow::{Anchor, Comment, VideoStatus};
use framewise_media::IngestJob;
use serde::Serialize;
use tokio::sync::broadcast;

/// Events kept per group for reconnecting clients.
pub const HISTORY: usize = 1024;
const CHANNEL: usize = 256;

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventBody {
    AnnotationCreated { annotation: Annotation },
    AnnotationUpdated { annotation: Annotation },
    AnnotationDeleted { id: AnnotationId, video: VideoId, version: u64 },
    AnswersChanged { annotation: AnnotationId, video: VideoId, owner: Owner, answers: Option<AnswerSet> },
    StatusChanged { video: VideoId, status: VideoStatus },
    CommentPosted { thread: ThreadId, anchor: Anchor, comment: Comment },
    ThreadResolved { thread: ThreadId, anchor: Anchor },
    PresenceChanged { users: Vec<UserId> },
    ScoreReport { report: ScoreReport },
    LevelChanged { user: UserId, level: u32 },
    IngestProgress { job: IngestJob },
    VideosChanged,
    MembersChanged,
    OntologyChanged,
}

impl EventBody {
    pub fn name(&self) -> &'static str {
        match self {
            EventBody::AnnotationCreated { .. } => "annotation_created",
            EventBody::AnnotationUpdated { .. } => "annotation_updated",
            EventBody::AnnotationDeleted { .. } => "annotation_deleted",
            EventBody::AnswersChanged { .. } => "answers_changed",
            EventBody::StatusChanged { .. } => "status_changed",
            EventBody::CommentPosted { .. } => "comment_posted",
            EventBody::ThreadResolved { .. } => "thread_resolved",
            EventBody::PresenceChanged { .. } => "presence_changed",
            EventBody::ScoreReport { .. } => "score_report",
            EventBody::LevelChanged { .. } => "level_changed",
            EventBody::IngestProgress { .. } => "ingest_progress",
            EventBody::VideosChanged => "videos_changed",
            EventBody::MembersChanged => "members_changed",
            EventBody::OntologyChanged => "ontology_changed",
        }
    }
}

/// Who may receive an event, checked against the group at delivery time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Audience {
    Members,
    /// Members who can open the video.
    Video(VideoId),
    /// Members who can open the video and see `author`'s work.
    Work { author: UserId, video: VideoId },
    /// One member plus the group's managers.
    UserAndManagers(UserId),
    /// A comment by `author`, optionally on a video and on work by `work_of`.
    Comment { author: UserId, video: Option<VideoId>, work_of: Option<UserId> },
}

#[derive(Debug, Clone, Serialize)]
pub struct Event {
    pub seq: u64,
    pub group: GroupId,
    pub at: DateTime<Utc>,
    #[serde(flatten)]
    pub body: EventBody,
    #[serde(skip)]
    pub audience: Audience,
}

struct Channel {
    tx: broadcast::Sender<Arc<Event>>,
    seq: u64,
    history: VecDeque<Arc<Event>>,
    present: BTreeMap<UserId, usize>,
}

impl Channel {
    fn new() -> Self {
        Channel { tx: broadcast::channel(CHANNEL).0, seq: 0, history: VecDeque::new(), present: BTreeMap::new() }
    }
}

#[derive(Default)]
pub struct EventHub {
    channels: HashMap<GroupId, Channel>,
}

impl EventHub {
    fn channel(&mut self, group: &GroupId) -> &mut Channel {
        self.channels.entry(group.clone()).or_insert_with(Channel::new)
    }

    /// Append to the group's log and fan out. Called with the platform lock
    /// held, so sequence numbers follow the writer's order.
    pub fn emit(&mut self, group: &GroupId, at: DateTime<Utc>, audience: Audience, body: EventBody) -> Arc<Event> {
        let ch = self.channel(group);
        ch.seq += 1;
        let event = Arc::new(Event { seq: ch.seq, group: group.clone(), at, body, audience });
        if ch.history.len() == HISTORY {
            ch.history.pop_front();
        }
        ch.history.push_back(event.clone());
        let _ = ch.tx.send(event.clone());
        event
    }

    pub fn subscribe(&mut self, group: &GroupId) -> broadcast::Receiver<Arc<Event>> {
        self.channel(group).tx.subscribe()
    }

    /// Logged events after `seq`, oldest first.
    pub fn since(&self, group: &GroupId, seq: u64) -> Vec<Arc<Event>> {
        self.channels.get(group).map_or_else(Vec::new, |ch| ch.history.iter().filter(|e| e.seq > seq).cloned().collect())
    }

    pub fn last_seq(&self, group: &GroupId) -> u64 {
        self.channels.get(group).map_or(0, |ch| ch.seq)
    }

    /// Count a connection; returns the users present after the change.
    pub fn join(&mut self, group: &GroupId, user: &UserId) -> Vec<UserId> {
        let ch = self.channel(group);
        *ch.present.entry(user.clone()).or_default() += 1;
        ch.present.keys().cloned().collect()
    }

    pub fn leave(&mut self, group: &GroupId, user: &UserId) -> Vec<UserId> {
        let ch = self.channel(group);
        if let Some(n) = ch.present.get_mut(user) {
            *n -= 1;
            if *n == 0 {
                ch.present.remove(user);
            }
        }
        ch.present.keys().cloned().collect()
    }

    pub fn present(&self, group: &GroupId) -> Vec<UserId> {
        self.channels.get(group).map_or_else(Vec::new, |ch| ch.present.keys().cloned().collect())
    }

    pub fn drop_group(&mut self, group: &GroupId) {
        self.channels.remove(group);
    }
}
