//! Everything the platform persists.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, NaiveDate, Utc};
use framewise_core::annotation::{Annotation, VideoMeta};
use framewise_core::forms::AnswerBook;
use framewise_core::ids::{AnnotationId, DocumentId, GroupId, ProtocolId, UserId, VideoId};
use framewise_core::workflow::{CommentBoard, Group};
use framewise_media::{IngestJob, Rendition};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountState {
    Pending,
    Active,
    Disabled,
    Archived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Administrator,
    GroupCreator,
    VideoUploader,
    ProtocolManager,
    ScriptUser,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserAccount {
    pub id: UserId,
    pub email: String,
    pub password_hash: String,
    pub state: AccountState,
    pub roles: BTreeSet<Role>,
    #[serde(default)]
    pub institution: String,
    #[serde(default)]
    pub project: String,
    #[serde(default)]
    pub contact: String,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub private_group: Option<GroupId>,
    /// Version of the terms of use last accepted, and when.
    #[serde(default)]
    pub terms_accepted: Option<(u32, DateTime<Utc>)>,
}

impl UserAccount {
    pub fn has(&self, role: Role) -> bool {
        self.roles.contains(&role) || self.roles.contains(&Role::Administrator)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CredentialKind {
    Session,
    ApiToken,
}

/// A bearer credential, stored under the SHA-256 of its secret.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub user: UserId,
    pub kind: CredentialKind,
    pub created_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Challenge {
    pub user: UserId,
    pub code_hash: String,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
    pub consumed: bool,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub id: ProtocolId,
    pub name: String,
    #[serde(default)]
    pub irb_number: String,
    #[serde(default)]
    pub description: String,
    pub archive_deadline: Option<NaiveDate>,
    #[serde(default)]
    pub granted_uploaders: BTreeSet<UserId>,
    #[serde(default)]
    pub document: Option<DocumentId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub meta: VideoMeta,
    pub uploader: UserId,
    pub uploaded_at: DateTime<Utc>,
    /// File name of the untouched upload inside the video's media directory.
    pub original: String,
    pub job: IngestJob,
    #[serde(default)]
    pub renditions: Vec<Rendition>,
    #[serde(default)]
    pub master_playlist: Option<String>,
    #[serde(default)]
    pub groups: BTreeSet<GroupId>,
}

/// One group with the data scoped to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupState {
    pub group: Group,
    #[serde(default)]
    pub annotations: BTreeMap<AnnotationId, Annotation>,
    #[serde(default)]
    pub answers: AnswerBook,
    #[serde(default)]
    pub comments: CommentBoard,
    pub created_at: DateTime<Utc>,
}

impl GroupState {
    pub fn new(group: Group, at: DateTime<Utc>) -> Self {
        GroupState { group, annotations: BTreeMap::new(), answers: AnswerBook::new(), comments: CommentBoard::new(), created_at: at }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub two_factor: bool,
    #[serde(default)]
    pub features: BTreeMap<String, bool>,
    #[serde(default)]
    pub terms_text: String,
    #[serde(default)]
    pub terms_version: u32,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { two_factor: true, features: BTreeMap::new(), terms_text: String::new(), terms_version: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub actor: UserId,
    pub action: String,
    pub target: String,
    pub before: Value,
    pub after: Value,
}

/// Seconds of activity of one user on one video of one group on one day.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActivityKey {
    pub user: UserId,
    pub group: GroupId,
    pub video: VideoId,
    pub day: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivitySample {
    #[serde(flatten)]
    pub key: ActivityKey,
    pub seconds_active: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    #[serde(default)]
    pub users: BTreeMap<UserId, UserAccount>,
    /// Keyed by the hex SHA-256 of the bearer secret.
    #[serde(default)]
    pub sessions: BTreeMap<String, Session>,
    #[serde(default)]
    pub challenges: BTreeMap<String, Challenge>,
    #[serde(default)]
    pub groups: BTreeMap<GroupId, GroupState>,
    #[serde(default)]
    pub videos: BTreeMap<VideoId, VideoRecord>,
    #[serde(default)]
    pub protocols: BTreeMap<ProtocolId, Protocol>,
    #[serde(default)]
    pub settings: Settings,
    #[serde(default)]
    pub audit: Vec<AuditEntry>,
    #[serde(default, with = "activity_list")]
    pub activity: BTreeMap<ActivityKey, i64>,
}

/// Activity is stored as a list of samples; JSON object keys must be strings.
mod activity_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<ActivityKey, i64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(map.iter().map(|(k, v)| ActivitySample { key: k.clone(), seconds_active: *v }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<ActivityKey, i64>, D::Error> {
        let samples = Vec::<ActivitySample>::deserialize(d)?;
        Ok(samples.into_iter().map(|s| (s.key, s.seconds_active)).collect())
    }
}
