use std::collections::BTreeSet;
use std::path::{Component, Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use framewise_core::annotation::{FrameRate, VideoMeta};
use framewise_core::ids::{DocumentId, GroupId, ProtocolId, UserId, VideoId};
use framewise_core::workflow::{is_pdf, Action};
use framewise_media::{IngestJob, IngestOutcome, IngestState, MediaError, ProbeResult, Rendition};
use serde::{Deserialize, Serialize};

use super::{Platform, RandomIds, Result};
use crate::error::ApiError;
use crate::events::{Audience, EventBody};
use crate::state::{Protocol, Role, VideoRecord};

/// Upload parameters; the file itself arrives separately.
#[derive(Debug, Clone, Deserialize)]
pub struct NewUpload {
    pub group: GroupId,
    pub name: String,
    #[serde(default)]
    pub level: u32,
    #[serde(default)]
    pub protocol: Option<ProtocolId>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct NewProtocol {
    pub name: String,
    #[serde(default)]
    pub irb_number: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub archive_deadline: Option<NaiveDate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoView {
    pub id: VideoId,
    pub name: String,
    pub uploader: UserId,
    pub uploaded_at: DateTime<Utc>,
    pub fps: FrameRate,
    pub frame_count: u64,
    pub duration_s: f64,
    pub width: u32,
    pub height: u32,
    pub protocol_id: Option<ProtocolId>,
    pub job: IngestJob,
    pub renditions: Vec<Rendition>,
    pub master_playlist: Option<String>,
    pub groups: BTreeSet<GroupId>,
}

impl From<&VideoRecord> for VideoView {
    fn from(r: &VideoRecord) -> Self {
        VideoView {
            id: r.meta.id.clone(),
            name: r.meta.name.clone(),
            uploader: r.uploader.clone(),
            uploaded_at: r.uploaded_at,
            fps: r.meta.fps,
            frame_count: r.meta.frame_count,
            duration_s: r.meta.duration_s,
            width: r.meta.source_width,
            height: r.meta.source_height,
            protocol_id: r.meta.protocol_id.clone(),
            job: r.job.clone(),
            renditions: r.renditions.clone(),
            master_playlist: r.master_playlist.clone(),
            groups: r.groups.clone(),
        }
    }
}

/// What a worker needs to run one ingest.
#[derive(Debug, Clone)]
pub struct IngestTask {
    pub job: IngestJob,
    pub original: PathBuf,
    pub hls_dir: PathBuf,
    pub transcoder: Option<framewise_media::Transcoder>,
}

/// Only plain relative paths below the video's directory.
fn safe_relative(rel: &str) -> Option<PathBuf> {
    let path = Path::new(rel);
    let plain = path.components().all(|c| matches!(c, Component::Normal(_)));
    (plain && !rel.is_empty()).then(|| path.to_path_buf())
}

impl Platform {
    pub(super) fn video_dir(&self, video: &VideoId) -> PathBuf {
        self.policy.media_dir.join("videos").join(video.as_str())
    }

    /// Where an upload is staged before it is registered.
    pub fn staging_dir(&self) -> PathBuf {
        self.policy.media_dir.join("staging")
    }

    /// Check upload rights before the body is read.
    pub fn check_upload(&self, actor: &UserId, req: &NewUpload) -> Result<()> {
        self.state.require_role(actor, Role::VideoUploader)?;
        let gs = self.group_state(actor, &req.group)?;
        self.state.require(actor, gs, Action::AddVideo)?;
        if let Some(p) = &req.protocol {
            let protocol = self.state.protocols.get(p).ok_or_else(|| ApiError::NotFound(format!("protocol {p}")))?;
            if !protocol.granted_uploaders.contains(actor) {
                return Err(ApiError::ProtocolNotGranted);
            }
        }
        if req.name.trim().is_empty() {
            return Err(ApiError::Invalid("video names must be non-empty".into()));
        }
        Ok(())
    }

    /// Register a probed upload staged at `staged`. The file is moved into
    /// the media store and an ingest job is queued.
    pub fn register_upload(&mut self, actor: &UserId, req: NewUpload, staged: &Path, probe: ProbeResult) -> Result<VideoView> {
        self.check_upload(actor, &req)?;
        let id = VideoId::from(RandomIds::make("v"));
        let dir = self.video_dir(&id);
        std::fs::create_dir_all(&dir)?;
        let ext = Path::new(&req.name).extension().and_then(|e| e.to_str()).filter(|e| e.chars().all(|c| c.is_ascii_alphanumeric())).unwrap_or("mp4");
        let original = format!("original.{}", ext.to_ascii_lowercase());
        std::fs::rename(staged, dir.join(&original))?;

        let mut meta = VideoMeta::new(id.clone(), req.name.trim(), probe.fps, probe.frame_count);
        meta.duration_s = probe.duration_s;
        meta.source_width = probe.width;
        meta.source_height = probe.height;
        meta.protocol_id = req.protocol.clone();
        meta.level = req.level;
        let record = VideoRecord {
            meta,
            uploader: actor.clone(),
            uploaded_at: self.now(),
            original,
            job: IngestJob::new(id.clone()),
            renditions: Vec::new(),
            master_playlist: None,
            groups: BTreeSet::from([req.group.clone()]),
        };
        let view = VideoView::from(&record);
        self.state.videos.insert(id.clone(), record);
        self.group_mut(&req.group).group.add_video(id.clone(), req.level)?;
        self.emit(&req.group, Audience::Members, EventBody::VideosChanged);
        self.commit()?;
        if let Some(tx) = &self.ingest_queue {
            let _ = tx.send(id);
        }
        Ok(view)
    }

    /// A video the actor can open in at least one group, or uploaded.
    pub fn video_view(&self, actor: &UserId, video: &VideoId) -> Result<VideoView> {
        let rec = self.readable_video(actor, video)?;
        let mut view = VideoView::from(rec);
        if !self.state.is_admin(actor) {
            view.groups.retain(|g| self.state.groups.get(g).is_some_and(|gs| gs.group.is_member(actor)));
        }
        Ok(view)
    }

    fn readable_video(&self, actor: &UserId, video: &VideoId) -> Result<&VideoRecord> {
        let rec = self.state.videos.get(video).ok_or_else(|| ApiError::NotFound(format!("video {video}")))?;
        let sees = rec.uploader == *actor
            || self.state.is_admin(actor)
            || rec.groups.iter().filter_map(|g| self.state.groups.get(g)).any(|gs| self.state.sees_video(actor, gs, video));
        if sees {
            Ok(rec)
        } else {
            Err(ApiError::NotFound(format!("video {video}")))
        }
    }

    /// Share an uploaded video into another group; one stored copy serves all.
    pub fn share_video(&mut self, actor: &UserId, video: &VideoId, group: &GroupId, level: u32) -> Result<VideoView> {
        let rec = self.state.videos.get(video).ok_or_else(|| ApiError::NotFound(format!("video {video}")))?;
        if rec.uploader != *actor {
            return Err(ApiError::PermissionDenied);
        }
        let gs = self.group_state(actor, group)?;
        self.state.require(actor, gs, Action::AddVideo)?;
        self.group_mut(group).group.add_video(video.clone(), level)?;
        self.state.videos.get_mut(video).expect("checked").groups.insert(group.clone());
        self.emit(group, Audience::Members, EventBody::VideosChanged);
        self.commit()?;
        self.video_view(actor, video)
    }

    /// File backing `rel` ("original" or a path inside the HLS tree) if the
    /// actor may watch the video.
    pub fn media_file(&self, actor: &UserId, video: &VideoId, rel: &str) -> Result<PathBuf> {
        let rec = self.readable_video(actor, video)?;
        let dir = self.video_dir(video);
        if rel == "original" {
            return Ok(dir.join(&rec.original));
        }
        let rel = safe_relative(rel).ok_or_else(|| ApiError::NotFound(format!("media {rel}")))?;
        Ok(dir.join("hls").join(rel))
    }

    /// Hand the next ingest to a worker, marking it started.
    pub fn begin_ingest(&mut self, video: &VideoId) -> Option<IngestTask> {
        let dir = self.video_dir(video);
        let transcoder = self.policy.transcoder.clone();
        let rec = self.state.videos.get(video)?;
        if rec.job.state != IngestState::Queued {
            return None;
        }
        Some(IngestTask { job: rec.job.clone(), original: dir.join(&rec.original), hls_dir: dir.join("hls"), transcoder })
    }

    /// Progress report from a worker.
    pub fn ingest_progress(&mut self, job: &IngestJob) {
        let Some(rec) = self.state.videos.get_mut(&job.video_id) else { return };
        rec.job = job.clone();
        let groups: Vec<GroupId> = rec.groups.iter().cloned().collect();
        for g in groups {
            self.emit(&g, Audience::Video(job.video_id.clone()), EventBody::IngestProgress { job: job.clone() });
        }
    }

    pub fn finish_ingest(&mut self, job: &IngestJob, outcome: std::result::Result<IngestOutcome, MediaError>) {
        self.ingest_progress(job);
        if let (Ok(out), Some(rec)) = (outcome, self.state.videos.get_mut(&job.video_id)) {
            rec.renditions = out.renditions;
            rec.master_playlist = out.master_playlist;
        }
        if let Err(e) = self.commit() {
            tracing::error!("saving ingest result: {e}");
        }
    }

    /// Jobs left Queued or half-done by a previous run.
    pub fn pending_ingests(&mut self) -> Vec<VideoId> {
        let mut pending = Vec::new();
        for rec in self.state.videos.values_mut() {
            if !rec.job.state.is_terminal() {
                rec.job = IngestJob::new(rec.meta.id.clone());
                pending.push(rec.meta.id.clone());
            }
        }
        pending
    }

    pub fn create_protocol(&mut self, actor: &UserId, req: NewProtocol) -> Result<Protocol> {
        self.state.require_role(actor, Role::ProtocolManager)?;
        if req.name.trim().is_empty() {
            return Err(ApiError::Invalid("protocol names must be non-empty".into()));
        }
        let p = Protocol {
            id: RandomIds::make("p").into(),
            name: req.name.trim().to_owned(),
            irb_number: req.irb_number,
            description: req.description,
            archive_deadline: req.archive_deadline,
            granted_uploaders: BTreeSet::new(),
            document: None,
        };
        self.state.protocols.insert(p.id.clone(), p.clone());
        self.commit()?;
        Ok(p)
    }

    /// Protocol managers see every protocol; others those granted to them.
    pub fn protocols(&self, actor: &UserId) -> Result<Vec<Protocol>> {
        let manager = self.state.require_role(actor, Role::ProtocolManager).is_ok();
        Ok(self.state.protocols.values().filter(|p| manager || p.granted_uploaders.contains(actor)).cloned().collect())
    }

    pub fn protocol(&self, actor: &UserId, id: &ProtocolId) -> Result<Protocol> {
        self.protocols(actor)?.into_iter().find(|p| &p.id == id).ok_or_else(|| ApiError::NotFound(format!("protocol {id}")))
    }

    fn protocol_mut(&mut self, actor: &UserId, id: &ProtocolId) -> Result<&mut Protocol> {
        self.state.require_role(actor, Role::ProtocolManager)?;
        self.state.protocols.get_mut(id).ok_or_else(|| ApiError::NotFound(format!("protocol {id}")))
    }

    pub fn update_protocol(&mut self, actor: &UserId, id: &ProtocolId, req: NewProtocol) -> Result<Protocol> {
        let p = self.protocol_mut(actor, id)?;
        p.name = req.name.trim().to_owned();
        p.irb_number = req.irb_number;
        p.description = req.description;
        p.archive_deadline = req.archive_deadline;
        let p = p.clone();
        self.commit()?;
        Ok(p)
    }

    pub fn grant_protocol(&mut self, actor: &UserId, id: &ProtocolId, uploader: &UserId, granted: bool) -> Result<Protocol> {
        self.state.user(uploader)?;
        let p = self.protocol_mut(actor, id)?;
        if granted {
            p.granted_uploaders.insert(uploader.clone());
        } else {
            p.granted_uploaders.remove(uploader);
        }
        let p = p.clone();
        self.commit()?;
        Ok(p)
    }

    pub fn set_protocol_document(&mut self, actor: &UserId, id: &ProtocolId, bytes: &[u8]) -> Result<Protocol> {
        self.protocol_mut(actor, id)?;
        if !is_pdf(bytes) {
            return Err(ApiError::Invalid("documents must be PDF files".into()));
        }
        let doc = DocumentId::from(RandomIds::make("d"));
        let path = self.document_path(&doc);
        std::fs::create_dir_all(path.parent().expect("has parent"))?;
        std::fs::write(&path, bytes)?;
        let p = self.protocol_mut(actor, id)?;
        let old = p.document.replace(doc);
        let p = p.clone();
        if let Some(old) = old {
            let _ = std::fs::remove_file(self.document_path(&old));
        }
        self.commit()?;
        Ok(p)
    }

    pub fn protocol_document(&self, actor: &UserId, id: &ProtocolId) -> Result<PathBuf> {
        let p = self.protocol(actor, id)?;
        let doc = p.document.ok_or_else(|| ApiError::NotFound("protocol document".into()))?;
        Ok(self.document_path(&doc))
    }
}
