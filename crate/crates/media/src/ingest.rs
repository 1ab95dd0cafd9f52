use std::fs;
use std::path::Path;

use framewise_core::ids::VideoId;
use serde::{Deserialize, Serialize};

use crate::hls::{master_playlist, media_playlist};
use crate::ladder::{bandwidth_hint, rendition_ladder, scaled_width, Rendition};
use crate::probe::{probe, ProbeResult};
use crate::transcode::Transcoder;
use crate::MediaError;

pub const MASTER_PLAYLIST: &str = "master.m3u8";
pub const MEDIA_PLAYLIST: &str = "index.m3u8";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", content = "reason", rename_all = "snake_case")]
pub enum IngestState {
    Queued,
    Probing,
    Transcoding,
    Ready,
    /// No renditions; the original is streamed as is.
    Passthrough,
    Failed(String),
}

impl IngestState {
    pub fn is_terminal(&self) -> bool {
        matches!(self, IngestState::Ready | IngestState::Passthrough | IngestState::Failed(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestJob {
    pub video_id: VideoId,
    #[serde(flatten)]
    pub state: IngestState,
    pub progress_pct: f64,
}

impl IngestJob {
    pub fn new(video_id: VideoId) -> Self {
        IngestJob { video_id, state: IngestState::Queued, progress_pct: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestOutcome {
    pub probe: ProbeResult,
    pub renditions: Vec<Rendition>,
    /// Relative to the HLS directory; `None` for passthrough.
    pub master_playlist: Option<String>,
}

/// Probe `original` and, when a transcoder is configured and the source is
/// at least 144 pixels high, encode every ladder rung into
/// `hls_dir/<height>p/` and write the playlists. `original` is only read.
/// Every state change is reported to `observe`.
pub fn ingest(
    job: &mut IngestJob,
    original: &Path,
    hls_dir: &Path,
    transcoder: Option<&Transcoder>,
    mut observe: impl FnMut(&IngestJob),
) -> Result<IngestOutcome, MediaError> {
    let mut step = |job: &mut IngestJob, state: IngestState, pct: f64| {
        job.state = state;
        job.progress_pct = pct;
        observe(job);
    };
    step(job, IngestState::Probing, 0.0);
    let result = run(job, original, hls_dir, transcoder, &mut step);
    match &result {
        Ok(out) if out.master_playlist.is_some() => step(job, IngestState::Ready, 100.0),
        Ok(_) => step(job, IngestState::Passthrough, 100.0),
        Err(e) => {
            let pct = job.progress_pct;
            step(job, IngestState::Failed(e.to_string()), pct)
        }
    }
    result
}

fn run(
    job: &mut IngestJob,
    original: &Path,
    hls_dir: &Path,
    transcoder: Option<&Transcoder>,
    step: &mut impl FnMut(&mut IngestJob, IngestState, f64),
) -> Result<IngestOutcome, MediaError> {
    let meta = probe(original)?;
    let ladder = match transcoder {
        Some(_) => rendition_ladder(meta.height),
        None => Vec::new(),
    };
    let Some(transcoder) = transcoder.filter(|_| !ladder.is_empty()) else {
        return Ok(IngestOutcome { probe: meta, renditions: Vec::new(), master_playlist: None });
    };
    if original.starts_with(hls_dir) {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "original lies inside the output directory").into());
    }

    step(job, IngestState::Transcoding, 0.0);
    let mut renditions = Vec::new();
    for (i, height) in ladder.iter().enumerate() {
        let dir_name = format!("{height}p");
        let outdir = hls_dir.join(&dir_name);
        if outdir.exists() {
            fs::remove_dir_all(&outdir)?;
        }
        fs::create_dir_all(&outdir)?;
        transcoder.run(original, *height, &outdir)?;

        let mut segments: Vec<String> = fs::read_dir(&outdir)?
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().is_ok_and(|t| t.is_file()))
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|n| n != MEDIA_PLAYLIST && !n.starts_with('.'))
            .collect();
        segments.sort();
        if segments.is_empty() {
            return Err(MediaError::TranscoderFailed { code: Some(0), stderr_tail: format!("no segments written for {height}p") });
        }
        fs::write(outdir.join(MEDIA_PLAYLIST), media_playlist(meta.duration_s, &segments))?;
        renditions.push(Rendition {
            height: *height,
            width: scaled_width(meta.width, meta.height, *height),
            bandwidth_hint: bandwidth_hint(*height),
            playlist_path: format!("{dir_name}/{MEDIA_PLAYLIST}"),
            segment_paths: segments.iter().map(|s| format!("{dir_name}/{s}")).collect(),
        });
        step(job, IngestState::Transcoding, 100.0 * (i + 1) as f64 / ladder.len() as f64);
    }
    fs::write(hls_dir.join(MASTER_PLAYLIST), master_playlist(&renditions))?;
    Ok(IngestOutcome { probe: meta, renditions, master_playlist: Some(MASTER_PLAYLIST.into()) })
}
