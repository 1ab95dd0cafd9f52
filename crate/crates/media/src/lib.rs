//! Media ingestion: probe an upload, pick a rendition ladder, run the
//! external transcoder and write HLS manifests next to the untouched original.

pub mod fixture;
pub mod hls;
pub mod ingest;
pub mod ladder;
pub mod probe;
pub mod transcode;

use thiserror::Error;

pub use ingest::{ingest, IngestJob, IngestOutcome, IngestState};
pub use ladder::{bandwidth_hint, rendition_ladder, Rendition, CANONICAL_HEIGHTS};
pub use probe::{probe, probe_bytes, ProbeResult};
pub use transcode::Transcoder;

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("unreadable container: {0}")]
    UnreadableContainer(String),
    #[error("variable frame rate detected ({detail}); re-encode to a constant frame rate, e.g. `ffmpeg -i in.mp4 -fps_mode cfr -r 25 out.mp4`")]
    VariableFrameRate { detail: String },
    #[error("transcoder failed ({}): {stderr_tail}", .code.map_or("no exit code".to_owned(), |c| format!("exit code {c}")))]
    TranscoderFailed { code: Option<i32>, stderr_tail: String },
    #[error("bad transcoder command: {0}")]
    BadCommand(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
