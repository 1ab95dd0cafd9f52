use std::path::{Path, PathBuf};
use std::time::Duration;

use framewise_core::annotation::FrameRate;
use framewise_media::fixture::Mp4Spec;
use framewise_media::{ingest, IngestJob, IngestState, MediaError, Transcoder};

/// Copies the input into three segments per rendition.
const STUB: &str = r#"sh -c 'for i in 0 1 2; do cp "$1" "$2/seg_$i.ts"; done' stub {input} {outdir}"#;

struct Fixture {
    _dir: tempfile::TempDir,
    original: PathBuf,
    hls: PathBuf,
    bytes: Vec<u8>,
}

fn fixture(height: u32) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let original = dir.path().join("original.mp4");
    let bytes = Mp4Spec::cfr(FrameRate::integer(25).unwrap(), 250, height * 16 / 9, height).write();
    std::fs::write(&original, &bytes).unwrap();
    let hls = dir.path().join("hls");
    Fixture { original, hls, bytes, _dir: dir }
}

fn run(f: &Fixture, t: Option<&Transcoder>) -> (Result<framewise_media::IngestOutcome, MediaError>, Vec<IngestState>, IngestJob) {
    let mut job = IngestJob::new("v".into());
    let mut seen = Vec::new();
    let out = ingest(&mut job, &f.original, &f.hls, t, |j| seen.push(j.state.clone()));
    (out, seen, job)
}

fn stub() -> Transcoder {
    Transcoder::new(STUB, Duration::from_secs(10)).unwrap()
}

/// `(bandwidth, width, height, uri)` of each variant, read back from text.
fn variants(master: &str) -> Vec<(u64, u32, u32, String)> {
    let lines: Vec<&str> = master.lines().collect();
    lines
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.strip_prefix("#EXT-X-STREAM-INF:").map(|attrs| (attrs, lines[i + 1])))
        .map(|(attrs, uri)| {
            let get = |k: &str| attrs.split(',').find_map(|kv| kv.strip_prefix(k)).unwrap().to_owned();
            let (w, h) = get("RESOLUTION=").split_once('x').map(|(w, h)| (w.parse().unwrap(), h.parse().unwrap())).unwrap();
            (get("BANDWIDTH=").parse().unwrap(), w, h, uri.to_owned())
        })
        .collect()
}

fn extinf(playlist: &str) -> Vec<f64> {
    playlist.lines().filter_map(|l| l.strip_prefix("#EXTINF:")).map(|d| d.trim_end_matches(',').parse().unwrap()).collect()
}

#[test]
fn full_ladder_from_1080p() {
    let f = fixture(1080);
    let (out, seen, job) = run(&f, Some(&stub()));
    let out = out.unwrap();
    assert_eq!(job.state, IngestState::Ready);
    assert_eq!(job.progress_pct, 100.0);
    assert_eq!(seen.first(), Some(&IngestState::Probing));
    assert_eq!(seen.iter().filter(|s| **s == IngestState::Transcoding).count(), 7);

    let master = std::fs::read_to_string(f.hls.join(out.master_playlist.unwrap())).unwrap();
    let vs = variants(&master);
    assert_eq!(vs.len(), 6);
    assert_eq!(vs.iter().map(|v| v.2).collect::<Vec<_>>(), [1080, 720, 480, 360, 240, 144]);
    assert!(vs.windows(2).all(|w| w[0].0 > w[1].0));
    assert_eq!((vs[0].1, vs[0].2), (1920, 1080));
    for (_, _, _, uri) in &vs {
        let playlist = std::fs::read_to_string(f.hls.join(uri)).unwrap();
        assert_eq!(extinf(&playlist), [4.0, 4.0, 2.0], "segments cover all 10 s");
        let dir = Path::new(uri).parent().unwrap();
        for seg in playlist.lines().filter(|l| !l.starts_with('#')) {
            assert!(f.hls.join(dir).join(seg).is_file());
        }
    }
    assert_eq!(out.renditions.len(), 6);
    assert_eq!(std::fs::read(&f.original).unwrap(), f.bytes, "original untouched");
}

#[test]
fn tiny_sources_pass_through_without_invoking_the_transcoder() {
    let f = fixture(120);
    let marker = f.hls.parent().unwrap().join("ran");
    let t = Transcoder::new(format!("touch {}", marker.display()), Duration::from_secs(5)).unwrap();
    let (out, _, job) = run(&f, Some(&t));
    assert_eq!(job.state, IngestState::Passthrough);
    assert!(out.unwrap().master_playlist.is_none());
    assert!(!marker.exists());
    assert_eq!(std::fs::read(&f.original).unwrap(), f.bytes);
}

#[test]
fn no_transcoder_means_passthrough() {
    let f = fixture(1080);
    let (out, _, job) = run(&f, None);
    assert_eq!(job.state, IngestState::Passthrough);
    assert!(out.unwrap().renditions.is_empty());
}

#[test]
fn failing_transcoder_is_reported() {
    let f = fixture(480);
    let t = Transcoder::new("sh -c 'echo codec exploded >&2; exit 3'", Duration::from_secs(5)).unwrap();
    let (out, _, job) = run(&f, Some(&t));
    match out.unwrap_err() {
        MediaError::TranscoderFailed { code, stderr_tail } => {
            assert_eq!(code, Some(3));
            assert_eq!(stderr_tail, "codec exploded");
        }
        e => panic!("{e:?}"),
    }
    let IngestState::Failed(reason) = job.state else { panic!("{:?}", job.state) };
    assert!(reason.contains("codec exploded"));
    assert_eq!(std::fs::read(&f.original).unwrap(), f.bytes);
}

#[test]
fn slow_transcoder_times_out() {
    let f = fixture(240);
    let t = Transcoder::new("sleep 5", Duration::from_millis(200)).unwrap();
    let started = std::time::Instant::now();
    let (out, _, job) = run(&f, Some(&t));
    assert!(started.elapsed() < Duration::from_secs(4));
    assert!(matches!(out, Err(MediaError::TranscoderFailed { code: None, .. })));
    assert!(matches!(job.state, IngestState::Failed(_)));
}

#[test]
fn silent_transcoder_fails() {
    let f = fixture(240);
    let (out, _, _) = run(&f, Some(&Transcoder::new("true", Duration::from_secs(5)).unwrap()));
    assert!(matches!(out, Err(MediaError::TranscoderFailed { .. })));
}

#[test]
fn unreadable_upload_fails_at_probe() {
    let f = fixture(240);
    std::fs::write(&f.original, b"not a video").unwrap();
    let (out, seen, job) = run(&f, Some(&stub()));
    assert!(matches!(out, Err(MediaError::UnreadableContainer(_))));
    assert_eq!(seen.len(), 2);
    assert!(matches!(job.state, IngestState::Failed(_)));
}

#[test]
fn job_json_shape() {
    let mut job = IngestJob::new("v1".into());
    job.state = IngestState::Failed("boom".into());
    assert_eq!(
        serde_json::to_string(&job).unwrap(),
        r#"{"video_id":"v1","state":"failed","reason":"boom","progress_pct":0.0}"#
    );
    job.state = IngestState::Ready;
    assert_eq!(serde_json::to_string(&job).unwrap(), r#"{"video_id":"v1","state":"ready","progress_pct":0.0}"#);
}
