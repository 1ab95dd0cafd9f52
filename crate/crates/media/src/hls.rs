//! HLS playlist text.

use std::fmt::Write;

use crate::ladder::Rendition;

/// Nominal segment length in seconds.
pub const SEGMENT_SECONDS: f64 = 4.0;

/// Segments needed to cover `duration_s`.
pub fn segment_count(duration_s: f64) -> usize {
    ((duration_s / SEGMENT_SECONDS) - 1e-9).ceil().max(1.0) as usize
}

/// Per-segment durations for `n` segments covering `duration_s`: full
/// 4-second segments and a shorter tail when `n` matches
/// [`segment_count`], otherwise an even split.
pub fn segment_durations(duration_s: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if n == segment_count(duration_s) {
        let mut d = vec![SEGMENT_SECONDS; n];
        d[n - 1] = duration_s - SEGMENT_SECONDS * (n - 1) as f64;
        d
    } else {
        vec![duration_s / n as f64; n]
    }
}

/// VOD media playlist over `segments` (URIs relative to the playlist).
pub fn media_playlist(duration_s: f64, segments: &[String]) -> String {
    let durations = segment_durations(duration_s, segments.len());
    let target = durations.iter().copied().fold(SEGMENT_SECONDS, f64::max).ceil() as u64;
    let mut out = String::new();
    let _ = writeln!(out, "#EXTM3U\n#EXT-X-VERSION:3\n#EXT-X-TARGETDURATION:{target}\n#EXT-X-MEDIA-SEQUENCE:0\n#EXT-X-PLAYLIST-TYPE:VOD");
    for (seg, d) in segments.iter().zip(durations) {
        let _ = writeln!(out, "#EXTINF:{d:.3},\n{seg}");
    }
    out.push_str("#EXT-X-ENDLIST\n");
    out
}

/// Master playlist listing renditions from the highest down.
pub fn master_playlist(renditions: &[Rendition]) -> String {
    let mut sorted: Vec<&Rendition> = renditions.iter().collect();
    sorted.sort_by(|a, b| b.height.cmp(&a.height));
    let mut out = String::from("#EXTM3U\n#EXT-X-VERSION:3\n");
    for r in sorted {
        let _ = writeln!(out, "#EXT-X-STREAM-INF:BANDWIDTH={},RESOLUTION={}x{}\n{}", r.bandwidth_hint, r.width, r.height, r.playlist_path);
    }
    out
}
