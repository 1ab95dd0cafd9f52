use serde::{Deserialize, Serialize};

/// Heights offered for adaptive streaming, largest first.
pub const CANONICAL_HEIGHTS: [u32; 7] = [2160, 1080, 720, 480, 360, 240, 144];

/// Heights to encode for a source of `source_height` pixels. Empty below
/// 144p: such files are streamed as uploaded.
pub fn rendition_ladder(source_height: u32) -> Vec<u32> {
    CANONICAL_HEIGHTS.iter().copied().filter(|h| *h <= source_height).collect()
}

/// Advisory peak bitrate in bits/s for a rendition height.
pub fn bandwidth_hint(height: u32) -> u64 {
    match height {
        h if h >= 2160 => 12_000_000,
        h if h >= 1080 => 5_000_000,
        h if h >= 720 => 2_800_000,
        h if h >= 480 => 1_400_000,
        h if h >= 360 => 800_000,
        h if h >= 240 => 400_000,
        _ => 200_000,
    }
}

/// Width matching `height` at the source aspect ratio, rounded to even.
pub fn scaled_width(source_width: u32, source_height: u32, height: u32) -> u32 {
    if source_height == 0 {
        return 0;
    }
    let w = (u64::from(source_width) * u64::from(height) + u64::from(source_height) / 2) / u64::from(source_height);
    let w = w as u32;
    w + (w & 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rendition {
    pub height: u32,
    pub width: u32,
    pub bandwidth_hint: u64,
    /// Relative to the video's HLS directory.
    pub playlist_path: String,
    pub segment_paths: Vec<String>,
}
