//! Minimal ISO-BMFF reader: finds the first video track and reads its
//! timescale, sample durations and display size. Fragmented files (samples
//! only in `moof`) are not supported.

use std::path::Path;

use framewise_core::annotation::FrameRate;
use serde::{Deserialize, Serialize};

use crate::MediaError;

/// Relative deviation of a sample duration from the mean that makes a
/// track variable-frame-rate.
pub const VFR_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub fps: FrameRate,
    pub frame_count: u64,
    pub duration_s: f64,
    pub width: u32,
    pub height: u32,
}

pub fn probe(path: &Path) -> Result<ProbeResult, MediaError> {
    probe_bytes(&std::fs::read(path)?)
}

fn unreadable(msg: impl Into<String>) -> MediaError {
    MediaError::UnreadableContainer(msg.into())
}

struct Atom<'a> {
    kind: [u8; 4],
    body: &'a [u8],
}

fn boxes(mut data: &[u8]) -> impl Iterator<Item = Result<Atom<'_>, MediaError>> {
    std::iter::from_fn(move || {
        if data.is_empty() {
            return None;
        }
        let parsed = (|| {
            if data.len() < 8 {
                return Err(unreadable("truncated box header"));
            }
            let size32 = be32(data, 0)?;
            let kind = [data[4], data[5], data[6], data[7]];
            let (header, size) = match size32 {
                0 => (8, data.len() as u64),
                1 => (16, be64(data, 8)?),
                n => (8, u64::from(n)),
            };
            if size < header as u64 || size > data.len() as u64 {
                return Err(unreadable(format!("box `{}` overruns its parent", String::from_utf8_lossy(&kind))));
            }
            let size = size as usize;
            let b = Atom { kind, body: &data[header..size] };
            data = &data[size..];
            Ok(b)
        })();
        if parsed.is_err() {
            data = &[];
        }
        Some(parsed)
    })
}

fn child<'a>(parent: &'a [u8], kind: &[u8; 4]) -> Result<Option<&'a [u8]>, MediaError> {
    for b in boxes(parent) {
        let b = b?;
        if &b.kind == kind {
            return Ok(Some(b.body));
        }
    }
    Ok(None)
}

fn path<'a>(mut data: &'a [u8], kinds: &[&[u8; 4]]) -> Result<&'a [u8], MediaError> {
    for k in kinds {
        data = child(data, k)?.ok_or_else(|| unreadable(format!("missing `{}` box", String::from_utf8_lossy(*k))))?;
    }
    Ok(data)
}

fn be32(d: &[u8], at: usize) -> Result<u32, MediaError> {
    d.get(at..at + 4).map(|b| u32::from_be_bytes(b.try_into().unwrap())).ok_or_else(|| unreadable("truncated box"))
}

fn be64(d: &[u8], at: usize) -> Result<u64, MediaError> {
    d.get(at..at + 8).map(|b| u64::from_be_bytes(b.try_into().unwrap())).ok_or_else(|| unreadable("truncated box"))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn probe_bytes(data: &[u8]) -> Result<ProbeResult, MediaError> {
    let moov = path(data, &[b"moov"])?;
    for trak in boxes(moov) {
        let trak = trak?;
        if &trak.kind != b"trak" {
            continue;
        }
        let hdlr = path(trak.body, &[b"mdia", b"hdlr"])?;
        if hdlr.get(8..12) != Some(b"vide") {
            continue;
        }
        return video_track(trak.body);
    }
    Err(unreadable("no video track"))
}

fn video_track(trak: &[u8]) -> Result<ProbeResult, MediaError> {
    let tkhd = path(trak, &[b"tkhd"])?;
    let size_at = if tkhd.first() == Some(&1) { 88 } else { 76 };
    let width = be32(tkhd, size_at)? >> 16;
    let height = be32(tkhd, size_at + 4)? >> 16;

    let mdhd = path(trak, &[b"mdia", b"mdhd"])?;
    let timescale = be32(mdhd, if mdhd.first() == Some(&1) { 20 } else { 12 })?;
    if timescale == 0 {
        return Err(unreadable("zero timescale"));
    }

    let stts = path(trak, &[b"mdia", b"minf", b"stbl", b"stts"])?;
    let n = be32(stts, 4)? as usize;
    let mut runs = Vec::with_capacity(n.min(1 << 16));
    for i in 0..n {
        let (count, delta) = (be32(stts, 8 + 8 * i)?, be32(stts, 12 + 8 * i)?);
        if count > 0 {
            runs.push((u64::from(count), u64::from(delta)));
        }
    }
    let frame_count: u64 = runs.iter().map(|r| r.0).sum();
    let ticks: u64 = runs.iter().map(|r| r.0 * r.1).sum();
    if frame_count == 0 || ticks == 0 {
        return Err(unreadable("video track has zero duration"));
    }
    let mean = ticks as f64 / frame_count as f64;
    if let Some((_, d)) = runs.iter().find(|(_, d)| (*d as f64 - mean).abs() / mean > VFR_TOLERANCE) {
        return Err(MediaError::VariableFrameRate {
            detail: format!("sample duration {d} vs mean {mean:.3} ticks at timescale {timescale}"),
        });
    }
    let delta = runs[0].1;
    let g = gcd(u64::from(timescale), delta);
    let (num, den) = (u64::from(timescale) / g, delta / g);
    let fps = FrameRate::new(num as u32, den as u32).map_err(|e| unreadable(e.to_string()))?;
    Ok(ProbeResult { fps, frame_count, duration_s: ticks as f64 / f64::from(timescale), width, height })
}
