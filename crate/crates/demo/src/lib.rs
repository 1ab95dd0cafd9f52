//! Three engine operations exposed to a static web page. Every function
//! takes and returns plain strings or numbers so the page needs no
//! bindings beyond what `wasm-bindgen` generates.

use framewise_core::annotation::{create_annotation, frame_from_time, interpolate_shape, time_from_frame, FrameRate, Label, LabelKind, ShapeGeometry, VideoMeta};
use framewise_core::ids::{UserId, VideoId};
use framewise_core::workflow::{Group, GroupType, Membership, PermissionSet};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Shape at `frame` of a track with keyframes `first` at 0 and `last` at
/// `gap`. Shapes use the wire encoding, e.g.
/// `{"kind":"bounding_box","coords":{"x_min":0.1,...}}`.
pub fn interpolate_json(first: &str, last: &str, gap: u64, frame: u64) -> Result<String, String> {
    let parse = |s: &str| serde_json::from_str::<ShapeGeometry>(s).map_err(|e| format!("bad shape: {e}"));
    let (a, b) = (parse(first)?, parse(last)?);
    if a.kind() != b.kind() {
        return Err("keyframes must have the same kind".into());
    }
    if gap == 0 {
        return Err("gap must be at least one frame".into());
    }
    let kind = LabelKind::ALL.into_iter().find(|k| k.shape_kind() == Some(a.kind())).ok_or("unknown shape kind")?;
    let label = Label::new("l", "demo", kind);
    let video = VideoMeta::new("v", "demo", FrameRate::integer(25).unwrap(), gap + 1);
    let mut track = create_annotation("a".into(), &label, &video, 0, gap + 1, Some(a), "demo".into()).map_err(|e| e.to_string())?;
    track.set_keyframe(&label, gap, b).map_err(|e| e.to_string())?;
    let shape = interpolate_shape(&track, frame.min(gap)).map_err(|e| e.to_string())?;
    serde_json::to_string(&shape).map_err(|e| e.to_string())
}

/// Nearest frame to `seconds` at `num/den` frames per second.
pub fn frame_at(seconds: f64, num: u32, den: u32) -> Result<u64, String> {
    let fps = FrameRate::new(num, den).map_err(|e| e.to_string())?;
    frame_from_time(seconds, fps).map_err(|e| e.to_string())
}

/// Presentation time of `frame` in seconds.
pub fn time_of(frame: u64, num: u32, den: u32) -> Result<f64, String> {
    let fps = FrameRate::new(num, den).map_err(|e| e.to_string())?;
    Ok(time_from_frame(frame, fps))
}

/// Visibility of one video to an annotator of a supervised group, as a
/// JSON grid `rows[assigned][video_level]` for video levels `0..=max_level`.
pub fn visibility_grid(annotator_level: u32, max_level: u32) -> Result<String, String> {
    let annotator = UserId::from("annotator");
    let mut rows = Vec::new();
    for assigned in [false, true] {
        let mut row = Vec::new();
        for level in 0..=max_level {
            let mut g = Group::new("g", "demo", GroupType::Supervised, "manager".into());
            g.add_member(annotator.clone(), Membership::annotator(PermissionSet::EMPTY, annotator_level)).map_err(|e| e.to_string())?;
            let v = VideoId::from("v");
            g.add_video(v.clone(), level).map_err(|e| e.to_string())?;
            g.assign(&annotator, &v, assigned).map_err(|e| e.to_string())?;
            row.push(g.can_see_video(&annotator, &v));
        }
        rows.push(row);
    }
    Ok(json!(rows).to_string())
}

#[wasm_bindgen]
pub fn interpolate(first: &str, last: &str, gap: u32, frame: u32) -> Result<String, JsError> {
    interpolate_json(first, last, gap.into(), frame.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = frameAt)]
pub fn frame_at_js(seconds: f64, num: u32, den: u32) -> Result<f64, JsError> {
    frame_at(seconds, num, den).map(|f| f as f64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = timeOf)]
pub fn time_of_js(frame: f64, num: u32, den: u32) -> Result<f64, JsError> {
    if !(frame >= 0.0 && frame.fract() == 0.0) {
        return Err(JsError::new("frame must be a non-negative integer"));
    }
    time_of(frame as u64, num, den).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = visibilityGrid)]
pub fn visibility_grid_js(annotator_level: u32, max_level: u32) -> Result<String, JsError> {
    visibility_grid(annotator_level, max_level).map_err(|e| JsError::new(&e))
}
