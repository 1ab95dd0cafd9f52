mod common;

use std::time::Duration;

use common::Harness;
use framewise_core::annotation::FrameRate;
use framewise_media::fixture::Mp4Spec;
use framewise_media::Transcoder;
use serde_json::{json, Value};

const STUB: &str = r#"sh -c 'for i in 0 1; do cp "$1" "$2/seg_$i.ts"; done' stub {input} {outdir}"#;

async fn settled(h: &Harness, token: &str, video: &str) -> Value {
    for _ in 0..200 {
        let (_, v) = h.get(&format!("/videos/{video}"), token).await;
        if ["ready", "passthrough", "failed"].contains(&v["job"]["state"].as_str().unwrap_or("")) {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(25)).await;
    }
    panic!("ingest of {video} never settled");
}

#[tokio::test]
async fn upload_is_probed_transcoded_and_served() {
    let h = Harness::start_with(|p| p.transcoder = Some(Transcoder::new(STUB, Duration::from_secs(10)).unwrap())).await;
    let up = h.user("up@example.org", &["group_creator", "video_uploader"]).await;
    let g = h.group(&up, "lab", "collaborative").await;
    let clip = Mp4Spec::cfr(FrameRate::new(30000, 1001).unwrap(), 300, 1280, 720).write();
    let (s, v) = h.upload_bytes(&up.token, &g, "surgery.mp4", 0, clip.clone()).await;
    assert_eq!(s, 201, "{v}");
    assert_eq!(v["frame_count"], 300);
    assert_eq!(v["fps"], json!([30000, 1001]));
    let id = v["id"].as_str().unwrap().to_owned();

    let done = settled(&h, &up.token, &id).await;
    assert_eq!(done["job"]["state"], "ready", "{done}");
    let heights: Vec<u64> = done["renditions"].as_array().unwrap().iter().map(|r| r["height"].as_u64().unwrap()).collect();
    assert_eq!(heights, vec![720, 480, 360, 240, 144]);

    let master = h.http.get(format!("{}/videos/{id}/hls/master.m3u8", h.base)).bearer_auth(&up.token).send().await.unwrap();
    assert_eq!(master.status(), 200);
    assert_eq!(master.headers()["content-type"], "application/vnd.apple.mpegurl");
    let text = master.text().await.unwrap();
    assert!(text.starts_with("#EXTM3U"));
    assert_eq!(text.matches("#EXT-X-STREAM-INF").count(), 5);

    let seg = h.http.get(format!("{}/videos/{id}/hls/720p/seg_0.ts", h.base)).bearer_auth(&up.token).send().await.unwrap();
    assert_eq!(seg.headers()["content-type"], "video/mp2t");
    assert_eq!(seg.bytes().await.unwrap().len(), clip.len());

    let ranged = h
        .http
        .get(format!("{}/videos/{id}/original?access_token={}", h.base, up.token))
        .header("Range", "bytes=0-7")
        .send()
        .await
        .unwrap();
    assert_eq!(ranged.status(), 206);
    assert_eq!(&ranged.bytes().await.unwrap()[..], &clip[..8]);

    let escape = h.http.get(format!("{}/videos/{id}/hls/..%2F..%2Fstate.json", h.base)).bearer_auth(&up.token).send().await.unwrap();
    assert_eq!(escape.status(), 404);
}

#[tokio::test]
async fn variable_frame_rate_uploads_are_refused() {
    let h = Harness::start().await;
    let up = h.user("up@example.org", &["group_creator", "video_uploader"]).await;
    let g = h.group(&up, "lab", "collaborative").await;
    let mut spec = Mp4Spec::cfr(FrameRate::integer(25).unwrap(), 10, 320, 240);
    spec.runs = vec![(5, 3600), (5, 3000)];
    let (s, v) = h.upload_bytes(&up.token, &g, "vfr.mp4", 0, spec.write()).await;
    assert_eq!(s, 422, "{v}");
    assert_eq!(v["error"], "variable_frame_rate");
    assert!(v["message"].as_str().unwrap().contains("ffmpeg"));
    let (_, videos) = h.get(&format!("/groups/{g}/videos"), &up.token).await;
    assert_eq!(videos, json!([]));
    let staged = std::fs::read_dir(h.dir.path().join("staging")).map(|d| d.count()).unwrap_or(0);
    assert_eq!(staged, 0, "rejected uploads are not kept");
}

#[tokio::test]
async fn garbage_uploads_are_refused() {
    let h = Harness::start().await;
    let up = h.user("up@example.org", &["group_creator", "video_uploader"]).await;
    let g = h.group(&up, "lab", "collaborative").await;
    let (s, v) = h.upload_bytes(&up.token, &g, "x.mp4", 0, b"not a movie at all".to_vec()).await;
    assert_eq!((s, v["error"].as_str()), (422, Some("unreadable_container")));
}

#[tokio::test]
async fn uploading_needs_the_role_and_group_right() {
    let h = Harness::start().await;
    let owner = h.user("owner@example.org", &["group_creator", "video_uploader"]).await;
    let g = h.group(&owner, "lab", "collaborative").await;
    let clip = Mp4Spec::cfr(FrameRate::integer(25).unwrap(), 10, 320, 240).write();

    let no_role = h.user("norole@example.org", &[]).await;
    h.add_member(&owner, &g, &no_role, &["add_videos"], 0).await;
    assert_eq!(h.upload_bytes(&no_role.token, &g, "a.mp4", 0, clip.clone()).await.0, 403);

    let no_right = h.user("noright@example.org", &["video_uploader"]).await;
    h.add_member(&owner, &g, &no_right, &["create_annotations"], 0).await;
    assert_eq!(h.upload_bytes(&no_right.token, &g, "a.mp4", 0, clip.clone()).await.0, 403);

    let outsider = h.user("out@example.org", &["video_uploader"]).await;
    assert_eq!(h.upload_bytes(&outsider.token, &g, "a.mp4", 0, clip).await.0, 404);
}

#[tokio::test]
async fn protocols_gate_uploads() {
    let h = Harness::start().await;
    let pm = h.user("pm@example.org", &["protocol_manager"]).await;
    let up = h.user("up@example.org", &["group_creator", "video_uploader"]).await;
    let g = h.group(&up, "lab", "collaborative").await;
    let (s, p) = h.post("/protocols", &pm.token, json!({ "name": "Study A", "irb_number": "IRB-7", "archive_deadline": "2030-01-31" })).await;
    assert_eq!(s, 201, "{p}");
    let pid = p["id"].as_str().unwrap();
    let clip = Mp4Spec::cfr(FrameRate::integer(25).unwrap(), 10, 320, 240).write();
    let upload = |clip: Vec<u8>| {
        let req = h.http.post(format!("{}/videos", h.base)).query(&[("group", g.as_str()), ("name", "c.mp4"), ("protocol", pid)]).bearer_auth(&up.token).body(clip);
        async move { req.send().await.unwrap().status().as_u16() }
    };
    assert_eq!(upload(clip.clone()).await, 403);
    let (s, _) = h.put(&format!("/protocols/{pid}/grants"), &pm.token, json!({ "uploader": up.id, "granted": true })).await;
    assert_eq!(s, 200);
    assert_eq!(upload(clip).await, 201);
    let (_, mine) = h.get("/protocols", &up.token).await;
    assert_eq!(mine[0]["irb_number"], "IRB-7");

    let pdf = b"%PDF-1.4 fake".to_vec();
    let r = h.http.put(format!("{}/protocols/{pid}/document", h.base)).bearer_auth(&pm.token).body(pdf.clone()).send().await.unwrap();
    assert_eq!(r.status(), 200);
    let r = h.http.get(format!("{}/protocols/{pid}/document", h.base)).bearer_auth(&up.token).send().await.unwrap();
    assert_eq!(r.bytes().await.unwrap().to_vec(), pdf);
}

#[tokio::test]
async fn shared_videos_are_stored_once() {
    let h = Harness::start().await;
    let up = h.user("up@example.org", &["group_creator", "video_uploader"]).await;
    let g1 = h.group(&up, "one", "collaborative").await;
    let g2 = h.group(&up, "two", "collaborative").await;
    let v = h.upload(&up.token, &g1, "c.mp4", 0).await;
    let (s, view) = h.post(&format!("/videos/{v}/share"), &up.token, json!({ "group": g2 })).await;
    assert_eq!(s, 200, "{view}");
    assert_eq!(view["groups"].as_array().unwrap().len(), 2);
    let (_, list) = h.get(&format!("/groups/{g2}/videos"), &up.token).await;
    assert_eq!(list[0]["id"], v.as_str());
    let dirs = std::fs::read_dir(h.dir.path().join("videos")).unwrap().count();
    assert_eq!(dirs, 1);
}
