//! Random permission sets against the API: each call succeeds exactly when
//! the permission matrix allows the action.

mod common;

use common::Harness;
use framewise_core::workflow::{allows, Action, Permission, PermissionSet};
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

fn names(set: PermissionSet) -> Vec<Value> {
    Permission::ALL.iter().filter(|p| set.contains(**p)).map(|p| serde_json::to_value(p).unwrap()).collect()
}

#[tokio::test]
async fn api_decisions_follow_the_matrix() {
    let h = Harness::start().await;
    let m = h.user("m@example.org", &["group_creator", "video_uploader"]).await;
    let u = h.user("u@example.org", &["video_uploader"]).await;
    let spare = h.user("spare@example.org", &[]).await;
    let g = h.group(&m, "lab", "collaborative").await;
    h.add_member(&m, &g, &u, &[], 0).await;
    let (_, plain) = h.post(&format!("/groups/{g}/labels"), &m.token, json!({ "name": "phase", "kind": "temporal" })).await;
    let (_, quiz) = h.post(&format!("/groups/{g}/labels"), &m.token, json!({ "name": "quiz", "kind": "temporal", "form": common::questions_form(1) })).await;
    let video = h.upload(&m.token, &g, "c.mp4", 0).await;
    let (_, theirs) = h.post(&format!("/groups/{g}/annotations"), &m.token, json!({ "video": video, "label": plain["id"], "start_frame": 0, "n_frames": 5 })).await;
    let theirs = theirs["id"].as_str().unwrap().to_owned();

    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let mut sets = vec![0u16, (1 << 12) - 1];
    sets.extend((0..40).map(|_| rng.random_range(0..1u16 << 12)));
    for (round, bits) in sets.into_iter().enumerate() {
        let set = PermissionSet::from_bits(bits);
        let body = json!({ "permissions": names(set), "level": 0, "is_manager": false });
        let (s, v) = h.put(&format!("/groups/{g}/members/{}", u.id), &m.token, body).await;
        assert_eq!(s, 200, "{v}");
        let may = |a: Action| allows(set, false, a);
        let ok = |s: u16| (200..300).contains(&s);
        let ctx = format!("{set:?}");

        let s = h.post(&format!("/groups/{g}/annotations"), &u.token, json!({ "video": video, "label": plain["id"], "start_frame": 0, "n_frames": 3 })).await.0;
        assert_eq!(ok(s), may(Action::CreateAnnotation { with_questions: false }), "create plain {ctx}: {s}");
        let s = h.post(&format!("/groups/{g}/annotations"), &u.token, json!({ "video": video, "label": quiz["id"], "start_frame": 0, "n_frames": 3 })).await.0;
        assert_eq!(ok(s), may(Action::CreateAnnotation { with_questions: true }), "create quiz {ctx}: {s}");

        let s = h.patch(&format!("/annotations/{theirs}"), &u.token, json!({ "instance": format!("r{round}") })).await.0;
        assert_eq!(ok(s), may(Action::EditAnnotation { own: false, with_questions: false }), "edit other {ctx}: {s}");

        let s = h.post(&format!("/groups/{g}/labels"), &u.token, json!({ "name": format!("l{round}"), "kind": "point" })).await.0;
        assert_eq!(ok(s), may(Action::CreateLabel { with_questions: false }), "label {ctx}: {s}");
        let s = h.post(&format!("/groups/{g}/labels"), &u.token, json!({ "name": format!("q{round}"), "kind": "temporal", "form": common::questions_form(1) })).await.0;
        assert_eq!(ok(s), may(Action::CreateLabel { with_questions: true }), "quiz label {ctx}: {s}");

        let s = h.patch(&format!("/groups/{g}"), &u.token, json!({ "description": format!("round {round}") })).await.0;
        assert_eq!(ok(s), may(Action::EditGroup), "edit group {ctx}: {s}");

        let s = h.get(&format!("/groups/{g}/export"), &u.token).await.0;
        assert_eq!(ok(s), may(Action::DownloadAnnotations), "export {ctx}: {s}");

        let s = h.post(&format!("/groups/{g}/members"), &u.token, json!({ "email": spare.email, "permissions": [], "level": 0, "is_manager": false })).await.0;
        assert_eq!(ok(s), may(Action::ManageMembers), "add member {ctx}: {s}");
        if ok(s) {
            h.delete(&format!("/groups/{g}/members/{}", spare.id), &m.token).await;
        }

        let extra = h.upload(&m.token, &g, "extra.mp4", 0).await;
        let s = h.delete(&format!("/groups/{g}/videos/{extra}"), &u.token).await.0;
        assert_eq!(ok(s), may(Action::RemoveVideo), "remove video {ctx}: {s}");
        if !ok(s) {
            h.delete(&format!("/groups/{g}/videos/{extra}"), &m.token).await;
        }
        let clip = framewise_media::fixture::Mp4Spec::cfr(framewise_core::annotation::FrameRate::integer(25).unwrap(), 10, 64, 48).write();
        let (s, up) = h.upload_bytes(&u.token, &g, "mine.mp4", 0, clip).await;
        assert_eq!(ok(s), may(Action::AddVideo), "upload {ctx}: {s}");
        if ok(s) {
            h.delete(&format!("/groups/{g}/videos/{}", up["id"].as_str().unwrap()), &m.token).await;
        }

        let s = h.get(&format!("/groups/{g}/members/{}/score", m.id), &u.token).await.0;
        assert!(!ok(s), "other members' scores stay private {ctx}");
    }
}

#[tokio::test]
async fn outsiders_get_not_found() {
    let h = Harness::start().await;
    let m = h.user("m@example.org", &["group_creator", "video_uploader"]).await;
    let out = h.user("out@example.org", &[]).await;
    let g = h.group(&m, "lab", "collaborative").await;
    let v = h.upload(&m.token, &g, "c.mp4", 0).await;
    for path in [format!("/groups/{g}"), format!("/groups/{g}/videos"), format!("/videos/{v}"), format!("/groups/{g}/export"), format!("/groups/{g}/comments")] {
        assert_eq!(h.get(&path, &out.token).await.0, 404, "{path}");
    }
    let r = h.http.get(format!("{}/events/{g}", h.base)).bearer_auth(&out.token).send().await.unwrap();
    assert_eq!(r.status(), 404);
    let (_, groups) = h.get("/groups", &out.token).await;
    assert!(!groups.to_string().contains(&g));
}

#[tokio::test]
async fn hidden_videos_are_unreachable_for_gated_annotators() {
    let h = Harness::start().await;
    let m = h.user("m@example.org", &["group_creator", "video_uploader"]).await;
    let ann = h.user("ann@example.org", &[]).await;
    let g = h.group(&m, "school", "supervised").await;
    h.add_member(&m, &g, &ann, &["create_annotations"], 1).await;
    let v = h.upload(&m.token, &g, "later.mp4", 2).await;
    h.put(&format!("/groups/{g}/assignments"), &m.token, json!({ "user": ann.id, "video": v, "assigned": true })).await;
    assert_eq!(h.get(&format!("/groups/{g}/videos"), &ann.token).await.1, json!([]));
    assert_eq!(h.get(&format!("/videos/{v}"), &ann.token).await.0, 404);
    assert_eq!(h.get(&format!("/groups/{g}/videos/{v}/annotations"), &ann.token).await.0, 404);
    let r = h.http.get(format!("{}/videos/{v}/original", h.base)).bearer_auth(&ann.token).send().await.unwrap();
    assert_eq!(r.status(), 404);
    h.put(&format!("/groups/{g}/members/{}/level", ann.id), &m.token, json!({ "level": 2 })).await;
    assert_eq!(h.get(&format!("/videos/{v}"), &ann.token).await.0, 200);
}
