mod common;

use common::Harness;
use serde_json::{json, Value};

fn actions(audit: &Value) -> Vec<String> {
    audit.as_array().unwrap().iter().map(|e| e["action"].as_str().unwrap().to_owned()).collect()
}

#[tokio::test]
async fn every_admin_action_is_audited_once() {
    let h = Harness::start().await;
    let up = h.user("up@example.org", &["group_creator", "video_uploader"]).await;
    let (_, base) = h.get("/admin/audit", &h.admin).await;
    let before = actions(&base).len();
    let g = h.group(&up, "lab", "collaborative").await;
    let v = h.upload(&up.token, &g, "c.mp4", 0).await;

    assert_eq!(h.put(&format!("/admin/users/{}/roles", up.id), &h.admin, json!({ "roles": ["group_creator"] })).await.0, 200);
    assert_eq!(h.patch("/admin/settings", &h.admin, json!({ "features": { "beta": true } })).await.0, 200);
    assert_eq!(h.put("/admin/terms", &h.admin, json!({ "text": "v1" })).await.0, 200);
    let (s, sent) = h.post("/admin/broadcast", &h.admin, json!({ "subject": "Downtime", "body": "Sunday" })).await;
    assert_eq!(s, 200);
    assert_eq!(sent["recipients"], 2);
    assert_eq!(h.patch(&format!("/admin/videos/{v}"), &h.admin, json!({ "name": "renamed.mp4" })).await.0, 200);
    assert_eq!(h.delete(&format!("/admin/videos/{v}"), &h.admin).await.0, 204);
    assert_eq!(h.put(&format!("/admin/users/{}/state", up.id), &h.admin, json!({ "state": "archived" })).await.0, 200);

    let (_, audit) = h.get("/admin/audit", &h.admin).await;
    let new: Vec<String> = actions(&audit)[before..].to_vec();
    assert_eq!(new, ["set_roles", "update_settings", "set_terms", "broadcast_mail", "rename_video", "delete_video", "set_account_state"]);
    let seqs: Vec<u64> = audit.as_array().unwrap().iter().map(|e| e["seq"].as_u64().unwrap()).collect();
    assert!(seqs.windows(2).all(|w| w[1] == w[0] + 1));
    let last = audit.as_array().unwrap().last().unwrap();
    assert_eq!((last["before"].as_str(), last["after"].as_str()), (Some("active"), Some("archived")));

    assert_eq!(h.get("/admin/audit", &h.admin).await.1, audit, "reading the log does not add to it");
    assert!(!h.dir.path().join("videos").join(&v).exists());
}

#[tokio::test]
async fn admin_routes_refuse_everyone_else() {
    let h = Harness::start().await;
    let u = h.user("u@example.org", &["group_creator", "video_uploader", "protocol_manager", "script_user"]).await;
    for path in ["/admin/users", "/admin/settings", "/admin/videos", "/admin/sessions", "/admin/audit"] {
        assert_eq!(h.get(path, &u.token).await.0, 403, "{path}");
    }
    assert_eq!(h.put(&format!("/admin/users/{}/roles", u.id), &u.token, json!({ "roles": ["administrator"] })).await.0, 403);
}

#[tokio::test]
async fn admins_cannot_lock_themselves_out() {
    let h = Harness::start().await;
    let (_, me) = h.get("/auth/me", &h.admin).await;
    let id = me["user"]["id"].as_str().unwrap();
    assert_eq!(h.put(&format!("/admin/users/{id}/state"), &h.admin, json!({ "state": "disabled" })).await.0, 409);
    assert_eq!(h.put(&format!("/admin/users/{id}/roles"), &h.admin, json!({ "roles": [] })).await.0, 409);
}

#[tokio::test]
async fn dropping_the_script_role_kills_api_tokens() {
    let h = Harness::start().await;
    let bot = h.user("bot@example.org", &["script_user"]).await;
    let (_, grant) = h.post("/auth/tokens", &bot.token, json!({ "hours": 24 })).await;
    let api = grant["token"].as_str().unwrap();
    let (_, sessions) = h.get("/admin/sessions", &h.admin).await;
    assert!(sessions.as_array().unwrap().iter().any(|s| s["kind"] == "api_token"));
    h.put(&format!("/admin/users/{}/roles", bot.id), &h.admin, json!({ "roles": [] })).await;
    assert_eq!(h.get("/auth/me", api).await.0, 401);
    assert_eq!(h.get("/auth/me", &bot.token).await.0, 200);
}
