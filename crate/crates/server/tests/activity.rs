mod common;

use common::Harness;
use serde_json::{json, Value};

async fn setup() -> (Harness, common::User, common::User, String, String) {
    let h = Harness::start().await;
    let m = h.user("m@example.org", &["group_creator", "video_uploader"]).await;
    let ann = h.user("ann@example.org", &[]).await;
    let g = h.group(&m, "lab", "collaborative").await;
    h.add_member(&m, &g, &ann, &["create_annotations"], 0).await;
    let v = h.upload(&m.token, &g, "c.mp4", 0).await;
    (h, m, ann, g, v)
}

async fn beat(h: &Harness, token: &str, g: &str, v: &str) -> i64 {
    let (s, r) = h.post(&format!("/groups/{g}/videos/{v}/heartbeat"), token, json!({})).await;
    assert_eq!(s, 200, "{r}");
    r["seconds"].as_i64().unwrap()
}

fn seconds_of(dash: &Value, user: &str) -> i64 {
    dash["per_video"][0]["per_user"][user].as_i64().unwrap_or(0)
}

#[tokio::test]
async fn ten_beats_fifteen_seconds_apart_make_150_seconds() {
    let (h, m, ann, g, v) = setup().await;
    let mut credited = 0;
    for i in 0..10 {
        if i > 0 {
            h.clock.advance(chrono::Duration::seconds(15));
        }
        credited += beat(&h, &ann.token, &g, &v).await;
    }
    assert_eq!(credited, 150);
    let (_, dash) = h.get(&format!("/groups/{g}/dashboard"), &m.token).await;
    assert_eq!(seconds_of(&dash, &ann.id), 150);
    assert_eq!(dash["per_video"][0]["total_seconds"], 150);
    assert_eq!(dash["per_user_day"][0]["seconds_active"], 150);
    assert_eq!(dash["per_user_day"][0]["day"], "2025-03-01");
}

#[tokio::test]
async fn a_long_pause_starts_a_second_session() {
    let (h, m, ann, g, v) = setup().await;
    for session in 0..2 {
        if session == 1 {
            h.clock.advance(chrono::Duration::minutes(5));
        }
        for i in 0..5 {
            if i > 0 {
                h.clock.advance(chrono::Duration::seconds(15));
            }
            beat(&h, &ann.token, &g, &v).await;
        }
    }
    let (_, dash) = h.get(&format!("/groups/{g}/dashboard"), &m.token).await;
    // Each session: one opening interval plus four 15 s gaps; the pause itself is not counted.
    assert_eq!(seconds_of(&dash, &ann.id), 2 * (15 + 4 * 15));
}

#[tokio::test]
async fn dashboards_are_for_managers() {
    let (h, _m, ann, g, _v) = setup().await;
    assert_eq!(h.get(&format!("/groups/{g}/dashboard"), &ann.token).await.0, 403);
    assert_eq!(h.get(&format!("/groups/{g}/dashboard"), &h.admin).await.0, 200);
}

#[tokio::test]
async fn beats_need_access_to_the_video() {
    let (h, _m, _ann, g, v) = setup().await;
    let outsider = h.user("out@example.org", &[]).await;
    assert_eq!(h.post(&format!("/groups/{g}/videos/{v}/heartbeat"), &outsider.token, json!({})).await.0, 404);
}
