//! End-to-end scenarios shared by the integration tests and the acceptance
//! runner. Each one panics on the first broken expectation.

use std::time::Duration;

use serde_json::{json, Value};

use super::{questions_form, Harness, Message, User, PASSWORD};

const WAIT: Duration = Duration::from_secs(3);

pub struct School {
    pub h: Harness,
    pub manager: User,
    pub group: String,
    pub label: String,
}

/// A supervised group run by a manager who may upload, with one
/// Questions-form label of `questions` true/false questions.
pub async fn school(questions: usize) -> School {
    let h = Harness::start().await;
    let manager = h.user("manager@example.org", &["group_creator", "video_uploader"]).await;
    let group = h.group(&manager, "school", "supervised").await;
    let (s, label) = h
        .post(&format!("/groups/{group}/labels"), &manager.token, json!({ "name": "assessment", "kind": "temporal", "form": questions_form(questions) }))
        .await;
    assert_eq!(s, 201, "{label}");
    let label = label["id"].as_str().unwrap().to_owned();
    School { h, manager, group, label }
}

impl School {
    pub async fn annotate(&self, who: &User, video: &str) -> String {
        let body = json!({ "video": video, "label": self.label, "start_frame": 0, "n_frames": 10 });
        let (s, a) = self.h.post(&format!("/groups/{}/annotations", self.group), &who.token, body).await;
        assert_eq!(s, 201, "{a}");
        a["id"].as_str().unwrap().to_owned()
    }

    pub async fn answer(&self, who: &User, annotation: &str, question: &str, value: Value) {
        let (s, v) = self.h.put(&format!("/annotations/{annotation}/answers/{question}"), &who.token, json!({ "value": value })).await;
        assert_eq!(s, 200, "{v}");
    }

    pub async fn assign(&self, who: &User, video: &str) {
        let (s, v) = self.h.put(&format!("/groups/{}/assignments", self.group), &self.manager.token, json!({ "user": who.id, "video": video, "assigned": true })).await;
        assert_eq!(s, 204, "{v}");
    }

    pub async fn visible(&self, who: &User) -> Vec<String> {
        let (s, v) = self.h.get(&format!("/groups/{}/videos", self.group), &who.token).await;
        assert_eq!(s, 200, "{v}");
        v.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap().to_owned()).collect()
    }

    pub async fn set_status(&self, video: &str, status: &str) {
        let (s, v) = self.h.put(&format!("/groups/{}/videos/{video}/status", self.group), &self.manager.token, json!({ "status": status })).await;
        assert_eq!(s, 200, "{v}");
    }
}

fn mentions(m: &Message, needle: &str) -> bool {
    m.data.to_string().contains(needle)
}

/// Two blinded annotators and their manager: neither the API nor the event
/// stream shows B anything of A's, the manager sees both, and the manager's
/// group export carries every answer.
pub async fn blinding() {
    let sc = school(2).await;
    let h = &sc.h;
    let a = h.user("a@example.org", &[]).await;
    let b = h.user("b@example.org", &[]).await;
    for who in [&a, &b] {
        h.add_member(&sc.manager, &sc.group, who, &["create_annotations", "manage_questions", "answer_questions", "download_annotations"], 1).await;
    }
    let video = h.upload(&sc.manager.token, &sc.group, "clip.mp4", 1).await;
    sc.assign(&a, &video).await;
    sc.assign(&b, &video).await;

    let mut b_feed = h.events(&b.token, &sc.group, None).await;
    let mut m_feed = h.events(&sc.manager.token, &sc.group, None).await;

    let a_ann = sc.annotate(&a, &video).await;
    sc.answer(&a, &a_ann, "q1", json!(true)).await;
    let b_ann = sc.annotate(&b, &video).await;
    sc.answer(&b, &b_ann, "q1", json!(false)).await;

    // B's own answer event is emitted last; anything of A's would precede it.
    let seen = b_feed.until(WAIT, |m| m.event == "answers_changed" && mentions(m, &b_ann)).await;
    assert!(!seen.iter().any(|m| mentions(m, &a_ann) || mentions(m, &a.id)), "B's stream leaked A's work: {seen:?}");
    let seen = m_feed.until(WAIT, |m| m.event == "answers_changed" && mentions(m, &b_ann)).await;
    assert!(seen.iter().any(|m| m.event == "annotation_created" && mentions(m, &a_ann)));
    assert!(seen.iter().any(|m| m.event == "answers_changed" && mentions(m, &a_ann)));

    let page = |who: &User| {
        let path = format!("/groups/{}/videos/{video}/annotations", sc.group);
        let token = who.token.clone();
        async move { h.get(&path, &token).await.1 }
    };
    let b_page = page(&b).await;
    let ids = |p: &Value| p["annotations"].as_array().unwrap().iter().map(|a| a["id"].as_str().unwrap().to_owned()).collect::<Vec<_>>();
    assert_eq!(ids(&b_page), vec![b_ann.clone()]);
    assert!(!b_page.to_string().contains(&a.id));
    let m_page = page(&sc.manager).await;
    let mut both = ids(&m_page);
    both.sort();
    let mut expected = vec![a_ann.clone(), b_ann.clone()];
    expected.sort();
    assert_eq!(both, expected);
    assert!(m_page["answers"].to_string().contains(&a.id) && m_page["answers"].to_string().contains(&b.id));

    assert_eq!(h.get(&format!("/annotations/{a_ann}"), &b.token).await.0, 404);
    assert_eq!(h.get(&format!("/annotations/{a_ann}/answers"), &b.token).await.0, 404);
    assert_eq!(h.put(&format!("/annotations/{a_ann}/answers/q2"), &b.token, json!({ "value": true })).await.0, 404);

    let (s, export) = h.get(&format!("/groups/{}/export", sc.group), &sc.manager.token).await;
    assert_eq!(s, 200, "{export}");
    let answers: Vec<&Value> = export["videos"][0]["annotations"].as_array().unwrap().iter().map(|e| &e["answers"]).collect();
    assert!(answers.iter().any(|a_| a_.get(&a.id).is_some()), "export lacks A's answers");
    assert!(answers.iter().any(|a_| a_.get(&b.id).is_some()), "export lacks B's answers");

    let (s, b_export) = h.get(&format!("/groups/{}/export", sc.group), &b.token).await;
    assert_eq!(s, 200, "{b_export}");
    assert!(!b_export.to_string().contains(&a.id) && !b_export.to_string().contains(&a_ann));
}

/// Pending accounts are refused; activation opens a code-gated login with
/// single-use, expiring codes; script tokens skip the code and expire.
pub async fn auth_lifecycle() {
    let h = Harness::start().await;
    let id = h.signup("pending@example.org").await;
    assert_eq!(h.start_login("pending@example.org", PASSWORD).await.0, 403);
    assert!(h.mail.last_to("pending@example.org").is_none());

    h.put(&format!("/admin/users/{id}/state"), &h.admin, json!({ "state": "active" })).await;
    h.put(&format!("/admin/users/{id}/roles"), &h.admin, json!({ "roles": ["script_user"] })).await;
    let (s, step) = h.start_login("pending@example.org", PASSWORD).await;
    assert_eq!((s, step["step"].as_str()), (200, Some("challenge")));
    let code = h.last_code("pending@example.org");
    let wrong = if code == "123456" { "654321" } else { "123456" };
    assert_eq!(h.verify(&step["challenge"], wrong).await.0, 401);
    let (s, grant) = h.verify(&step["challenge"], &code).await;
    assert_eq!(s, 200, "{grant}");
    let (s, v) = h.verify(&step["challenge"], &code).await;
    assert_eq!((s, v["error"].as_str()), (401, Some("code_consumed")));

    let (_, step) = h.start_login("pending@example.org", PASSWORD).await;
    let stale = h.last_code("pending@example.org");
    h.clock.advance(chrono::Duration::minutes(11));
    let (s, v) = h.verify(&step["challenge"], &stale).await;
    assert_eq!((s, v["error"].as_str()), (401, Some("code_expired")));

    let session = grant["token"].as_str().unwrap();
    let (s, token) = h.post("/auth/tokens", session, json!({ "hours": 1 })).await;
    assert_eq!(s, 201, "{token}");
    let api = token["token"].as_str().unwrap();
    let mails = h.mail.sent().len();
    assert_eq!(h.get("/auth/me", api).await.0, 200);
    assert_eq!(h.mail.sent().len(), mails);
    h.clock.advance(chrono::Duration::minutes(59));
    assert_eq!(h.get("/auth/me", api).await.0, 200);
    h.clock.advance(chrono::Duration::minutes(1));
    assert_eq!(h.get("/auth/me", api).await.0, 401);
}

/// Level-1 annotator finishes their only visible video, scores 5 of 6 (83%)
/// against the manager's truth with a 75% threshold, and is promoted; the
/// assigned level-2 video appears.
pub async fn level_up() {
    let sc = school(6).await;
    let h = &sc.h;
    let ann = h.user("ann@example.org", &[]).await;
    h.add_member(&sc.manager, &sc.group, &ann, &["answer_questions"], 1).await;
    let easy = h.upload(&sc.manager.token, &sc.group, "easy.mp4", 1).await;
    let hard = h.upload(&sc.manager.token, &sc.group, "hard.mp4", 2).await;
    sc.assign(&ann, &easy).await;
    sc.assign(&ann, &hard).await;
    assert_eq!(sc.visible(&ann).await, vec![easy.clone()]);

    let item = sc.annotate(&sc.manager, &easy).await;
    for q in 1..=6 {
        sc.answer(&sc.manager, &item, &format!("q{q}"), json!(true)).await;
        sc.answer(&ann, &item, &format!("q{q}"), json!(q != 6)).await;
    }
    let (s, v) = h.put(&format!("/groups/{}/ground-truth", sc.group), &sc.manager.token, json!({ "source_user": sc.manager.id, "threshold_pct": 75.0 })).await;
    assert_eq!(s, 204, "{v}");

    let mut feed = h.events(&ann.token, &sc.group, None).await;
    sc.set_status(&easy, "REVIEWING").await;
    let (_, progress) = h.get(&format!("/groups/{}/members/{}/progress", sc.group, ann.id), &ann.token).await;
    assert_eq!(progress["progress_pct"], 0.0);
    sc.set_status(&easy, "DONE").await;

    let seen = feed.until(WAIT, |m| m.event == "level_changed").await;
    let report = seen.iter().find(|m| m.event == "score_report").expect("score report precedes the level change");
    assert_eq!(report.data["report"]["n_correct"], 5);
    assert_eq!(report.data["report"]["n_total"], 6);
    assert_eq!(report.data["report"]["leveled_up"], true);
    assert_eq!(seen.last().unwrap().data["level"], 2);

    let (_, score) = h.get(&format!("/groups/{}/members/{}/score", sc.group, ann.id), &ann.token).await;
    assert_eq!((score["n_correct"].as_u64(), score["n_total"].as_u64()), (Some(5), Some(6)));
    assert_eq!(format!("{:.0}", score["score_pct"].as_f64().unwrap()), "83");
    assert_eq!(score["level"], 2);
    // The finished video still counts; the newly visible one does not yet.
    let (_, progress) = h.get(&format!("/groups/{}/members/{}/progress", sc.group, ann.id), &ann.token).await;
    assert_eq!(progress["progress_pct"], 50.0);
    let mut now_visible = sc.visible(&ann).await;
    now_visible.sort();
    let mut both = vec![easy, hard];
    both.sort();
    assert_eq!(now_visible, both);
}
