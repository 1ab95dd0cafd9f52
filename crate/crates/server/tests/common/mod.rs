#![allow(dead_code)]

pub mod scenarios;

use std::sync::Arc;
use std::time::Duration;

use chrono::{TimeZone, Utc};
use framewise_core::annotation::FrameRate;
use framewise_media::fixture::Mp4Spec;
use framewise_server::clock::ManualClock;
use framewise_server::http::{router, App};
use framewise_server::mail::MemoryMailer;
use framewise_server::platform::{Platform, Policy};
use framewise_server::store::MemoryStore;
use framewise_server::{password, worker};
use futures::StreamExt;
use reqwest::Method;
use serde_json::{json, Value};

pub const PASSWORD: &str = "correct horse battery";

pub struct Harness {
    pub base: String,
    pub http: reqwest::Client,
    pub clock: Arc<ManualClock>,
    pub mail: Arc<MemoryMailer>,
    pub app: App,
    pub admin: String,
    pub dir: tempfile::TempDir,
}

#[derive(Debug, Clone)]
pub struct User {
    pub id: String,
    pub email: String,
    pub token: String,
}

pub fn code_in(body: &str) -> String {
    body.split(|c: char| !c.is_ascii_digit()).find(|w| w.len() == 6).expect("mail carries a code").to_owned()
}

impl Harness {
    pub async fn start() -> Self {
        Self::start_with(|_| {}).await
    }

    pub async fn start_with(tune: impl FnOnce(&mut Policy)) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let clock = Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2025, 3, 1, 9, 0, 0).unwrap()));
        let mail = Arc::new(MemoryMailer::default());
        let mut policy = Policy::new(dir.path());
        tune(&mut policy);
        let mut platform = Platform::open(Box::new(MemoryStore), clock.clone(), mail.clone(), policy).unwrap();
        platform.create_admin("admin@example.org", password::hash(PASSWORD).unwrap()).unwrap();
        let mut app = App::new(platform);
        app.recheck = Duration::from_millis(100);
        worker::spawn(app.shared(), 1);
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let served = router(app.clone());
        tokio::spawn(async move { axum::serve(listener, served).await.unwrap() });
        let mut h = Harness { base, http: reqwest::Client::new(), clock, mail, app, admin: String::new(), dir };
        h.admin = h.login("admin@example.org", PASSWORD).await;
        h
    }

    pub async fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> (u16, Value) {
        let mut req = self.http.request(method, format!("{}{}", self.base, path));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        let status = resp.status().as_u16();
        let text = resp.text().await.unwrap();
        (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }

    pub async fn get(&self, path: &str, token: &str) -> (u16, Value) {
        self.call(Method::GET, path, Some(token), None).await
    }

    pub async fn post(&self, path: &str, token: &str, body: Value) -> (u16, Value) {
        self.call(Method::POST, path, Some(token), Some(body)).await
    }

    pub async fn put(&self, path: &str, token: &str, body: Value) -> (u16, Value) {
        self.call(Method::PUT, path, Some(token), Some(body)).await
    }

    pub async fn patch(&self, path: &str, token: &str, body: Value) -> (u16, Value) {
        self.call(Method::PATCH, path, Some(token), Some(body)).await
    }

    pub async fn delete(&self, path: &str, token: &str) -> (u16, Value) {
        self.call(Method::DELETE, path, Some(token), None).await
    }

    /// Password step; returns the login response as is.
    pub async fn start_login(&self, email: &str, password: &str) -> (u16, Value) {
        self.call(Method::POST, "/auth/login", None, Some(json!({ "email": email, "password": password }))).await
    }

    pub fn last_code(&self, email: &str) -> String {
        code_in(&self.mail.last_to(email).expect("a code was mailed").body)
    }

    pub async fn verify(&self, challenge: &Value, code: &str) -> (u16, Value) {
        self.call(Method::POST, "/auth/verify", None, Some(json!({ "challenge": challenge, "code": code }))).await
    }

    /// Full login including the mailed code.
    pub async fn login(&self, email: &str, password: &str) -> String {
        let (status, step) = self.start_login(email, password).await;
        assert_eq!(status, 200, "{step}");
        if step["step"] == "session" {
            return step["token"].as_str().unwrap().to_owned();
        }
        let code = self.last_code(email);
        let (status, grant) =
            self.call(Method::POST, "/auth/verify", None, Some(json!({ "challenge": step["challenge"], "code": code }))).await;
        assert_eq!(status, 200, "{grant}");
        grant["token"].as_str().unwrap().to_owned()
    }

    pub async fn signup(&self, email: &str) -> String {
        let (status, user) = self.call(Method::POST, "/auth/signup", None, Some(json!({ "email": email, "password": PASSWORD }))).await;
        assert_eq!(status, 201, "{user}");
        user["id"].as_str().unwrap().to_owned()
    }

    /// An active, logged-in account holding `roles`.
    pub async fn user(&self, email: &str, roles: &[&str]) -> User {
        let id = self.signup(email).await;
        let (s, v) = self.put(&format!("/admin/users/{id}/state"), &self.admin, json!({ "state": "active" })).await;
        assert_eq!(s, 200, "{v}");
        if !roles.is_empty() {
            let (s, v) = self.put(&format!("/admin/users/{id}/roles"), &self.admin, json!({ "roles": roles })).await;
            assert_eq!(s, 200, "{v}");
        }
        let token = self.login(email, PASSWORD).await;
        User { id, email: email.to_owned(), token }
    }

    pub async fn group(&self, owner: &User, name: &str, gtype: &str) -> String {
        let (s, g) = self.post("/groups", &owner.token, json!({ "name": name, "gtype": gtype })).await;
        assert_eq!(s, 201, "{g}");
        g["id"].as_str().unwrap().to_owned()
    }

    pub async fn add_member(&self, manager: &User, group: &str, who: &User, permissions: &[&str], level: u32) {
        let body = json!({ "email": who.email, "permissions": permissions, "level": level, "is_manager": false });
        let (s, v) = self.post(&format!("/groups/{group}/members"), &manager.token, body).await;
        assert_eq!(s, 200, "{v}");
    }

    pub async fn upload_bytes(&self, token: &str, group: &str, name: &str, level: u32, bytes: Vec<u8>) -> (u16, Value) {
        let resp = self
            .http
            .post(format!("{}/videos", self.base))
            .query(&[("group", group), ("name", name), ("level", &level.to_string())])
            .bearer_auth(token)
            .body(bytes)
            .send()
            .await
            .unwrap();
        let status = resp.status().as_u16();
        (status, resp.json().await.unwrap_or(Value::Null))
    }

    /// Upload a 25 fps, 100-frame clip and return its id.
    pub async fn upload(&self, token: &str, group: &str, name: &str, level: u32) -> String {
        let clip = Mp4Spec::cfr(FrameRate::integer(25).unwrap(), 100, 320, 240).write();
        let (s, v) = self.upload_bytes(token, group, name, level, clip).await;
        assert_eq!(s, 201, "{v}");
        v["id"].as_str().unwrap().to_owned()
    }

    pub async fn events(&self, token: &str, group: &str, last_event_id: Option<u64>) -> Events {
        let mut req = self.http.get(format!("{}/events/{group}", self.base)).bearer_auth(token);
        if let Some(id) = last_event_id {
            req = req.header("Last-Event-ID", id.to_string());
        }
        let resp = req.send().await.unwrap();
        assert_eq!(resp.status().as_u16(), 200);
        Events { stream: Box::pin(resp.bytes_stream()), buf: String::new() }
    }
}

#[derive(Debug, Clone)]
pub struct Message {
    pub event: String,
    pub id: Option<u64>,
    pub data: Value,
}

pub struct Events {
    stream: std::pin::Pin<Box<dyn futures::Stream<Item = reqwest::Result<axum::body::Bytes>> + Send>>,
    buf: String,
}

impl Events {
    /// Next event, or `None` on timeout or end of stream.
    pub async fn next(&mut self, wait: Duration) -> Option<Message> {
        loop {
            if let Some(end) = self.buf.find("\n\n") {
                let frame: String = self.buf.drain(..end + 2).collect();
                let mut msg = Message { event: "message".into(), id: None, data: Value::Null };
                let mut data = String::new();
                for line in frame.lines() {
                    if let Some(v) = line.strip_prefix("event:") {
                        msg.event = v.trim().to_owned();
                    } else if let Some(v) = line.strip_prefix("id:") {
                        msg.id = v.trim().parse().ok();
                    } else if let Some(v) = line.strip_prefix("data:") {
                        data.push_str(v.strip_prefix(' ').unwrap_or(v));
                    }
                }
                if data.is_empty() {
                    continue; // keep-alive comment
                }
                msg.data = serde_json::from_str(&data).unwrap_or(Value::String(data));
                return Some(msg);
            }
            match tokio::time::timeout(wait, self.stream.next()).await {
                Ok(Some(Ok(chunk))) => self.buf.push_str(&String::from_utf8_lossy(&chunk)),
                _ => return None,
            }
        }
    }

    /// Everything up to and including the first event matching `stop`.
    pub async fn until(&mut self, wait: Duration, stop: impl Fn(&Message) -> bool) -> Vec<Message> {
        let mut seen = Vec::new();
        while let Some(m) = self.next(wait).await {
            let done = stop(&m);
            seen.push(m);
            if done {
                return seen;
            }
        }
        panic!("stream ended before the expected event; saw {seen:?}");
    }
}

/// Questions-mode form with `n` true/false questions q1..qn.
pub fn questions_form(n: usize) -> Value {
    let questions: Vec<Value> = (1..=n).map(|i| json!({ "id": format!("q{i}"), "prompt": "ok?", "qtype": "true_false" })).collect();
    json!({ "mode": "questions", "items": [{ "name": "item", "classes": [{ "name": "class", "questions": questions }] }] })
}
