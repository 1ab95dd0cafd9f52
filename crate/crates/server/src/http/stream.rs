use std::collections::VecDeque;
use std::convert::Infallible;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::HeaderMap;
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::routing::get;
use axum::Router;
use framewise_core::ids::{GroupId, UserId};
use futures::Stream;
use serde::Deserialize;
use tokio::sync::broadcast::{self, error::RecvError};

use super::{ApiResult, App, Auth};
use crate::events::Event;

#[derive(Deserialize)]
struct Resume {
    last_event_id: Option<u64>,
}

pub fn routes() -> Router<App> {
    Router::new().route("/events/{g}", get(events))
}

/// Leaves the group's presence list when the stream is dropped.
struct Presence {
    app: App,
    user: UserId,
    group: GroupId,
}

impl Drop for Presence {
    fn drop(&mut self) {
        self.app.lock().close_feed(&self.user, &self.group);
    }
}

struct Feed {
    presence: Presence,
    token: String,
    rx: broadcast::Receiver<Arc<Event>>,
    queued: VecDeque<SseEvent>,
}

fn encode(e: &Event) -> SseEvent {
    let data = serde_json::to_string(e).unwrap_or_else(|_| "{}".into());
    SseEvent::default().id(e.seq.to_string()).event(e.body.name()).data(data)
}

fn resync() -> SseEvent {
    SseEvent::default().event("resync").data("{}")
}

impl Feed {
    async fn next(mut self) -> Option<(Result<SseEvent, Infallible>, Feed)> {
        loop {
            if let Some(ev) = self.queued.pop_front() {
                return Some((Ok(ev), self));
            }
            let recheck = self.presence.app.recheck;
            tokio::select! {
                got = self.rx.recv() => match got {
                    Ok(ev) => {
                        let app = &self.presence.app;
                        let guard = app.lock();
                        if guard.authenticate(&self.token).is_err() {
                            return None;
                        }
                        if guard.delivers(&ev, &self.presence.user) {
                            self.queued.push_back(encode(&ev));
                        }
                    }
                    Err(RecvError::Lagged(_)) => self.queued.push_back(resync()),
                    Err(RecvError::Closed) => return None,
                },
                _ = tokio::time::sleep(recheck) => {
                    let guard = self.presence.app.lock();
                    if guard.authenticate(&self.token).is_err() || guard.state().group_for(&self.presence.user, &self.presence.group).is_err() {
                        return None;
                    }
                }
            }
        }
    }
}

async fn events(
    State(app): State<App>,
    auth: Auth,
    Path(group): Path<GroupId>,
    Query(resume): Query<Resume>,
    headers: HeaderMap,
) -> ApiResult<Sse<impl Stream<Item = Result<SseEvent, Infallible>>>> {
    let after = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse().ok())
        .or(resume.last_event_id)
        .unwrap_or(0);
    let (replay, rx) = app.with(|p| p.open_feed(&auth.user, &group, after))?;
    let queued = match replay {
        Some(events) => events.iter().map(|e| encode(e)).collect(),
        None => VecDeque::from([resync()]),
    };
    let feed = Feed { presence: Presence { app, user: auth.user, group }, token: auth.token, rx, queued };
    let stream = futures::stream::unfold(feed, Feed::next);
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}
