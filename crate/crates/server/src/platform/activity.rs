use std::collections::BTreeMap;

use framewise_core::ids::{GroupId, UserId, VideoId};
use serde::{Deserialize, Serialize};

use super::{Platform, Result};
use crate::error::ApiError;
use crate::state::{ActivityKey, ActivitySample};

/// Time spent on one video, in total and per annotator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoActivity {
    pub video: VideoId,
    pub total_seconds: i64,
    pub per_user: BTreeMap<UserId, i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dashboard {
    pub group: GroupId,
    pub per_video: Vec<VideoActivity>,
    /// One sample per (user, video, day), ordered by user then day.
    pub per_user_day: Vec<ActivitySample>,
}

impl Platform {
    /// Credit time for an open annotation page. The first beat of a session
    /// counts one interval; later beats count the time since the previous
    /// one unless the gap exceeds the idle limit, which starts a new session.
    /// Returns the seconds credited.
    pub fn heartbeat(&mut self, actor: &UserId, group: &GroupId, video: &VideoId) -> Result<i64> {
        let gs = self.group_state(actor, group)?;
        self.state.require_video(actor, gs, video)?;
        let now = self.now();
        let key = (actor.clone(), group.clone(), video.clone());
        let credit = match self.heartbeats.get(&key) {
            Some(&last) if now > last && now - last <= self.policy.idle_gap => (now - last).num_seconds(),
            Some(&last) if now <= last => 0,
            _ => self.policy.heartbeat_interval.num_seconds(),
        };
        self.heartbeats.insert(key, now);
        if credit > 0 {
            let day = now.date_naive();
            let k = ActivityKey { user: actor.clone(), group: group.clone(), video: video.clone(), day };
            *self.state.activity.entry(k).or_default() += credit;
            self.commit()?;
        }
        Ok(credit)
    }

    pub fn dashboard(&self, actor: &UserId, group: &GroupId) -> Result<Dashboard> {
        let gs = self.group_state(actor, group)?;
        if !self.state.manages(actor, gs) {
            return Err(ApiError::PermissionDenied);
        }
        let mut per_video: BTreeMap<VideoId, VideoActivity> = BTreeMap::new();
        let mut per_user_day = Vec::new();
        for (k, &secs) in self.state.activity.iter().filter(|(k, _)| &k.group == group) {
            let v = per_video.entry(k.video.clone()).or_insert_with(|| VideoActivity {
                video: k.video.clone(),
                total_seconds: 0,
                per_user: BTreeMap::new(),
            });
            v.total_seconds += secs;
            *v.per_user.entry(k.user.clone()).or_default() += secs;
            per_user_day.push(ActivitySample { key: k.clone(), seconds_active: secs });
        }
        per_user_day.sort_by(|a, b| (&a.key.user, a.key.day, &a.key.video).cmp(&(&b.key.user, b.key.day, &b.key.video)));
        Ok(Dashboard { group: group.clone(), per_video: per_video.into_values().collect(), per_user_day })
    }
}
