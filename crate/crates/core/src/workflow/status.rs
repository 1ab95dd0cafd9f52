use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VideoStatus {
    #[default]
    New,
    Todo,
    Doing,
    Reviewing,
    Done,
}

impl VideoStatus {
    pub const ALL: [VideoStatus; 5] =
        [VideoStatus::New, VideoStatus::Todo, VideoStatus::Doing, VideoStatus::Reviewing, VideoStatus::Done];

    pub fn name(self) -> &'static str {
        match self {
            VideoStatus::New => "NEW",
            VideoStatus::Todo => "TODO",
            VideoStatus::Doing => "DOING",
            VideoStatus::Reviewing => "REVIEWING",
            VideoStatus::Done => "DONE",
        }
    }
}

impl fmt::Display for VideoStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Who may perform a legal transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    AnyMember,
    Reviewer,
}

/// The requirement for `from -> to`, or `None` when the transition is illegal.
pub fn transition_rule(from: VideoStatus, to: VideoStatus) -> Option<Requirement> {
    use VideoStatus::*;
    match (from, to) {
        (New, Todo) | (New, Doing) | (Todo, Doing) | (Doing, Reviewing) => Some(Requirement::AnyMember),
        (Reviewing, Done) | (Reviewing, Doing) | (Done, Doing) => Some(Requirement::Reviewer),
        _ => None,
    }
}

/// Status a video takes when its first annotation is added, if it changes.
pub fn on_first_annotation(status: VideoStatus) -> Option<VideoStatus> {
    matches!(status, VideoStatus::New | VideoStatus::Todo).then_some(VideoStatus::Doing)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialized_upper_case() {
        assert_eq!(serde_json::to_string(&VideoStatus::Reviewing).unwrap(), "\"REVIEWING\"");
        assert_eq!(VideoStatus::default(), VideoStatus::New);
    }

    #[test]
    fn seven_legal_transitions() {
        let legal = VideoStatus::ALL
            .iter()
            .flat_map(|a| VideoStatus::ALL.iter().map(move |b| (*a, *b)))
            .filter(|(a, b)| transition_rule(*a, *b).is_some())
            .count();
        assert_eq!(legal, 7);
        assert_eq!(transition_rule(VideoStatus::New, VideoStatus::Done), None);
    }
}
