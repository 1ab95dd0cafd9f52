//! Opaque string identifiers.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($($(#[$meta:meta])* $name:ident),* $(,)?) => {$(
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    )*};
}

string_id!(
    UserId,
    GroupId,
    VideoId,
    LabelId,
    AnnotationId,
    QuestionId,
    ProtocolId,
    ThreadId,
    DocumentId,
);

/// Source of fresh identifiers for operations that mint new entities
/// (duplicate, cut, import).
pub trait IdSource {
    fn annotation_id(&mut self) -> AnnotationId;
    fn label_id(&mut self) -> LabelId;
}

/// Deterministic `prefix-N` identifiers, handy for tests and offline tools.
#[derive(Debug, Clone)]
pub struct SequentialIds {
    prefix: String,
    next: u64,
}

impl SequentialIds {
    pub fn new(prefix: impl Into<String>) -> Self {
        Self { prefix: prefix.into(), next: 1 }
    }

    fn bump(&mut self, kind: &str) -> String {
        let id = format!("{}-{}{}", self.prefix, kind, self.next);
        self.next += 1;
        id
    }
}

impl IdSource for SequentialIds {
    fn annotation_id(&mut self) -> AnnotationId {
        AnnotationId(self.bump("a"))
    }

    fn label_id(&mut self) -> LabelId {
        LabelId(self.bump("l"))
    }
}
