use framewise_core::annotation::AnnotationError;
use framewise_core::evaluation::EvaluationError;
use framewise_core::forms::FormError;
use framewise_core::interchange::InterchangeError;
use framewise_core::ontology::OntologyError;
use framewise_core::workflow::WorkflowError;
use framewise_media::MediaError;
use thiserror::Error;

use crate::state::Role;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("authentication required")]
    Unauthenticated,
    #[error("wrong email or password")]
    BadCredentials,
    #[error("account is not active")]
    AccountInactive,
    #[error("unknown or invalid code")]
    BadCode,
    #[error("code expired")]
    CodeExpired,
    #[error("code already used")]
    CodeConsumed,
    #[error("too many wrong codes; log in again")]
    TooManyAttempts,
    #[error("email already registered")]
    DuplicateEmail,
    #[error("permission denied")]
    PermissionDenied,
    #[error("requires the {0:?} role")]
    RoleMissing(Role),
    #[error("token lifetime is limited to {max_hours} hours")]
    DurationTooLong { max_hours: i64 },
    #[error("protocol not granted to this uploader")]
    ProtocolNotGranted,
    #[error("{0} not found")]
    NotFound(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Conflict(String),
    #[error(transparent)]
    Media(#[from] MediaError),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Interchange(#[from] InterchangeError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("{0}")]
    Internal(String),
}

impl From<EvaluationError> for ApiError {
    fn from(e: EvaluationError) -> Self {
        match e {
            EvaluationError::Workflow(w) => w.into(),
            EvaluationError::NoGroundTruth => ApiError::Conflict(e.to_string()),
            EvaluationError::InvalidThreshold(_) => ApiError::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl ApiError {
    /// HTTP status and a stable machine-readable code.
    pub fn status_code(&self) -> (u16, &'static str) {
        use ApiError::*;
        match self {
            Unauthenticated => (401, "unauthenticated"),
            BadCredentials => (401, "bad_credentials"),
            AccountInactive => (403, "account_inactive"),
            BadCode => (401, "bad_code"),
            CodeExpired => (401, "code_expired"),
            CodeConsumed => (401, "code_consumed"),
            TooManyAttempts => (429, "too_many_attempts"),
            DuplicateEmail => (409, "duplicate_email"),
            PermissionDenied => (403, "permission_denied"),
            RoleMissing(_) => (403, "role_missing"),
            DurationTooLong { .. } => (400, "duration_too_long"),
            ProtocolNotGranted => (403, "protocol_not_granted"),
            NotFound(_) => (404, "not_found"),
            Invalid(_) => (400, "invalid"),
            Conflict(_) => (409, "conflict"),
            Media(MediaError::VariableFrameRate { .. }) => (422, "variable_frame_rate"),
            Media(MediaError::UnreadableContainer(_)) => (422, "unreadable_container"),
            Media(_) => (500, "media"),
            Workflow(w) => match w {
                WorkflowError::NotAMember(_) | WorkflowError::UnknownVideo(_) | WorkflowError::UnknownThread(_) | WorkflowError::NotVisibleAnchor => {
                    (404, "not_found")
                }
                WorkflowError::PermissionDenied => (403, "permission_denied"),
                WorkflowError::NotAReviewer => (403, "not_a_reviewer"),
                WorkflowError::IllegalTransition { .. } => (409, "illegal_transition"),
                WorkflowError::EmptyComment => (400, "invalid"),
                _ => (409, "conflict"),
            },
            Annotation(_) => (422, "invalid_annotation"),
            Form(FormError::FormNotAttached) | Form(FormError::UnknownQuestion(_)) => (404, "not_found"),
            Form(_) => (422, "invalid_answer"),
            Interchange(_) => (422, "schema_violation"),
            Ontology(OntologyError::UnknownLabel(_)) => (404, "not_found"),
            Ontology(OntologyError::DuplicateName(_) | OntologyError::DuplicateId(_)) => (409, "conflict"),
            Ontology(_) => (422, "invalid_label"),
            Internal(_) => (500, "internal"),
        }
    }
}
