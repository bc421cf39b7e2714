//! Backend for the 2×3 randomized experiment: enrollment and randomization,
//! pre/post surveys, opposing-stance thread seeding, the social-cue gate,
//! persona dialogue agents, an append-only event log and the analysis export.

pub mod backends;
pub mod clock;
pub mod config;
pub mod content;
pub mod engine;
pub mod events;
pub mod export;
pub mod http;
pub mod service;
pub mod session;
pub mod store;
pub mod survey;

use serde::Serialize;
use thiserror::Error;

pub use backends::{
    render_agent_prompt, AgentBackend, AgentDeck, Backends, FeedbackGenerator, RemoteAgent, RemoteFeedback, StubAgent,
    StubFeedback, ThreadContext,
};
pub use clock::{Clock, StepClock, SystemClock};
pub use config::{AttentionCheck, ExperimentConfig, GenerationBackend, SurveyStageSel};
pub use content::{ContentPack, SeedPost};
pub use engine::{Command, CommentReply, Engine, FeedbackChoice, PreSurveyReply, Reply};
pub use events::{Event, EventRecord};
pub use export::export_bundle;
pub use http::{router, serve};
pub use service::{EnrollReply, ExperimentService, FeedComment, FeedView, PendingView, ThreadView};
pub use session::{Assignment, PendingFeedback, Phase, SessionState, ThreadDeficit};
pub use store::EventStore;
pub use survey::{assign_topic, SurveyResponse, TopicItems};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("cannot {action} from phase {from}{}", fmt_deficits(.deficits))]
    IllegalTransition { from: Phase, action: String, deficits: Vec<ThreadDeficit> },
    #[error("comment `{comment_id}` is awaiting a feedback resolution")]
    MustResolveFeedback { comment_id: String },
    #[error("illegal state: {0}")]
    IllegalState(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid content pack: {0}")]
    Content(String),
    #[error("event store: {0}")]
    Store(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Rct(#[from] humility_core::rct::RctError),
    #[error(transparent)]
    Classify(#[from] humility_core::classify::ClassifyError),
}

fn fmt_deficits(d: &[ThreadDeficit]) -> String {
    if d.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = d.iter().map(|t| format!("{} needs {} more", t.thread_id, t.missing)).collect();
    format!(" ({})", parts.join(", "))
}

/// Machine-readable error kind for API responses.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub deficits: Vec<ThreadDeficit>,
}

impl ExperimentError {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::NotFound(_) => "not_found",
            ExperimentError::Validation(_) => "validation",
            ExperimentError::IllegalTransition { .. } => "illegal_transition",
            ExperimentError::MustResolveFeedback { .. } => "must_resolve_feedback",
            ExperimentError::IllegalState(_) => "illegal_state",
            ExperimentError::Config(_) => "config",
            ExperimentError::Content(_) => "content",
            ExperimentError::Store(_) | ExperimentError::Io(_) | ExperimentError::Json(_) => "store",
            ExperimentError::Rct(_) => "export",
            ExperimentError::Classify(_) => "backend",
        }
    }

    pub fn body(&self) -> ErrorBody {
        let deficits = match self {
            ExperimentError::IllegalTransition { deficits, .. } => deficits.clone(),
            _ => Vec::new(),
        };
        ErrorBody { error: self.kind(), message: self.to_string(), deficits }
    }
}
