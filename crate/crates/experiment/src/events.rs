use humility_core::rct::{CommentExport, Resolution, StanceSide, Topic};
use serde::{Deserialize, Serialize};

use crate::session::{Assignment, Phase};
use crate::survey::SurveyResponse;

/// A state change of one session. The event log is the source of truth;
/// session state is a fold over it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Enrolled {
        assignment: Assignment,
    },
    Consented,
    PreSurveySubmitted {
        response: SurveyResponse,
        topic: Topic,
        stance_side: StanceSide,
        threads: Vec<String>,
        tie_broken_randomly: bool,
        attention_pass: bool,
    },
    /// A participant comment went straight to the feed.
    CommentPosted {
        comment: CommentExport,
        request_key: Option<String>,
    },
    /// A participant comment was held back and a suggestion shown.
    FeedbackOffered {
        comment: CommentExport,
        request_key: Option<String>,
    },
    FeedbackResolved {
        comment_id: String,
        posted_text: String,
        resolution: Resolution,
        posted_at: i64,
        request_key: Option<String>,
    },
    AgentReplied {
        comment: CommentExport,
    },
    Outage {
        backend: String,
        detail: String,
        comment_id: Option<String>,
    },
    AdvancedToPostSurvey,
    PostSurveySubmitted {
        response: SurveyResponse,
        attention_pass: bool,
        completion_token: String,
    },
    Abandoned {
        from: Phase,
    },
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::Enrolled { .. } => "enrolled",
            Event::Consented => "consented",
            Event::PreSurveySubmitted { .. } => "pre_survey_submitted",
            Event::CommentPosted { .. } => "comment_posted",
            Event::FeedbackOffered { .. } => "feedback_offered",
            Event::FeedbackResolved { .. } => "feedback_resolved",
            Event::AgentReplied { .. } => "agent_replied",
            Event::Outage { .. } => "outage",
            Event::AdvancedToPostSurvey => "advanced_to_post_survey",
            Event::PostSurveySubmitted { .. } => "post_survey_submitted",
            Event::Abandoned { .. } => "abandoned",
        }
    }
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    /// UTC epoch milliseconds.
    pub at: i64,
    pub session: String,
    pub event: Event,
}
