use std::collections::BTreeMap;
use std::fmt;

use humility_core::rct::{AuthorKind, CommentExport, CueArm, Resolution, StanceSide, Topic};
use humility_core::IHLabel;
use serde::{Deserialize, Serialize};

use crate::events::Event;
use crate::survey::SurveyResponse;
use crate::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Consent,
    PreSurvey,
    Discussion,
    PostSurvey,
    Complete,
    Abandoned,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Consent => "consent",
            Phase::PreSurvey => "pre_survey",
            Phase::Discussion => "discussion",
            Phase::PostSurvey => "post_survey",
            Phase::Complete => "complete",
            Phase::Abandoned => "abandoned",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Arm assignment, fixed at enrollment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub participant_id: String,
    pub external_id: String,
    pub cue_arm: CueArm,
    pub env_arm: IHLabel,
    pub assigned_at: i64,
    /// Enrollment ordinal; with the service seed it reproduces every draw for the session.
    pub seed_trace: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingFeedback {
    pub comment_id: String,
    pub thread_id: String,
    pub suggestion: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreadDeficit {
    pub thread_id: String,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub assignment: Assignment,
    pub phase: Phase,
    pub topic: Option<Topic>,
    /// The participant's side; threads argue the opposite one.
    pub stance_side: Option<StanceSide>,
    pub threads: Vec<String>,
    /// Participant and agent comments in event order.
    pub comments: Vec<CommentExport>,
    pub comments_posted: BTreeMap<String, usize>,
    pub pending_feedback: Option<PendingFeedback>,
    pub pre_survey: Option<SurveyResponse>,
    pub post_survey: Option<SurveyResponse>,
    pub pre_attention_pass: bool,
    pub attention_pass: bool,
    pub completion_token: Option<String>,
    /// Client request keys, namespaced by command, mapped to the comment they produced.
    pub request_keys: BTreeMap<String, String>,
    pub agent_draws: u64,
    pub outages: u32,
}

fn illegal(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::IllegalState(msg.into())
}

impl SessionState {
    pub fn new(assignment: Assignment) -> Self {
        SessionState {
            assignment,
            phase: Phase::Consent,
            topic: None,
            stance_side: None,
            threads: Vec::new(),
            comments: Vec::new(),
            comments_posted: BTreeMap::new(),
            pending_feedback: None,
            pre_survey: None,
            post_survey: None,
            pre_attention_pass: false,
            attention_pass: false,
            completion_token: None,
            request_keys: BTreeMap::new(),
            agent_draws: 0,
            outages: 0,
        }
    }

    pub fn id(&self) -> &str {
        &self.assignment.participant_id
    }

    /// Builds a state by folding events; the first must be `Enrolled`.
    pub fn replay<'a>(events: impl IntoIterator<Item = &'a Event>) -> Result<Self, ExperimentError> {
        let mut it = events.into_iter();
        let mut state = match it.next() {
            Some(Event::Enrolled { assignment }) => SessionState::new(assignment.clone()),
            _ => return Err(illegal("event stream does not start with enrollment")),
        };
        for e in it {
            state.apply(e)?;
        }
        Ok(state)
    }

    fn comment_mut(&mut self, id: &str) -> Option<&mut CommentExport> {
        self.comments.iter_mut().find(|c| c.comment_id == id)
    }

    pub fn comment(&self, id: &str) -> Option<&CommentExport> {
        self.comments.iter().find(|c| c.comment_id == id)
    }

    fn expect_phase(&self, phase: Phase, event: &Event) -> Result<(), ExperimentError> {
        if self.phase == phase {
            Ok(())
        } else {
            Err(illegal(format!("{} in phase {}", event.name(), self.phase)))
        }
    }

    pub fn apply(&mut self, event: &Event) -> Result<(), ExperimentError> {
        match event {
            Event::Enrolled { .. } => return Err(illegal("session already enrolled")),
            Event::Consented => {
                self.expect_phase(Phase::Consent, event)?;
                self.phase = Phase::PreSurvey;
            }
            Event::PreSurveySubmitted { response, topic, stance_side, threads, attention_pass, .. } => {
                self.expect_phase(Phase::PreSurvey, event)?;
                self.pre_survey = Some(response.clone());
                self.topic = Some(*topic);
                self.stance_side = Some(*stance_side);
                self.threads = threads.clone();
                self.comments_posted = threads.iter().map(|t| (t.clone(), 0)).collect();
                self.pre_attention_pass = *attention_pass;
                self.phase = Phase::Discussion;
            }
            Event::CommentPosted { comment, request_key } => {
                self.expect_phase(Phase::Discussion, event)?;
                *self
                    .comments_posted
                    .get_mut(&comment.thread_id)
                    .ok_or_else(|| illegal(format!("unknown thread {}", comment.thread_id)))? += 1;
                if let Some(k) = request_key {
                    self.request_keys.insert(format!("comment:{k}"), comment.comment_id.clone());
                }
                self.comments.push(comment.clone());
            }
            Event::FeedbackOffered { comment, request_key } => {
                self.expect_phase(Phase::Discussion, event)?;
                if self.pending_feedback.is_some() {
                    return Err(illegal("feedback already pending"));
                }
                self.pending_feedback = Some(PendingFeedback {
                    comment_id: comment.comment_id.clone(),
                    thread_id: comment.thread_id.clone(),
                    suggestion: comment.suggestion.clone().unwrap_or_default(),
                });
                if let Some(k) = request_key {
                    self.request_keys.insert(format!("comment:{k}"), comment.comment_id.clone());
                }
                self.comments.push(comment.clone());
            }
            Event::FeedbackResolved { comment_id, posted_text, resolution, posted_at, request_key } => {
                let pending = self.pending_feedback.take().ok_or_else(|| illegal("no pending feedback"))?;
                if &pending.comment_id != comment_id {
                    return Err(illegal(format!("resolved {comment_id} but {} is pending", pending.comment_id)));
                }
                let c = self.comment_mut(comment_id).ok_or_else(|| illegal(format!("unknown comment {comment_id}")))?;
                c.posted_text = Some(posted_text.clone());
                c.resolution = *resolution;
                c.posted_at = Some(*posted_at);
                *self.comments_posted.entry(pending.thread_id).or_default() += 1;
                if let Some(k) = request_key {
                    self.request_keys.insert(format!("resolve:{k}"), comment_id.clone());
                }
            }
            Event::AgentReplied { comment } => {
                let target = comment.reply_to.as_deref().and_then(|id| self.comment(id));
                if !target.is_some_and(|t| t.is_posted_participant_comment()) {
                    return Err(illegal("agent reply without a posted participant comment"));
                }
                self.agent_draws += 1;
                self.comments.push(comment.clone());
            }
            Event::Outage { .. } => self.outages += 1,
            Event::AdvancedToPostSurvey => {
                self.expect_phase(Phase::Discussion, event)?;
                self.phase = Phase::PostSurvey;
            }
            Event::PostSurveySubmitted { response, attention_pass, completion_token } => {
                self.expect_phase(Phase::PostSurvey, event)?;
                self.post_survey = Some(response.clone());
                self.attention_pass = *attention_pass;
                self.completion_token = Some(completion_token.clone());
                self.phase = Phase::Complete;
            }
            Event::Abandoned { from } => {
                self.expect_phase(*from, event)?;
                if self.phase == Phase::Complete {
                    return Err(illegal("completed sessions cannot be abandoned"));
                }
                self.phase = Phase::Abandoned;
            }
        }
        Ok(())
    }

    /// Threads still short of `min` posted participant comments.
    pub fn gating_deficits(&self, min: usize) -> Vec<ThreadDeficit> {
        self.threads
            .iter()
            .filter_map(|t| {
                let n = self.comments_posted.get(t).copied().unwrap_or(0);
                (n < min).then(|| ThreadDeficit { thread_id: t.clone(), missing: min - n })
            })
            .collect()
    }

    pub fn triggered_feedback(&self) -> bool {
        self.comments.iter().any(|c| c.feedback_shown)
    }

    /// Comments visible in the feed for `thread`, in posting order.
    pub fn feed(&self, thread: &str) -> impl Iterator<Item = &CommentExport> {
        let thread = thread.to_string();
        self.comments
            .iter()
            .filter(move |c| c.thread_id == thread && c.resolution != Resolution::None && c.posted_text.is_some())
    }

    pub fn participant_comments(&self) -> impl Iterator<Item = &CommentExport> {
        self.comments.iter().filter(|c| c.author_kind == AuthorKind::Participant)
    }
}
