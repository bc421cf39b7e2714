//! Command handling. `Engine::decide` turns a command and the current session
//! state into the events to append plus the reply, without touching either.

use std::sync::Arc;

use humility_core::assets::{personas, Persona};
use humility_core::rct::{AuthorKind, CommentExport, CueArm, Resolution, StanceSide, SurveyStage, Topic};
use humility_core::IHLabel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backends::{render_agent_prompt, Backends, ThreadContext};
use crate::clock::Clock;
use crate::config::ExperimentConfig;
use crate::content::{ContentPack, SeedPost};
use crate::events::Event;
use crate::session::{Assignment, Phase, SessionState};
use crate::survey::{assign_topic, attention_passed, SurveyResponse};
use crate::ExperimentError;

pub const DEFAULT_FALLBACK: &str = "Thanks for sharing your comment.";

/// Independent deterministic stream for one purpose, keyed by the service
/// seed and up to two integers (typically the enrollment ordinal and a counter).
pub fn rng_for(seed: u64, purpose: &str, a: u64, b: u64) -> ChaCha8Rng {
    // FNV-1a over the purpose tag
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in purpose.bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&h.to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "choice", rename_all = "snake_case")]
pub enum FeedbackChoice {
    Original,
    Revised { text: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Consent,
    PreSurvey(SurveyResponse),
    Comment { thread: String, text: String, request_key: Option<String> },
    Resolve { choice: FeedbackChoice, request_key: Option<String> },
    Advance,
    PostSurvey(SurveyResponse),
    Abandon,
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CommentReply {
    Posted { comment: CommentExport, agent_reply: Option<CommentExport> },
    Feedback { comment_id: String, suggestion: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreSurveyReply {
    pub topic: Topic,
    pub stance_side: StanceSide,
    /// The side argued by the seeded threads.
    pub thread_side: StanceSide,
    pub threads: Vec<SeedPost>,
    pub tie_broken_randomly: bool,
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Reply {
    Phase { phase: Phase },
    PreSurvey(PreSurveyReply),
    Comment(CommentReply),
    Completed { phase: Phase, completion_token: String },
}

pub struct Engine {
    pub cfg: ExperimentConfig,
    pub content: ContentPack,
    pub backends: Backends,
    pub personas: Vec<Persona>,
    pub clock: Arc<dyn Clock>,
}

fn wrong_phase(state: &SessionState, action: &str) -> ExperimentError {
    ExperimentError::IllegalTransition { from: state.phase, action: action.to_string(), deficits: Vec::new() }
}

fn session_rng(cfg: &ExperimentConfig, state: &SessionState, purpose: &str, b: u64) -> ChaCha8Rng {
    rng_for(cfg.seed, purpose, state.assignment.seed_trace, b)
}

impl Engine {
    pub fn new(cfg: ExperimentConfig, content: ContentPack, backends: Backends, clock: Arc<dyn Clock>) -> Self {
        Engine { cfg, content, backends, personas: personas(), clock }
    }

    /// Arm assignment for the `ordinal`-th enrollment.
    pub fn assign(&self, ordinal: u64, external_id: &str, assigned_at: i64) -> Assignment {
        let seed = self.cfg.seed;
        let (cue_arm, env_arm) = if self.cfg.blocked_randomization {
            let cells = self.cfg.cells();
            let n = cells.len() as u64;
            let mut order = cells.clone();
            order.shuffle(&mut rng_for(seed, "block", ordinal / n, 0));
            order[(ordinal % n) as usize]
        } else {
            let mut rng = rng_for(seed, "arms", ordinal, 0);
            let cue: CueArm = self.cfg.cue_arms[rng.random_range(0..self.cfg.cue_arms.len())];
            let env: IHLabel = self.cfg.env_arms[rng.random_range(0..self.cfg.env_arms.len())];
            (cue, env)
        };
        let token: u128 = rng_for(seed, "session", ordinal, 0).random();
        Assignment {
            participant_id: format!("{token:032x}"),
            external_id: external_id.to_string(),
            cue_arm,
            env_arm,
            assigned_at,
            seed_trace: ordinal,
        }
    }

    pub fn decide(&self, state: &SessionState, cmd: Command) -> Result<(Vec<Event>, Reply), ExperimentError> {
        let (events, comment_id) = self.plan(state, &cmd)?;
        let mut next = state.clone();
        for e in &events {
            next.apply(e)?;
        }
        let reply = match &cmd {
            Command::Consent | Command::Advance | Command::Abandon => Reply::Phase { phase: next.phase },
            Command::PreSurvey(_) => Reply::PreSurvey(self.pre_survey_reply(&next, &events)),
            Command::Comment { .. } | Command::Resolve { .. } => {
                let id = comment_id.expect("comment commands name their comment");
                Reply::Comment(comment_reply(&next, &id)?)
            }
            Command::PostSurvey(_) => Reply::Completed {
                phase: next.phase,
                completion_token: next.completion_token.clone().unwrap_or_default(),
            },
        };
        Ok((events, reply))
    }

    fn pre_survey_reply(&self, state: &SessionState, events: &[Event]) -> PreSurveyReply {
        let side = state.stance_side.expect("set by the pre-survey");
        let tie = events.iter().any(|e| matches!(e, Event::PreSurveySubmitted { tie_broken_randomly: true, .. }));
        PreSurveyReply {
            topic: side.topic(),
            stance_side: side,
            thread_side: side.opposite(),
            threads: state.threads.iter().filter_map(|t| self.content.post(t).cloned()).collect(),
            tie_broken_randomly: tie,
        }
    }

    fn plan(&self, state: &SessionState, cmd: &Command) -> Result<(Vec<Event>, Option<String>), ExperimentError> {
        let now = self.clock.now_ms();
        match cmd {
            Command::Consent => {
                if state.phase != Phase::Consent {
                    return Err(wrong_phase(state, "consent"));
                }
                Ok((vec![Event::Consented], None))
            }
            Command::PreSurvey(response) => {
                if state.phase != Phase::PreSurvey {
                    return Err(wrong_phase(state, "submit the pre-survey"));
                }
                response.validate(SurveyStage::Pre)?;
                let (topic, tie) = assign_topic(&response.topics, &mut session_rng(&self.cfg, state, "topic", 0))?;
                let stance_side = topic.side_for(response.topics[&topic].stance);
                let threads = self.content.threads_for(stance_side.opposite()).iter().map(|p| p.id.clone()).collect();
                let attention_pass =
                    attention_passed(&self.cfg.attention_checks, SurveyStage::Pre, &response.attention);
                Ok((
                    vec![Event::PreSurveySubmitted {
                        response: response.clone(),
                        topic,
                        stance_side,
                        threads,
                        tie_broken_randomly: tie,
                        attention_pass,
                    }],
                    None,
                ))
            }
            Command::Comment { thread, text, request_key } => {
                if let Some(id) = request_key.as_ref().and_then(|k| state.request_keys.get(&format!("comment:{k}"))) {
                    return Ok((Vec::new(), Some(id.clone())));
                }
                if state.phase != Phase::Discussion {
                    return Err(wrong_phase(state, "comment"));
                }
                if !state.threads.contains(thread) {
                    return Err(ExperimentError::NotFound(format!("thread {thread}")));
                }
                if let Some(p) = &state.pending_feedback {
                    return Err(ExperimentError::MustResolveFeedback { comment_id: p.comment_id.clone() });
                }
                if text.trim().is_empty() {
                    return Err(ExperimentError::Validation("comment text is empty".into()));
                }
                self.plan_comment(state, thread, text, request_key.clone(), now)
            }
            Command::Resolve { choice, request_key } => {
                if let Some(id) = request_key.as_ref().and_then(|k| state.request_keys.get(&format!("resolve:{k}"))) {
                    return Ok((Vec::new(), Some(id.clone())));
                }
                let pending = state
                    .pending_feedback
                    .as_ref()
                    .ok_or_else(|| ExperimentError::IllegalState("no feedback is pending".into()))?;
                let target = state.comment(&pending.comment_id).expect("pending comment is recorded");
                let (posted_text, resolution) = match choice {
                    FeedbackChoice::Original => (target.intended_text.clone(), Resolution::PostedOriginal),
                    FeedbackChoice::Revised { text } if text.trim().is_empty() => {
                        return Err(ExperimentError::Validation("revised text is empty".into()))
                    }
                    FeedbackChoice::Revised { text } => (text.clone(), Resolution::PostedRevised),
                };
                let mut posted = target.clone();
                posted.posted_text = Some(posted_text.clone());
                posted.resolution = resolution;
                posted.posted_at = Some(now);
                let mut events = vec![Event::FeedbackResolved {
                    comment_id: posted.comment_id.clone(),
                    posted_text,
                    resolution,
                    posted_at: now,
                    request_key: request_key.clone(),
                }];
                self.agent_reply(state, &posted, state.comments.len() + 1, now, &mut events);
                Ok((events, Some(posted.comment_id)))
            }
            Command::Advance => {
                if state.phase != Phase::Discussion {
                    return Err(wrong_phase(state, "advance to the post-survey"));
                }
                self.check_gate(state, "advance to the post-survey")?;
                Ok((vec![Event::AdvancedToPostSurvey], None))
            }
            Command::PostSurvey(response) => {
                let mut events = Vec::new();
                match state.phase {
                    Phase::PostSurvey => {}
                    Phase::Discussion => {
                        self.check_gate(state, "submit the post-survey")?;
                        events.push(Event::AdvancedToPostSurvey);
                    }
                    _ => return Err(wrong_phase(state, "submit the post-survey")),
                }
                response.validate(SurveyStage::Post)?;
                let post_pass = attention_passed(&self.cfg.attention_checks, SurveyStage::Post, &response.attention);
                let token: u64 = session_rng(&self.cfg, state, "completion", 0).random();
                events.push(Event::PostSurveySubmitted {
                    response: response.clone(),
                    attention_pass: state.pre_attention_pass && post_pass,
                    completion_token: format!("{token:016X}"),
                });
                Ok((events, None))
            }
            Command::Abandon => match state.phase {
                Phase::Complete => Err(wrong_phase(state, "abandon")),
                Phase::Abandoned => Ok((Vec::new(), None)),
                from => Ok((vec![Event::Abandoned { from }], None)),
            },
        }
    }

    fn check_gate(&self, state: &SessionState, action: &str) -> Result<(), ExperimentError> {
        if let Some(p) = &state.pending_feedback {
            return Err(ExperimentError::MustResolveFeedback { comment_id: p.comment_id.clone() });
        }
        let deficits = state.gating_deficits(self.cfg.min_comments_per_thread);
        if deficits.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::IllegalTransition { from: state.phase, action: action.to_string(), deficits })
        }
    }

    fn plan_comment(
        &self,
        state: &SessionState,
        thread: &str,
        text: &str,
        request_key: Option<String>,
        now: i64,
    ) -> Result<(Vec<Event>, Option<String>), ExperimentError> {
        let id = format!("{}-{}", state.id(), state.comments.len() + 1);
        let mut comment = CommentExport {
            comment_id: id.clone(),
            participant_id: state.id().to_string(),
            thread_id: thread.to_string(),
            author_kind: AuthorKind::Participant,
            persona: None,
            reply_to: None,
            intended_text: text.to_string(),
            posted_text: Some(text.to_string()),
            live_label: None,
            feedback_shown: false,
            suggestion: None,
            resolution: Resolution::AutoPosted,
            outage: false,
            created_at: now,
            posted_at: Some(now),
        };
        let mut events = Vec::new();
        if state.assignment.cue_arm == CueArm::Treated {
            match self.backends.classifier.classify(text) {
                Ok(IHLabel::IH) => comment.live_label = Some(IHLabel::IH),
                Ok(label) => {
                    comment.live_label = Some(label);
                    match self.backends.feedback.generate(text) {
                        Ok(suggestion) => {
                            comment.posted_text = None;
                            comment.posted_at = None;
                            comment.resolution = Resolution::None;
                            comment.feedback_shown = true;
                            comment.suggestion = Some(suggestion);
                            events.push(Event::FeedbackOffered { comment, request_key });
                            return Ok((events, Some(id)));
                        }
                        Err(e) => {
                            tracing::warn!(session = state.id(), error = %e, "feedback generator outage, posting unreviewed");
                            comment.outage = true;
                            events.push(Event::Outage {
                                backend: "feedback".into(),
                                detail: e.to_string(),
                                comment_id: Some(id.clone()),
                            });
                        }
                    }
                }
                Err(e) => {
                    tracing::warn!(session = state.id(), error = %e, "classifier outage, posting unreviewed");
                    comment.outage = true;
                    events.push(Event::Outage {
                        backend: "classifier".into(),
                        detail: e.to_string(),
                        comment_id: Some(id.clone()),
                    });
                }
            }
        }
        let next_index = state.comments.len() + 2;
        events.push(Event::CommentPosted { comment: comment.clone(), request_key });
        self.agent_reply(state, &comment, next_index, now, &mut events);
        Ok((events, Some(id)))
    }

    /// Context the agent sees for a reply to `target`.
    pub fn thread_context(&self, state: &SessionState, target: &CommentExport) -> ThreadContext {
        let post = self.content.post(&target.thread_id);
        let mut history: Vec<(String, String)> = state
            .feed(&target.thread_id)
            .filter(|c| c.comment_id != target.comment_id)
            .map(|c| (speaker(c), c.posted_text.clone().unwrap_or_default()))
            .collect();
        history.push((speaker(target), target.posted_text.clone().unwrap_or_default()));
        ThreadContext {
            title: post.map(|p| p.title.clone()).unwrap_or_default(),
            author: post.map(|p| p.author.clone()).unwrap_or_default(),
            body: post.map(|p| p.body.clone()).unwrap_or_default(),
            history,
        }
    }

    /// Persona index for the session's `draw`-th agent reply.
    pub fn persona_draw(&self, seed_trace: u64, draw: u64) -> usize {
        rng_for(self.cfg.seed, "persona", seed_trace, draw).random_range(0..self.personas.len())
    }

    fn agent_reply(
        &self,
        state: &SessionState,
        target: &CommentExport,
        ordinal: usize,
        now: i64,
        events: &mut Vec<Event>,
    ) {
        let env = state.assignment.env_arm;
        let draw = state.agent_draws;
        let persona = &self.personas[self.persona_draw(state.assignment.seed_trace, draw)];
        let prompt = render_agent_prompt(persona, env, &self.thread_context(state, target));
        let attempts = self.cfg.agent_retries + 1;
        let mut last_err = None;
        let mut text = None;
        for attempt in 1..=attempts {
            match self.backends.agent.reply(&prompt, env, draw) {
                Ok(t) => {
                    text = Some(t);
                    break;
                }
                Err(e) => {
                    tracing::warn!(session = state.id(), attempt, error = %e, "agent backend failed");
                    last_err = Some(e);
                }
            }
        }
        let outage = text.is_none();
        let text = text.unwrap_or_else(|| {
            self.cfg
                .agent_fallback
                .clone()
                .or_else(|| self.backends.agent.fallback().map(str::to_string))
                .unwrap_or_else(|| DEFAULT_FALLBACK.to_string())
        });
        if let Some(e) = last_err.filter(|_| outage) {
            events.push(Event::Outage {
                backend: "agent".into(),
                detail: e.to_string(),
                comment_id: Some(target.comment_id.clone()),
            });
        }
        events.push(Event::AgentReplied {
            comment: CommentExport {
                comment_id: format!("{}-{}", state.id(), ordinal),
                participant_id: state.id().to_string(),
                thread_id: target.thread_id.clone(),
                author_kind: AuthorKind::Agent,
                persona: Some(persona.handle.clone()),
                reply_to: Some(target.comment_id.clone()),
                intended_text: text.clone(),
                posted_text: Some(text),
                live_label: None,
                feedback_shown: false,
                suggestion: None,
                resolution: Resolution::AutoPosted,
                outage,
                created_at: now,
                posted_at: Some(now),
            },
        });
    }
}

fn speaker(c: &CommentExport) -> String {
    match c.author_kind {
        AuthorKind::Participant => "Participant".to_string(),
        AuthorKind::Agent => c.persona.clone().unwrap_or_else(|| "Agent".to_string()),
    }
}

/// The reply for a comment command, rebuilt from state so retried requests
/// see the same answer.
pub fn comment_reply(state: &SessionState, comment_id: &str) -> Result<CommentReply, ExperimentError> {
    let c = state.comment(comment_id).ok_or_else(|| ExperimentError::NotFound(format!("comment {comment_id}")))?;
    if c.resolution == Resolution::None {
        return Ok(CommentReply::Feedback {
            comment_id: c.comment_id.clone(),
            suggestion: c.suggestion.clone().unwrap_or_default(),
        });
    }
    let agent_reply = state.comments.iter().find(|a| a.reply_to.as_deref() == Some(comment_id)).cloned();
    Ok(CommentReply::Posted { comment: c.clone(), agent_reply })
}
