//! Model-backed pieces of a session: the live classifier, the feedback
//! generator and the dialogue agents, each with a deterministic stub.

use std::sync::Arc;
use std::time::Duration;

use humility_core::assets::{demeanor_prompt, render_feedback_prompt, Persona};
use humility_core::classify::{build_classifier, ChatClient, Classifier, ClassifyError};
use humility_core::IHLabel;
use serde::Deserialize;

use crate::config::{ExperimentConfig, GenerationBackend};
use crate::ExperimentError;

pub const AGENT_DECK: &str = include_str!("../assets/agent_deck.toml");

pub trait FeedbackGenerator: Send + Sync {
    /// A rewrite suggestion for a comment that did not pass the gate.
    fn generate(&self, comment: &str) -> Result<String, ClassifyError>;
}

pub trait AgentBackend: Send + Sync {
    /// Reply text for a rendered agent prompt. `index` counts the session's
    /// previous agent replies.
    fn reply(&self, prompt: &str, env_arm: IHLabel, index: u64) -> Result<String, ClassifyError>;

    fn fallback(&self) -> Option<&str> {
        None
    }
}

/// Deterministic suggestion built from the comment itself.
#[derive(Debug, Default, Clone, Copy)]
pub struct StubFeedback;

impl FeedbackGenerator for StubFeedback {
    fn generate(&self, comment: &str) -> Result<String, ClassifyError> {
        let core = comment.trim().trim_end_matches(['.', '!', '?']).trim();
        if core.is_empty() {
            return Err(ClassifyError::EmptyText);
        }
        let mut chars = core.chars();
        let first: String = chars.next().map(|c| c.to_lowercase().collect()).unwrap_or_default();
        Ok(format!(
            "I think {first}{}, though I'm not sure I have the whole picture. What do you see that I might be missing?",
            chars.as_str()
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct AgentDeck {
    pub ih: Vec<String>,
    pub ia: Vec<String>,
    pub neutral: Vec<String>,
    pub fallback: String,
}

impl AgentDeck {
    pub fn bundled() -> Self {
        Self::from_toml(AGENT_DECK).expect("bundled deck is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let deck: AgentDeck = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        if deck.ih.is_empty() || deck.ia.is_empty() || deck.neutral.is_empty() {
            return Err(ExperimentError::Config("agent deck needs at least one line per arm".into()));
        }
        Ok(deck)
    }

    pub fn lines(&self, env: IHLabel) -> &[String] {
        match env {
            IHLabel::IH => &self.ih,
            IHLabel::IA => &self.ia,
            IHLabel::Neutral => &self.neutral,
        }
    }
}

/// Scripted replies: the `index`-th line of the arm's deck, cycling.
#[derive(Debug, Clone)]
pub struct StubAgent {
    deck: AgentDeck,
}

impl StubAgent {
    pub fn new(deck: AgentDeck) -> Self {
        StubAgent { deck }
    }
}

impl Default for StubAgent {
    fn default() -> Self {
        StubAgent::new(AgentDeck::bundled())
    }
}

impl AgentBackend for StubAgent {
    fn reply(&self, _prompt: &str, env_arm: IHLabel, index: u64) -> Result<String, ClassifyError> {
        let lines = self.deck.lines(env_arm);
        Ok(lines[(index % lines.len() as u64) as usize].clone())
    }

    fn fallback(&self) -> Option<&str> {
        Some(&self.deck.fallback)
    }
}

fn chat_client(backend: &GenerationBackend) -> Result<Option<ChatClient>, ClassifyError> {
    match backend {
        GenerationBackend::Stub => Ok(None),
        GenerationBackend::Remote { endpoint, model_name, temperature, timeout_secs } => {
            if timeout_secs.is_nan() || *timeout_secs <= 0.0 {
                return Err(ClassifyError::InvalidConfig("timeout_secs must be positive".into()));
            }
            ChatClient::new(endpoint, model_name, *temperature, Duration::from_secs_f64(*timeout_secs)).map(Some)
        }
    }
}

fn nonempty(reply: String) -> Result<String, ClassifyError> {
    let t = reply.trim();
    if t.is_empty() {
        Err(ClassifyError::InvalidModelReply { reply, attempts: 1 })
    } else {
        Ok(t.to_string())
    }
}

pub struct RemoteFeedback {
    chat: ChatClient,
}

impl RemoteFeedback {
    pub fn new(chat: ChatClient) -> Self {
        RemoteFeedback { chat }
    }
}

impl FeedbackGenerator for RemoteFeedback {
    fn generate(&self, comment: &str) -> Result<String, ClassifyError> {
        nonempty(self.chat.complete(&render_feedback_prompt(comment))?)
    }
}

pub struct RemoteAgent {
    chat: ChatClient,
}

impl RemoteAgent {
    pub fn new(chat: ChatClient) -> Self {
        RemoteAgent { chat }
    }
}

impl AgentBackend for RemoteAgent {
    fn reply(&self, prompt: &str, _env_arm: IHLabel, _index: u64) -> Result<String, ClassifyError> {
        nonempty(self.chat.complete(prompt)?)
    }
}

/// Thread material an agent sees: the seed post and the visible conversation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadContext {
    pub title: String,
    pub author: String,
    pub body: String,
    /// (speaker, text) pairs, oldest first.
    pub history: Vec<(String, String)>,
}

/// Agent prompt: persona profile, task line, arm demeanor, then the thread.
pub fn render_agent_prompt(persona: &Persona, env_arm: IHLabel, ctx: &ThreadContext) -> String {
    let mut out = String::new();
    out.push_str(persona.profile.trim_end());
    out.push_str("\n\n");
    out.push_str(&format!(
        "You are {} replying in an online discussion thread. Write one short reply to the most recent comment.\n\n",
        persona.handle
    ));
    out.push_str(demeanor_prompt(env_arm).trim_end());
    out.push_str("\n\n");
    out.push_str(&format!("Thread: {}\nPost by {}:\n{}\n\nConversation so far:\n", ctx.title, ctx.author, ctx.body));
    for (speaker, text) in &ctx.history {
        out.push_str(&format!("{speaker}: {text}\n"));
    }
    out
}

#[derive(Clone)]
pub struct Backends {
    pub classifier: Arc<dyn Classifier>,
    pub feedback: Arc<dyn FeedbackGenerator>,
    pub agent: Arc<dyn AgentBackend>,
}

impl Backends {
    pub fn stub() -> Self {
        Backends {
            classifier: Arc::new(humility_core::classify::LexiconStub::new(Default::default())),
            feedback: Arc::new(StubFeedback),
            agent: Arc::new(StubAgent::default()),
        }
    }

    /// Builds the configured backends. Remote clients are blocking, so call
    /// this outside an async runtime thread.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, ExperimentError> {
        let classifier: Arc<dyn Classifier> = Arc::from(build_classifier(&cfg.classifier)?);
        let feedback: Arc<dyn FeedbackGenerator> = match chat_client(&cfg.feedback)? {
            None => Arc::new(StubFeedback),
            Some(chat) => Arc::new(RemoteFeedback::new(chat)),
        };
        let agent: Arc<dyn AgentBackend> = match chat_client(&cfg.agent)? {
            None => Arc::new(StubAgent::default()),
            Some(chat) => Arc::new(RemoteAgent::new(chat)),
        };
        Ok(Backends { classifier, feedback, agent })
    }
}
