//! The session registry. Commands for one session run one at a time under
//! that session's lock; events are appended to the log before state changes.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, PoisonError, RwLock};

use humility_core::rct::{AuthorKind, ExperimentBundle, StanceSide, Topic};
use serde::Serialize;

use crate::backends::Backends;
use crate::clock::{Clock, SystemClock};
use crate::config::ExperimentConfig;
use crate::content::ContentPack;
use crate::engine::{Command, CommentReply, Engine, FeedbackChoice, PreSurveyReply, Reply};
use crate::events::{Event, EventRecord};
use crate::export::export_bundle;
use crate::session::{Assignment, Phase, SessionState, ThreadDeficit};
use crate::store::EventStore;
use crate::survey::SurveyResponse;
use crate::ExperimentError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnrollReply {
    pub session_id: String,
    pub assignment: Assignment,
    pub phase: Phase,
    /// False when the external id was already enrolled.
    pub created: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeedComment {
    pub comment_id: String,
    pub author: String,
    pub author_kind: AuthorKind,
    pub text: String,
    pub reply_to: Option<String>,
    pub posted_at: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreadView {
    pub thread_id: String,
    pub side: Option<StanceSide>,
    pub author: String,
    pub title: String,
    pub body: String,
    pub posted: usize,
    pub comments: Vec<FeedComment>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PendingView {
    pub comment_id: String,
    pub thread_id: String,
    pub intended_text: String,
    pub suggestion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeedView {
    pub session_id: String,
    pub phase: Phase,
    pub topic: Option<Topic>,
    pub min_comments_per_thread: usize,
    pub threads: Vec<ThreadView>,
    pub pending: Option<PendingView>,
    pub deficits: Vec<ThreadDeficit>,
}

#[derive(Default)]
struct Enrollment {
    count: u64,
    by_external: HashMap<String, String>,
}

pub struct ExperimentService {
    engine: Engine,
    store: Mutex<EventStore>,
    sessions: RwLock<HashMap<String, Arc<Mutex<SessionState>>>>,
    enrollment: Mutex<Enrollment>,
    since_snapshot: AtomicU64,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(PoisonError::into_inner)
}

fn unexpected(reply: Reply) -> ExperimentError {
    ExperimentError::IllegalState(format!("unexpected reply {reply:?}"))
}

impl ExperimentService {
    /// Builds the service from configuration: content pack, backends, and
    /// the event log (replayed if it already has records).
    pub fn new(cfg: ExperimentConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let content = match &cfg.content_pack {
            Some(p) => ContentPack::load(p)?,
            None => ContentPack::sample(),
        };
        let backends = Backends::from_config(&cfg)?;
        let store = match &cfg.store_dir {
            Some(d) => EventStore::open(d, cfg.fsync)?,
            None => EventStore::in_memory(),
        };
        Self::with_parts(cfg, content, backends, Arc::new(SystemClock), store)
    }

    pub fn with_parts(
        cfg: ExperimentConfig,
        content: ContentPack,
        backends: Backends,
        clock: Arc<dyn Clock>,
        store: EventStore,
    ) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        content.validate()?;
        let snap = store.restore()?;
        let mut enrollment = Enrollment::default();
        let mut sessions = HashMap::new();
        for (id, s) in snap.sessions {
            enrollment.count = enrollment.count.max(s.assignment.seed_trace + 1);
            enrollment.by_external.insert(s.assignment.external_id.clone(), id.clone());
            sessions.insert(id, Arc::new(Mutex::new(s)));
        }
        if !sessions.is_empty() {
            tracing::info!(sessions = sessions.len(), events = store.last_seq(), "restored from event log");
        }
        Ok(ExperimentService {
            engine: Engine::new(cfg, content, backends, clock),
            store: Mutex::new(store),
            sessions: RwLock::new(sessions),
            enrollment: Mutex::new(enrollment),
            since_snapshot: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.engine.cfg
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    fn append(&self, session: &str, events: &[Event]) -> Result<(), ExperimentError> {
        if events.is_empty() {
            return Ok(());
        }
        let mut store = lock(&self.store);
        store.append(session, self.engine.clock.now_ms(), events)?;
        let every = self.engine.cfg.snapshot_every;
        let n = self.since_snapshot.fetch_add(events.len() as u64, Ordering::SeqCst) + events.len() as u64;
        if every > 0 && n >= every {
            self.since_snapshot.store(0, Ordering::SeqCst);
            if let Err(e) = store.write_snapshot() {
                tracing::warn!(error = %e, "snapshot failed; the event log remains authoritative");
            }
        }
        Ok(())
    }

    /// Enrolls `external_id`, or returns its existing assignment.
    pub fn enroll(&self, external_id: &str) -> Result<EnrollReply, ExperimentError> {
        if external_id.trim().is_empty() {
            return Err(ExperimentError::Validation("external_id is empty".into()));
        }
        let mut en = lock(&self.enrollment);
        if let Some(id) = en.by_external.get(external_id) {
            let s = self.session(id)?;
            return Ok(EnrollReply {
                session_id: id.clone(),
                assignment: s.assignment,
                phase: s.phase,
                created: false,
            });
        }
        let assignment = self.engine.assign(en.count, external_id, self.engine.clock.now_ms());
        let id = assignment.participant_id.clone();
        self.append(&id, &[Event::Enrolled { assignment: assignment.clone() }])?;
        en.count += 1;
        en.by_external.insert(external_id.to_string(), id.clone());
        self.sessions
            .write()
            .unwrap_or_else(PoisonError::into_inner)
            .insert(id.clone(), Arc::new(Mutex::new(SessionState::new(assignment.clone()))));
        tracing::debug!(session = %id, cue = %assignment.cue_arm, env = %assignment.env_arm, "enrolled");
        Ok(EnrollReply { session_id: id, assignment, phase: Phase::Consent, created: true })
    }

    fn cell(&self, id: &str) -> Result<Arc<Mutex<SessionState>>, ExperimentError> {
        self.sessions
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .get(id)
            .cloned()
            .ok_or_else(|| ExperimentError::NotFound(format!("session {id}")))
    }

    /// Runs one command against a session.
    pub fn execute(&self, id: &str, cmd: Command) -> Result<Reply, ExperimentError> {
        let cell = self.cell(id)?;
        let mut state = lock(&cell);
        let (events, reply) = self.engine.decide(&state, cmd)?;
        self.append(id, &events)?;
        for e in &events {
            state.apply(e)?;
        }
        Ok(reply)
    }

    pub fn consent(&self, id: &str) -> Result<Phase, ExperimentError> {
        match self.execute(id, Command::Consent)? {
            Reply::Phase { phase } => Ok(phase),
            r => Err(unexpected(r)),
        }
    }

    pub fn submit_pre_survey(&self, id: &str, response: SurveyResponse) -> Result<PreSurveyReply, ExperimentError> {
        match self.execute(id, Command::PreSurvey(response))? {
            Reply::PreSurvey(r) => Ok(r),
            r => Err(unexpected(r)),
        }
    }

    pub fn submit_comment(
        &self,
        id: &str,
        thread: &str,
        text: &str,
        request_key: Option<String>,
    ) -> Result<CommentReply, ExperimentError> {
        let cmd = Command::Comment { thread: thread.to_string(), text: text.to_string(), request_key };
        match self.execute(id, cmd)? {
            Reply::Comment(r) => Ok(r),
            r => Err(unexpected(r)),
        }
    }

    pub fn resolve_feedback(
        &self,
        id: &str,
        choice: FeedbackChoice,
        request_key: Option<String>,
    ) -> Result<CommentReply, ExperimentError> {
        match self.execute(id, Command::Resolve { choice, request_key })? {
            Reply::Comment(r) => Ok(r),
            r => Err(unexpected(r)),
        }
    }

    pub fn advance(&self, id: &str) -> Result<Phase, ExperimentError> {
        match self.execute(id, Command::Advance)? {
            Reply::Phase { phase } => Ok(phase),
            r => Err(unexpected(r)),
        }
    }

    /// Returns the completion token.
    pub fn submit_post_survey(&self, id: &str, response: SurveyResponse) -> Result<String, ExperimentError> {
        match self.execute(id, Command::PostSurvey(response))? {
            Reply::Completed { completion_token, .. } => Ok(completion_token),
            r => Err(unexpected(r)),
        }
    }

    pub fn abandon(&self, id: &str) -> Result<Phase, ExperimentError> {
        match self.execute(id, Command::Abandon)? {
            Reply::Phase { phase } => Ok(phase),
            r => Err(unexpected(r)),
        }
    }

    pub fn session(&self, id: &str) -> Result<SessionState, ExperimentError> {
        let cell = self.cell(id)?;
        let state = lock(&cell).clone();
        Ok(state)
    }

    pub fn feed(&self, id: &str) -> Result<FeedView, ExperimentError> {
        let s = self.session(id)?;
        let min = self.engine.cfg.min_comments_per_thread;
        let threads = s
            .threads
            .iter()
            .map(|t| {
                let post = self.engine.content.post(t);
                ThreadView {
                    thread_id: t.clone(),
                    side: post.map(|p| p.side),
                    author: post.map(|p| p.author.clone()).unwrap_or_default(),
                    title: post.map(|p| p.title.clone()).unwrap_or_default(),
                    body: post.map(|p| p.body.clone()).unwrap_or_default(),
                    posted: s.comments_posted.get(t).copied().unwrap_or(0),
                    comments: s
                        .feed(t)
                        .map(|c| FeedComment {
                            comment_id: c.comment_id.clone(),
                            author: match c.author_kind {
                                AuthorKind::Participant => "you".to_string(),
                                AuthorKind::Agent => c.persona.clone().unwrap_or_default(),
                            },
                            author_kind: c.author_kind,
                            text: c.posted_text.clone().unwrap_or_default(),
                            reply_to: c.reply_to.clone(),
                            posted_at: c.posted_at,
                        })
                        .collect(),
                }
            })
            .collect();
        let pending = s.pending_feedback.as_ref().map(|p| PendingView {
            comment_id: p.comment_id.clone(),
            thread_id: p.thread_id.clone(),
            intended_text: s.comment(&p.comment_id).map(|c| c.intended_text.clone()).unwrap_or_default(),
            suggestion: p.suggestion.clone(),
        });
        Ok(FeedView {
            session_id: id.to_string(),
            phase: s.phase,
            topic: s.topic,
            min_comments_per_thread: min,
            deficits: if s.phase == Phase::Discussion { s.gating_deficits(min) } else { Vec::new() },
            threads,
            pending,
        })
    }

    pub fn states(&self) -> Vec<SessionState> {
        let cells: Vec<_> = self.sessions.read().unwrap_or_else(PoisonError::into_inner).values().cloned().collect();
        cells.iter().map(|c| lock(c).clone()).collect()
    }

    pub fn export(&self) -> ExperimentBundle {
        export_bundle(&self.states())
    }

    pub fn export_to_dir(&self, dir: &Path) -> Result<(), ExperimentError> {
        Ok(self.export().write_dir(dir)?)
    }

    pub fn records(&self) -> Vec<EventRecord> {
        lock(&self.store).records().to_vec()
    }

    pub fn write_snapshot(&self) -> Result<(), ExperimentError> {
        lock(&self.store).write_snapshot()?;
        Ok(())
    }
}
