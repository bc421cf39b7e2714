//! The social-cue gate, feedback resolution and backend outages.

mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use common::*;
use humility_core::classify::{Classifier, ClassifyError};
use humility_core::rct::{CueArm, Resolution, StanceSide, Topic};
use humility_core::IHLabel;
use humility_experiment::{
    AgentBackend, Backends, CommentReply, Event, EventStore, ExperimentConfig, ExperimentService, FeedbackChoice,
    FeedbackGenerator, StubAgent,
};

/// Enrolls until the wanted cue arm comes up, then opens the discussion.
fn session_in(svc: &ExperimentService, cue: CueArm) -> (String, Vec<String>) {
    for i in 0.. {
        let e = svc.enroll(&format!("p{i}")).unwrap();
        if e.assignment.cue_arm == cue {
            svc.consent(&e.session_id).unwrap();
            let pre = svc.submit_pre_survey(&e.session_id, survey([9, 6, 3], [5, 5, 5])).unwrap();
            return (e.session_id, pre.threads.into_iter().map(|p| p.id).collect());
        }
    }
    unreachable!()
}

#[test]
fn treated_humble_comment_posts_directly() {
    let svc = service(ExperimentConfig::default());
    let (id, t) = session_in(&svc, CueArm::Treated);
    match svc.submit_comment(&id, &t[0], "I think this matters, but I'm not sure of the numbers.", None).unwrap() {
        CommentReply::Posted { comment, agent_reply } => {
            assert!(!comment.feedback_shown);
            assert_eq!(comment.live_label, Some(IHLabel::IH));
            assert_eq!(comment.resolution, Resolution::AutoPosted);
            assert!(agent_reply.is_some());
        }
        r => panic!("{r:?}"),
    }
}

#[test]
fn treated_arrogant_comment_is_held_with_a_suggestion() {
    let svc = service(ExperimentConfig::default());
    let (id, t) = session_in(&svc, CueArm::Treated);
    let CommentReply::Feedback { comment_id, suggestion } =
        svc.submit_comment(&id, &t[0], "You are a moron.", None).unwrap()
    else {
        panic!()
    };
    assert!(!suggestion.is_empty());
    let feed = svc.feed(&id).unwrap();
    assert!(feed.threads[0].comments.is_empty());
    assert_eq!(feed.pending.as_ref().unwrap().comment_id, comment_id);
    assert_eq!(feed.pending.unwrap().intended_text, "You are a moron.");
    assert!(svc.submit_comment(&id, &t[1], IH_TEXT, None).is_err());

    let CommentReply::Posted { comment, .. } = svc.resolve_feedback(&id, FeedbackChoice::Original, None).unwrap()
    else {
        panic!()
    };
    assert_eq!(comment.posted_text.as_deref(), Some("You are a moron."));
    assert_eq!(comment.resolution, Resolution::PostedOriginal);
    let feed = svc.feed(&id).unwrap();
    assert_eq!(feed.threads[0].comments.len(), 2);
    assert!(feed.pending.is_none());
    assert!(svc.submit_comment(&id, &t[0], IH_TEXT, None).is_ok());
}

#[test]
fn control_arrogant_comment_posts_without_feedback() {
    let svc = service(ExperimentConfig::default());
    let (id, t) = session_in(&svc, CueArm::Control);
    let CommentReply::Posted { comment, .. } = svc.submit_comment(&id, &t[0], "You are a moron.", None).unwrap() else {
        panic!()
    };
    assert!(!comment.feedback_shown && comment.live_label.is_none());
    assert!(!svc.records().iter().any(|r| matches!(r.event, Event::FeedbackOffered { .. })));
}

#[test]
fn pre_survey_examples() {
    let svc = service(ExperimentConfig::default());
    let id = svc.enroll("a").unwrap().session_id;
    svc.consent(&id).unwrap();
    let r = svc.submit_pre_survey(&id, survey([9, 6, 3], [1, 1, 1])).unwrap();
    assert_eq!((r.topic, r.stance_side, r.thread_side), (Topic::Abortion, StanceSide::ProLife, StanceSide::ProChoice));

    let id = svc.enroll("b").unwrap().session_id;
    svc.consent(&id).unwrap();
    let r = svc.submit_pre_survey(&id, survey([5, 6, 5], [2, 9, 2])).unwrap();
    assert_eq!(r.topic, Topic::Climate);
    assert!(!r.tie_broken_randomly);

    let id = svc.enroll("c").unwrap().session_id;
    svc.consent(&id).unwrap();
    let r = svc.submit_pre_survey(&id, survey([5, 5, 10], [5, 5, 5])).unwrap();
    assert_eq!((r.topic, r.stance_side), (Topic::Immigration, StanceSide::Stricter));
    assert!(r.threads.iter().all(|p| p.side == StanceSide::Looser));

    let id = svc.enroll("d").unwrap().session_id;
    svc.consent(&id).unwrap();
    let mut bad = survey([5, 5, 10], [5, 5, 5]);
    bad.ih_items[6] = None;
    let err = svc.submit_pre_survey(&id, bad).unwrap_err();
    assert!(err.to_string().contains("ih_7"), "{err}");
}

struct Down;

impl Classifier for Down {
    fn classify(&self, _: &str) -> Result<IHLabel, ClassifyError> {
        Err(ClassifyError::Unavailable("connection refused".into()))
    }
    fn name(&self) -> String {
        "down".into()
    }
}

impl FeedbackGenerator for Down {
    fn generate(&self, _: &str) -> Result<String, ClassifyError> {
        Err(ClassifyError::Unavailable("timeout".into()))
    }
}

struct Flaky {
    fail_first: usize,
    calls: AtomicUsize,
    inner: StubAgent,
}

impl AgentBackend for Flaky {
    fn reply(&self, prompt: &str, env: IHLabel, index: u64) -> Result<String, ClassifyError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) < self.fail_first {
            Err(ClassifyError::Unavailable("503".into()))
        } else {
            self.inner.reply(prompt, env, index)
        }
    }
}

#[test]
fn classifier_outage_fails_open() {
    let backends = Backends { classifier: Arc::new(Down), ..Backends::stub() };
    let svc = service_with(ExperimentConfig::default(), backends, EventStore::in_memory());
    let (id, t) = session_in(&svc, CueArm::Treated);
    let CommentReply::Posted { comment, .. } = svc.submit_comment(&id, &t[0], "You are a moron.", None).unwrap() else {
        panic!()
    };
    assert!(comment.outage && !comment.feedback_shown && comment.live_label.is_none());
    assert!(svc.records().iter().any(|r| matches!(&r.event, Event::Outage { backend, .. } if backend == "classifier")));
}

#[test]
fn feedback_generator_outage_fails_open() {
    let backends = Backends { feedback: Arc::new(Down), ..Backends::stub() };
    let svc = service_with(ExperimentConfig::default(), backends, EventStore::in_memory());
    let (id, t) = session_in(&svc, CueArm::Treated);
    let CommentReply::Posted { comment, .. } = svc.submit_comment(&id, &t[0], "You are a moron.", None).unwrap() else {
        panic!()
    };
    assert!(comment.outage && !comment.feedback_shown);
    assert_eq!(comment.live_label, Some(IHLabel::IA));
}

#[test]
fn agent_outage_retries_then_posts_the_fallback() {
    let flaky = Arc::new(Flaky { fail_first: 2, calls: AtomicUsize::new(0), inner: StubAgent::default() });
    let backends = Backends { agent: flaky.clone(), ..Backends::stub() };
    let svc = service_with(ExperimentConfig::default(), backends, EventStore::in_memory());
    let (id, t) = session_in(&svc, CueArm::Control);
    let CommentReply::Posted { agent_reply, .. } = svc.submit_comment(&id, &t[0], IH_TEXT, None).unwrap() else {
        panic!()
    };
    let reply = agent_reply.unwrap();
    assert!(!reply.outage, "third attempt succeeds with two retries");
    assert_eq!(flaky.calls.load(Ordering::SeqCst), 3);

    let dead = Arc::new(Flaky { fail_first: usize::MAX, calls: AtomicUsize::new(0), inner: StubAgent::default() });
    let cfg = ExperimentConfig { agent_fallback: Some("Interesting point.".into()), ..Default::default() };
    let svc = service_with(cfg, Backends { agent: dead, ..Backends::stub() }, EventStore::in_memory());
    let (id, t) = session_in(&svc, CueArm::Control);
    let CommentReply::Posted { agent_reply, .. } = svc.submit_comment(&id, &t[0], IH_TEXT, None).unwrap() else {
        panic!()
    };
    let reply = agent_reply.unwrap();
    assert!(reply.outage);
    assert_eq!(reply.posted_text.as_deref(), Some("Interesting point."));
}

#[test]
fn stub_agent_follows_the_deck_for_the_arm() {
    let cfg = ExperimentConfig { env_arms: vec![IHLabel::IA], ..Default::default() };
    let svc = service(cfg);
    let (id, t) = session_in(&svc, CueArm::Control);
    let deck = humility_experiment::AgentDeck::bundled();
    for i in 0..3 {
        let CommentReply::Posted { agent_reply, .. } = svc.submit_comment(&id, &t[0], IH_TEXT, None).unwrap() else {
            panic!()
        };
        let reply = agent_reply.unwrap();
        assert_eq!(reply.posted_text.as_ref().unwrap(), &deck.ia[i]);
        let handle = reply.persona.unwrap();
        assert!(humility_core::assets::personas().iter().any(|p| p.handle == handle));
    }
}
