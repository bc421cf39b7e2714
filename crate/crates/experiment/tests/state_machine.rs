//! Exhaustive enumeration of API call sequences up to 12 calls against the
//! session engine, checking the gating and feed invariants in every state.

mod common;

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use common::*;
use humility_core::rct::{AuthorKind, CueArm, Resolution};
use humility_core::IHLabel;
use humility_experiment::{
    Backends, Command, ContentPack, Engine, Event, ExperimentConfig, ExperimentError, FeedbackChoice, Phase,
    SessionState, StepClock,
};

const DEPTH: usize = 12;

fn alphabet(threads: &[String]) -> Vec<Command> {
    let t = |i: usize| threads.get(i).cloned().unwrap_or_else(|| "missing".into());
    let comment = |i: usize, text: &str| Command::Comment { thread: t(i), text: text.into(), request_key: None };
    vec![
        Command::Consent,
        Command::PreSurvey(survey([9, 6, 3], [5, 5, 5])),
        comment(0, IH_TEXT),
        comment(0, IA_TEXT),
        comment(1, IH_TEXT),
        comment(1, NEUTRAL_TEXT),
        Command::Resolve { choice: FeedbackChoice::Original, request_key: None },
        Command::Resolve { choice: FeedbackChoice::Revised { text: IH_TEXT.into() }, request_key: None },
        Command::Advance,
        Command::PostSurvey(post_survey()),
        Command::Abandon,
    ]
}

fn key(s: &SessionState) -> (Phase, Vec<usize>, bool) {
    let counts = s.threads.iter().map(|t| s.comments_posted[t].min(3)).collect();
    (s.phase, counts, s.pending_feedback.is_some())
}

fn check(s: &SessionState, min: usize, log: &[Event]) {
    if matches!(s.phase, Phase::PostSurvey | Phase::Complete) {
        assert_eq!(s.threads.len(), 2);
        for t in &s.threads {
            assert!(s.comments_posted[t] >= min, "reached {} with {:?}", s.phase, s.comments_posted);
        }
    }
    for c in &s.comments {
        match c.author_kind {
            AuthorKind::Agent => {
                let target = s.comment(c.reply_to.as_deref().unwrap()).expect("reply target exists");
                assert!(target.is_posted_participant_comment());
            }
            AuthorKind::Participant => {
                assert_eq!(c.resolution == Resolution::None, c.posted_text.is_none());
                let shown = matches!(c.live_label, Some(IHLabel::IA | IHLabel::Neutral)) && !c.outage;
                match s.assignment.cue_arm {
                    CueArm::Control => {
                        assert!(!c.feedback_shown);
                        assert_eq!(c.resolution, Resolution::AutoPosted);
                    }
                    CueArm::Treated => assert_eq!(c.feedback_shown, shown),
                }
            }
        }
    }
    // strict alternation: each posted participant comment has exactly one agent reply
    for c in s.comments.iter().filter(|c| c.is_posted_participant_comment()) {
        let n = s.comments.iter().filter(|a| a.reply_to.as_deref() == Some(c.comment_id.as_str())).count();
        assert_eq!(n, 1);
    }
    if s.assignment.cue_arm == CueArm::Control {
        assert!(!log.iter().any(|e| matches!(e, Event::FeedbackOffered { .. })));
    }
}

fn explore(cue: CueArm) -> (usize, usize, bool) {
    let engine = Engine::new(
        ExperimentConfig::default(),
        ContentPack::sample(),
        Backends::stub(),
        Arc::new(StepClock::new(0, 0)),
    );
    let mut a = engine.assign(0, "p", 0);
    a.cue_arm = cue;
    let root = SessionState::new(a);
    let mut seen = HashSet::new();
    seen.insert(key(&root));
    let mut queue = VecDeque::from([(root, Vec::<Event>::new(), 0usize)]);
    let (mut calls, mut rejected, mut completed) = (0, 0, false);
    while let Some((state, log, depth)) = queue.pop_front() {
        if depth == DEPTH {
            continue;
        }
        for cmd in alphabet(&state.threads) {
            calls += 1;
            let was = state.phase;
            match engine.decide(&state, cmd.clone()) {
                Ok((events, _)) => {
                    let mut next = state.clone();
                    for e in &events {
                        next.apply(e).unwrap();
                    }
                    let mut log = log.clone();
                    log.extend(events);
                    check(&next, engine.cfg.min_comments_per_thread, &log);
                    completed |= next.phase == Phase::Complete;
                    if seen.insert(key(&next)) {
                        queue.push_back((next, log, depth + 1));
                    }
                }
                Err(e) => {
                    rejected += 1;
                    if matches!(cmd, Command::Advance | Command::PostSurvey(_)) && was == Phase::Discussion {
                        assert!(
                            matches!(
                                e,
                                ExperimentError::IllegalTransition { .. } | ExperimentError::MustResolveFeedback { .. }
                            ),
                            "{e}"
                        );
                    }
                }
            }
        }
    }
    (calls, rejected, completed)
}

#[test]
fn no_trace_reaches_post_survey_below_the_comment_minimum_treated() {
    let (calls, rejected, completed) = explore(CueArm::Treated);
    assert!(completed);
    assert!(calls > 100 && rejected > 0, "{calls} {rejected}");
}

#[test]
fn no_trace_reaches_post_survey_below_the_comment_minimum_control() {
    let (_, _, completed) = explore(CueArm::Control);
    assert!(completed);
}

#[test]
fn deficits_are_listed_per_thread() {
    let svc = service(ExperimentConfig::default());
    let id = svc.enroll("p").unwrap().session_id;
    svc.consent(&id).unwrap();
    let pre = svc.submit_pre_survey(&id, survey([9, 6, 3], [5, 5, 5])).unwrap();
    let (t0, t1) = (pre.threads[0].id.clone(), pre.threads[1].id.clone());
    for t in [&t0, &t0, &t1] {
        let r = svc.submit_comment(&id, t, IH_TEXT, None).unwrap();
        assert!(matches!(r, humility_experiment::CommentReply::Posted { .. }));
    }
    match svc.submit_post_survey(&id, post_survey()).unwrap_err() {
        ExperimentError::IllegalTransition { from, deficits, .. } => {
            assert_eq!(from, Phase::Discussion);
            assert_eq!(deficits.len(), 1);
            assert_eq!((deficits[0].thread_id.as_str(), deficits[0].missing), (t1.as_str(), 1));
        }
        e => panic!("{e}"),
    }
    assert!(svc.advance(&id).is_err());
    svc.submit_comment(&id, &t1, IH_TEXT, None).unwrap();
    let token = svc.submit_post_survey(&id, post_survey()).unwrap();
    assert_eq!(token.len(), 16);
    assert_eq!(svc.session(&id).unwrap().phase, Phase::Complete);
    assert!(svc.abandon(&id).is_err());
}

#[test]
fn wrong_phase_and_missing_feedback_errors() {
    let svc = service(ExperimentConfig::default());
    let id = svc.enroll("p").unwrap().session_id;
    assert!(matches!(
        svc.submit_pre_survey(&id, survey([9, 6, 3], [5, 5, 5])),
        Err(ExperimentError::IllegalTransition { from: Phase::Consent, .. })
    ));
    svc.consent(&id).unwrap();
    assert!(matches!(svc.resolve_feedback(&id, FeedbackChoice::Original, None), Err(ExperimentError::IllegalState(_))));
    assert!(matches!(svc.consent(&id), Err(ExperimentError::IllegalTransition { .. })));
    assert_eq!(svc.abandon(&id).unwrap(), Phase::Abandoned);
    assert_eq!(svc.abandon(&id).unwrap(), Phase::Abandoned);
}
