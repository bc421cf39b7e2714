//! Synthetic comment corpora with a controllable environment effect.
//!
//! Subreddits are split into IH-leaning and IA-leaning halves. Background
//! authors (one comment each) give every subreddit its macro tone. Tracked
//! users comment everywhere, with label probabilities that depend on the
//! subreddit type only as much as configured. Bodies are rendered from
//! templates carrying the lexicon markers, so the lexicon stub recovers the
//! latent labels exactly.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{CommentRecord, IHLabel};

const MS_PER_DAY: i64 = 86_400_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticCorpusConfig {
    pub seed: u64,
    pub n_users: usize,
    pub comments_per_user: usize,
    pub n_subreddits: usize,
    pub threads_per_subreddit: usize,
    pub background_per_subreddit: usize,
    pub days: i64,
    pub start_ms: i64,
    /// Tracked-user label probabilities (IA, Neutral, IH) in IH-leaning subreddits.
    pub user_probs_ih_env: [f64; 3],
    /// Tracked-user label probabilities (IA, Neutral, IH) in IA-leaning subreddits.
    pub user_probs_ia_env: [f64; 3],
    pub background_probs_ih_env: [f64; 3],
    pub background_probs_ia_env: [f64; 3],
    /// Topic phrases; each must contain a keyword known to the topic bucketer.
    pub topics: Vec<String>,
}

impl Default for SyntheticCorpusConfig {
    fn default() -> Self {
        SyntheticCorpusConfig {
            seed: 0,
            n_users: 200,
            comments_per_user: 50,
            n_subreddits: 10,
            threads_per_subreddit: 40,
            background_per_subreddit: 300,
            days: 14,
            start_ms: 1_714_521_600_000,
            user_probs_ih_env: [0.25, 0.4, 0.35],
            user_probs_ia_env: [0.35, 0.4, 0.25],
            background_probs_ih_env: [0.2, 0.4, 0.4],
            background_probs_ia_env: [0.4, 0.4, 0.2],
            topics: ["abortion access", "climate policy", "immigration reform", "the economy"]
                .map(String::from)
                .to_vec(),
        }
    }
}

impl SyntheticCorpusConfig {
    /// Tracked users score 0.2 higher on average in IH-leaning subreddits.
    pub fn planted(seed: u64) -> Self {
        SyntheticCorpusConfig { seed, ..Default::default() }
    }

    /// Tracked users' labels do not depend on the subreddit.
    pub fn null(seed: u64) -> Self {
        SyntheticCorpusConfig {
            seed,
            user_probs_ih_env: [0.3, 0.4, 0.3],
            user_probs_ia_env: [0.3, 0.4, 0.3],
            ..Default::default()
        }
    }
}

const IH_TEMPLATES: &[&str] = &[
    "I think {t} is more complicated than it looks, but I'm not sure.",
    "In my opinion the debate on {t} needs more voices.",
    "What would change your mind about {t}?",
    "I'm not sure where I stand on {t} yet.",
];

const IA_TEMPLATES: &[&str] = &[
    "Only a moron would defend {t}.",
    "Anyone who disagrees about {t} is an idiot.",
    "Everyone knows the truth about {t}.",
    "This will NEVER work, {t} is settled.",
];

const NEUTRAL_TEMPLATES: &[&str] = &[
    "The new report on {t} was released today.",
    "There was a hearing about {t} this week.",
    "The senate scheduled a vote related to {t}.",
];

fn render(label: IHLabel, topic: &str, rng: &mut ChaCha8Rng) -> String {
    let deck = match label {
        IHLabel::IH => IH_TEMPLATES,
        IHLabel::IA => IA_TEMPLATES,
        IHLabel::Neutral => NEUTRAL_TEMPLATES,
    };
    deck[rng.random_range(0..deck.len())].replace("{t}", topic)
}

struct Thread {
    id: String,
    start: i64,
    topic: usize,
}

fn draw_label(dist: &WeightedIndex<f64>, rng: &mut ChaCha8Rng) -> IHLabel {
    [IHLabel::IA, IHLabel::Neutral, IHLabel::IH][dist.sample(rng)]
}

/// Generates an unlabeled corpus (labels are left for a classifier to assign;
/// topics are left for the bucketer).
pub fn synthetic_corpus(cfg: &SyntheticCorpusConfig) -> Vec<CommentRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights = |p: [f64; 3]| WeightedIndex::new(p).expect("valid label probabilities");
    let user_ih = weights(cfg.user_probs_ih_env);
    let user_ia = weights(cfg.user_probs_ia_env);
    let bg_ih = weights(cfg.background_probs_ih_env);
    let bg_ia = weights(cfg.background_probs_ia_env);
    let span = cfg.days.max(1) * MS_PER_DAY;

    let subs: Vec<(String, bool)> =
        (0..cfg.n_subreddits).map(|s| (format!("sub{s:02}"), s < cfg.n_subreddits / 2)).collect();
    let threads: Vec<Vec<Thread>> = subs
        .iter()
        .enumerate()
        .map(|(s, _)| {
            (0..cfg.threads_per_subreddit)
                .map(|t| Thread {
                    id: format!("t3_{s:02}{t:04}"),
                    start: cfg.start_ms + rng.random_range(0..span),
                    topic: rng.random_range(0..cfg.topics.len()),
                })
                .collect()
        })
        .collect();

    let mut out = Vec::with_capacity(cfg.n_users * cfg.comments_per_user + subs.len() * cfg.background_per_subreddit);
    let mut push = |rng: &mut ChaCha8Rng, author: String, s: usize, dist: &WeightedIndex<f64>| {
        let th = &threads[s][rng.random_range(0..threads[s].len())];
        let label = draw_label(dist, rng);
        let created_at = th.start + rng.random_range(0..2 * MS_PER_DAY);
        let body = render(label, &cfg.topics[th.topic], rng);
        let id = format!("c{:07}", out.len());
        out.push(CommentRecord {
            id,
            author,
            thread_id: th.id.clone(),
            subreddit: Some(subs[s].0.clone()),
            created_at,
            body,
            label: None,
            topic: None,
        });
    };
    for (s, (_, ih_leaning)) in subs.iter().enumerate() {
        let dist = if *ih_leaning { &bg_ih } else { &bg_ia };
        for k in 0..cfg.background_per_subreddit {
            push(&mut rng, format!("bg{s:02}_{k:05}"), s, dist);
        }
    }
    for u in 0..cfg.n_users {
        for _ in 0..cfg.comments_per_user {
            let s = rng.random_range(0..subs.len());
            let dist = if subs[s].1 { &user_ih } else { &user_ia };
            push(&mut rng, format!("user{u:04}"), s, dist);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::lexicon_stub_classify;
    use crate::corpus::TopicBucketer;

    #[test]
    fn templates_round_trip_through_stub_and_bucketer() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bucketer = TopicBucketer::default();
        for topic in &SyntheticCorpusConfig::default().topics {
            for label in IHLabel::ALL {
                for _ in 0..20 {
                    let body = render(label, topic, &mut rng);
                    assert_eq!(lexicon_stub_classify(&body), label, "{body}");
                    assert_ne!(bucketer.assign(&body), "other", "{body}");
                }
            }
        }
    }

    #[test]
    fn sizes_and_determinism() {
        let cfg = SyntheticCorpusConfig {
            n_users: 10,
            comments_per_user: 5,
            background_per_subreddit: 3,
            ..Default::default()
        };
        let a = synthetic_corpus(&cfg);
        assert_eq!(a.len(), 10 * 5 + 10 * 3);
        assert_eq!(a, synthetic_corpus(&cfg));
    }
}
