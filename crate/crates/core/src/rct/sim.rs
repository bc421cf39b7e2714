//! Simulated experiments with known arm effects.
//!
//! Each participant gets a latent mean score from the arm effects plus a
//! normal participant effect, then posts a number of comments whose labels
//! are drawn with P(Neutral) = 0.4 and P(IH) − P(IA) equal to that mean.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::{coded_mean, CueArm, OutcomeRow, StanceSide, IH_ITEMS};
use crate::model::{mean_ih, IHLabel};

const P_NEUTRAL: f64 = 0.4;
// Largest |mean| reachable with P(Neutral) fixed.
const MAX_MEAN: f64 = 1.0 - P_NEUTRAL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RctSimConfig {
    pub seed: u64,
    pub n_participants: usize,
    pub intercept: f64,
    pub cue_effect: f64,
    pub ia_env_effect: f64,
    pub ih_env_effect: f64,
    pub participant_sd: f64,
    pub min_comments: usize,
    pub max_comments: usize,
    /// Probability that a treated participant triggers feedback at least once.
    pub trigger_rate: f64,
    pub attention_fail_rate: f64,
    /// Added to every coded post-survey item of treated participants.
    pub self_report_cue_effect: f64,
}

impl Default for RctSimConfig {
    fn default() -> Self {
        RctSimConfig {
            seed: 0,
            n_participants: 355,
            intercept: 0.0,
            cue_effect: 0.25,
            ia_env_effect: -0.12,
            ih_env_effect: 0.10,
            participant_sd: 0.1,
            min_comments: 4,
            max_comments: 10,
            trigger_rate: 0.9,
            attention_fail_rate: 0.0,
            self_report_cue_effect: 0.0,
        }
    }
}

impl RctSimConfig {
    /// Treated participants demonstrate 0.25 more IH.
    pub fn planted(seed: u64) -> Self {
        RctSimConfig { seed, ..Default::default() }
    }

    /// Outcomes independent of both arms.
    pub fn null(seed: u64) -> Self {
        RctSimConfig { seed, cue_effect: 0.0, ia_env_effect: 0.0, ih_env_effect: 0.0, ..Default::default() }
    }
}

/// One outcome row per simulated participant, arms drawn uniformly and independently.
pub fn simulate_outcomes(cfg: &RctSimConfig) -> Vec<OutcomeRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.participant_sd.max(0.0)).expect("finite participant sd");
    let envs = [IHLabel::IH, IHLabel::Neutral, IHLabel::IA];
    (0..cfg.n_participants)
        .map(|i| {
            let cue_arm = if rng.random_bool(0.5) { CueArm::Treated } else { CueArm::Control };
            let env_arm = envs[rng.random_range(0..3)];
            let group = StanceSide::ALL[rng.random_range(0..StanceSide::ALL.len())];
            let treated = cue_arm == CueArm::Treated;
            let triggered_feedback = treated && rng.random_bool(cfg.trigger_rate.clamp(0.0, 1.0));

            let env_effect = match env_arm {
                IHLabel::IA => cfg.ia_env_effect,
                IHLabel::IH => cfg.ih_env_effect,
                IHLabel::Neutral => 0.0,
            };
            let latent =
                cfg.intercept + if treated { cfg.cue_effect } else { 0.0 } + env_effect + noise.sample(&mut rng);
            let m = latent.clamp(-MAX_MEAN, MAX_MEAN);
            let dist = WeightedIndex::new([(MAX_MEAN - m) / 2.0, P_NEUTRAL, (MAX_MEAN + m) / 2.0])
                .expect("valid label probabilities");
            let n = rng.random_range(cfg.min_comments..=cfg.max_comments.max(cfg.min_comments));
            let labels: Vec<IHLabel> =
                (0..n).map(|_| [IHLabel::IA, IHLabel::Neutral, IHLabel::IH][dist.sample(&mut rng)]).collect();

            let mut pre = [0u8; IH_ITEMS];
            let mut post = [0u8; IH_ITEMS];
            for k in 0..IH_ITEMS {
                pre[k] = rng.random_range(3..=8);
                post[k] = (pre[k] as i32 + rng.random_range(-1..=1)).clamp(1, 10) as u8;
            }
            let shift = if treated { cfg.self_report_cue_effect } else { 0.0 };
            OutcomeRow {
                participant: format!("sim{i:04}"),
                cue_arm,
                env_arm,
                triggered_feedback,
                topic_stance_group: group,
                baseline_ih: coded_mean(&pre),
                demonstrated_ih: if labels.is_empty() { 0.0 } else { mean_ih(&labels).expect("nonempty") },
                self_reported_change: coded_mean(&post) - coded_mean(&pre) + shift,
                n_comments: labels.len(),
                attention_pass: !rng.random_bool(cfg.attention_fail_rate.clamp(0.0, 1.0)),
            }
        })
        .collect()
}
