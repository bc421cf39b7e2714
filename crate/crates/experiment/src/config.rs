use std::path::PathBuf;

use humility_core::classify::ClassifierConfig;
use humility_core::rct::CueArm;
use humility_core::IHLabel;
use serde::{Deserialize, Serialize};

use crate::ExperimentError;

/// Text-generation backend for feedback suggestions or agent replies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenerationBackend {
    Stub,
    Remote {
        endpoint: String,
        model_name: String,
        #[serde(default = "default_temperature")]
        temperature: f64,
        #[serde(default = "default_timeout")]
        timeout_secs: f64,
    },
}

fn default_temperature() -> f64 {
    0.7
}

fn default_timeout() -> f64 {
    30.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurveyStageSel {
    Pre,
    Post,
    Both,
}

/// Instructed-response item, e.g. "select 7".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionCheck {
    pub name: String,
    pub stage: SurveyStageSel,
    pub expected: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Arms available to randomization; disabling one pins every participant to the other.
    pub cue_arms: Vec<CueArm>,
    pub env_arms: Vec<IHLabel>,
    /// Permuted blocks over all enabled cells instead of simple randomization.
    pub blocked_randomization: bool,
    pub min_comments_per_thread: usize,
    pub classifier: ClassifierConfig,
    pub feedback: GenerationBackend,
    pub agent: GenerationBackend,
    /// Extra attempts after a failed agent call before the fallback line is posted.
    pub agent_retries: u32,
    pub agent_fallback: Option<String>,
    /// Seed-post pack; the bundled sample pack when unset.
    pub content_pack: Option<PathBuf>,
    /// Event-log directory; in-memory only when unset.
    pub store_dir: Option<PathBuf>,
    /// Write a snapshot after this many events (0 disables periodic snapshots).
    pub snapshot_every: u64,
    pub fsync: bool,
    pub attention_checks: Vec<AttentionCheck>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            cue_arms: vec![CueArm::Treated, CueArm::Control],
            env_arms: vec![IHLabel::IH, IHLabel::Neutral, IHLabel::IA],
            blocked_randomization: false,
            min_comments_per_thread: 2,
            classifier: ClassifierConfig::default(),
            feedback: GenerationBackend::Stub,
            agent: GenerationBackend::Stub,
            agent_retries: 2,
            agent_fallback: None,
            content_pack: None,
            store_dir: None,
            snapshot_every: 500,
            fsync: false,
            attention_checks: vec![
                AttentionCheck { name: "select_7".into(), stage: SurveyStageSel::Pre, expected: 7 },
                AttentionCheck { name: "select_2".into(), stage: SurveyStageSel::Post, expected: 2 },
            ],
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.cue_arms.is_empty() || self.env_arms.is_empty() {
            return Err(ExperimentError::Config("at least one cue arm and one environment arm must be enabled".into()));
        }
        let mut seen = Vec::new();
        for a in &self.cue_arms {
            if seen.contains(a) {
                return Err(ExperimentError::Config(format!("cue arm {a} listed twice")));
            }
            seen.push(*a);
        }
        let mut seen = Vec::new();
        for a in &self.env_arms {
            if seen.contains(a) {
                return Err(ExperimentError::Config(format!("environment arm {a} listed twice")));
            }
            seen.push(*a);
        }
        if self.min_comments_per_thread == 0 {
            return Err(ExperimentError::Config("min_comments_per_thread must be at least 1".into()));
        }
        self.classifier.validate()?;
        Ok(())
    }

    /// Randomization cells in a fixed order: cue arms outer, environment arms inner.
    pub fn cells(&self) -> Vec<(CueArm, IHLabel)> {
        self.cue_arms.iter().flat_map(|&c| self.env_arms.iter().map(move |&e| (c, e))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_defaults() {
        let cfg = ExperimentConfig::from_toml(
            r#"
seed = 9
env_arms = ["IH", "IA"]
[agent]
kind = "remote"
endpoint = "http://localhost:1/v1/chat/completions"
model_name = "m"
"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.cells().len(), 4);
        assert!(matches!(cfg.agent, GenerationBackend::Remote { temperature, .. } if temperature == 0.7));
        assert_eq!(cfg.feedback, GenerationBackend::Stub);
        assert_eq!(cfg.attention_checks.len(), 2);
    }

    #[test]
    fn rejects_bad_arms() {
        assert!(ExperimentConfig::from_toml("cue_arms = []").is_err());
        assert!(ExperimentConfig::from_toml("env_arms = [\"IH\", \"IH\"]").is_err());
    }
}
