use serde::{Deserialize, Serialize};

use super::lexicon::LexiconConfig;
use super::ClassifyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    RemoteModel,
    LexiconStub,
    RandomBaseline,
    MajorityBaseline,
}

/// Classifier selection and backend parameters. Loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub backend: Backend,
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
    pub temperature: f64,
    pub timeout_secs: f64,
    pub max_retries: u32,
    /// Upper bound on concurrent remote requests.
    pub max_in_flight: usize,
    /// Seed for the random baseline.
    pub seed: u64,
    /// Label probabilities (IH, Neutral, IA) for the random baseline.
    pub distribution: Option<[f64; 3]>,
    pub lexicon: Option<LexiconConfig>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            backend: Backend::LexiconStub,
            endpoint: None,
            model_name: None,
            temperature: 0.0,
            timeout_secs: 30.0,
            max_retries: 2,
            max_in_flight: 8,
            seed: 0,
            distribution: None,
            lexicon: None,
        }
    }
}

impl ClassifierConfig {
    pub fn remote(endpoint: &str, model_name: &str) -> Self {
        ClassifierConfig {
            backend: Backend::RemoteModel,
            endpoint: Some(endpoint.to_string()),
            model_name: Some(model_name.to_string()),
            ..Default::default()
        }
    }

    pub fn with_backend(backend: Backend) -> Self {
        ClassifierConfig { backend, ..Default::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self, ClassifyError> {
        let cfg: ClassifierConfig = toml::from_str(text).map_err(|e| ClassifyError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        if self.backend == Backend::RemoteModel {
            if self.endpoint.as_deref().is_none_or(str::is_empty) {
                return Err(ClassifyError::InvalidConfig("remote_model requires an endpoint".into()));
            }
            if self.model_name.as_deref().is_none_or(str::is_empty) {
                return Err(ClassifyError::InvalidConfig("remote_model requires a model_name".into()));
            }
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(ClassifyError::InvalidConfig("timeout must be positive".into()));
        }
        if self.max_in_flight == 0 {
            return Err(ClassifyError::InvalidConfig("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }

    /// Configured distribution, or uniform.
    pub fn distribution_or_default(&self) -> [f64; 3] {
        self.distribution.unwrap_or([1.0 / 3.0; 3])
    }
}
