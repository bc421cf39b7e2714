//! Chat-completion backend.
//!
//! Wire format: POST `{"model", "messages": [{"role": "user", "content"}],
//! "temperature"}`; the reply text is read from `choices[0].message.content`.

use std::time::Duration;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;

use super::{check_text, Classifier, ClassifierConfig, ClassifyError};
use crate::assets::render_classifier_prompt;
use crate::model::IHLabel;

/// Environment variable holding the bearer token for the model endpoint.
pub const API_KEY_ENV: &str = "HUMILITY_LAB_MODEL_KEY";

/// Minimal blocking chat-completion client.
#[derive(Debug, Clone)]
pub struct ChatClient {
    http: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    temperature: f64,
    api_key: Option<String>,
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: String,
}

impl ChatClient {
    pub fn new(endpoint: &str, model: &str, temperature: f64, timeout: Duration) -> Result<Self, ClassifyError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ClassifyError::InvalidConfig(e.to_string()))?;
        Ok(ChatClient {
            http,
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            temperature,
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
        })
    }

    pub fn with_api_key(mut self, key: Option<String>) -> Self {
        self.api_key = key;
        self
    }

    /// JSON body sent for `prompt`.
    pub fn request_body(&self, prompt: &str) -> serde_json::Value {
        json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        })
    }

    /// One request. Transport failures and non-2xx statuses are `Unavailable`;
    /// a 2xx body without reply text is an `InvalidModelReply`.
    pub fn complete(&self, prompt: &str) -> Result<String, ClassifyError> {
        let mut req = self.http.post(&self.endpoint).json(&self.request_body(prompt));
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| ClassifyError::Unavailable(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(ClassifyError::Unavailable(format!("endpoint returned {status}")));
        }
        let text = resp.text().map_err(|e| ClassifyError::Unavailable(e.to_string()))?;
        serde_json::from_str::<Completion>(&text)
            .ok()
            .and_then(|c| c.choices.into_iter().next())
            .map(|c| c.message.content)
            .ok_or(ClassifyError::InvalidModelReply { reply: text, attempts: 1 })
    }
}

/// Trims whitespace and punctuation, case-folds, and maps to a label.
pub fn canonicalize_reply(reply: &str) -> Option<IHLabel> {
    let t = reply
        .trim_matches(|c: char| c.is_whitespace() || c.is_ascii_punctuation() || matches!(c, '\u{2018}'..='\u{201d}'))
        .to_lowercase();
    match t.as_str() {
        "ih" => Some(IHLabel::IH),
        "ia" => Some(IHLabel::IA),
        "neutral" => Some(IHLabel::Neutral),
        _ => None,
    }
}

/// Zero-shot classifier over a chat model using the bundled prompt.
#[derive(Debug)]
pub struct RemoteClassifier {
    chat: ChatClient,
    max_retries: u32,
    pool: rayon::ThreadPool,
}

impl RemoteClassifier {
    pub fn new(chat: ChatClient, max_retries: u32, max_in_flight: usize) -> Result<Self, ClassifyError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(max_in_flight.max(1))
            .thread_name(|i| format!("classify-{i}"))
            .build()
            .map_err(|e| ClassifyError::InvalidConfig(e.to_string()))?;
        Ok(RemoteClassifier { chat, max_retries, pool })
    }

    pub fn from_config(config: &ClassifierConfig) -> Result<Self, ClassifyError> {
        config.validate()?;
        let chat = ChatClient::new(
            config.endpoint.as_deref().unwrap_or_default(),
            config.model_name.as_deref().unwrap_or_default(),
            config.temperature,
            Duration::from_secs_f64(config.timeout_secs),
        )?;
        Self::new(chat, config.max_retries, config.max_in_flight)
    }

    pub fn chat(&self) -> &ChatClient {
        &self.chat
    }
}

impl Classifier for RemoteClassifier {
    fn classify(&self, text: &str) -> Result<IHLabel, ClassifyError> {
        check_text(text)?;
        let prompt = render_classifier_prompt(text);
        let attempts = self.max_retries + 1;
        let mut last = ClassifyError::Unavailable("no attempt made".into());
        for attempt in 1..=attempts {
            match self.chat.complete(&prompt) {
                Ok(reply) => match canonicalize_reply(&reply) {
                    Some(label) => return Ok(label),
                    None => {
                        tracing::warn!(attempt, reply = %reply, "unusable model reply");
                        last = ClassifyError::InvalidModelReply { reply, attempts };
                    }
                },
                Err(ClassifyError::InvalidModelReply { reply, .. }) => {
                    last = ClassifyError::InvalidModelReply { reply, attempts };
                }
                Err(e) => {
                    tracing::warn!(attempt, error = %e, "model request failed");
                    last = e;
                }
            }
        }
        Err(last)
    }

    fn classify_batch(&self, texts: &[&str]) -> Vec<Result<IHLabel, ClassifyError>> {
        self.pool.install(|| texts.par_iter().map(|t| self.classify(t)).collect())
    }

    fn name(&self) -> String {
        format!("remote_model:{}", self.chat.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalization() {
        assert_eq!(canonicalize_reply("IH"), Some(IHLabel::IH));
        assert_eq!(canonicalize_reply("  ia.\n"), Some(IHLabel::IA));
        assert_eq!(canonicalize_reply("\"Neutral\""), Some(IHLabel::Neutral));
        assert_eq!(canonicalize_reply("**NEUTRAL**"), Some(IHLabel::Neutral));
        assert_eq!(canonicalize_reply("IH because it is humble"), None);
        assert_eq!(canonicalize_reply(""), None);
        assert_eq!(canonicalize_reply("I H"), None);
    }

    #[test]
    fn request_shape() {
        let c = ChatClient::new("http://127.0.0.1:9/x", "m1", 0.0, Duration::from_secs(1)).unwrap();
        let body = c.request_body("hello");
        assert_eq!(body["model"], "m1");
        assert_eq!(body["messages"][0]["role"], "user");
        assert_eq!(body["messages"][0]["content"], "hello");
        assert_eq!(body["temperature"], 0.0);
    }

    #[test]
    fn unreachable_endpoint_is_unavailable() {
        let chat = ChatClient::new("http://127.0.0.1:9/x", "m", 0.0, Duration::from_millis(300)).unwrap();
        let c = RemoteClassifier::new(chat, 1, 1).unwrap();
        assert!(matches!(c.classify("some text"), Err(ClassifyError::Unavailable(_))));
    }
}
