//! Keyword-bucket topic assignment for corpora without a topic column.

use serde::{Deserialize, Serialize};

use crate::model::CommentRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicBucketer {
    /// (topic, keywords) in priority order.
    pub buckets: Vec<(String, Vec<String>)>,
    pub fallback: String,
}

impl Default for TopicBucketer {
    fn default() -> Self {
        let b = |t: &str, ks: &[&str]| (t.to_string(), ks.iter().map(|k| k.to_string()).collect());
        TopicBucketer {
            buckets: vec![
                b("abortion", &["abortion", "roe", "pro-life", "pro-choice"]),
                b("climate", &["climate", "emissions", "carbon", "warming"]),
                b("immigration", &["immigration", "border", "asylum", "migrants"]),
                b("guns", &["gun", "guns", "firearm", "second amendment"]),
                b("economy", &["economy", "inflation", "taxes", "jobs", "tariffs"]),
                b("elections", &["election", "ballot", "voting", "candidate", "primary"]),
            ],
            fallback: "other".into(),
        }
    }
}

impl TopicBucketer {
    /// First bucket with a keyword occurring as a whole word (case-insensitive).
    pub fn assign(&self, text: &str) -> &str {
        let lower = format!(" {} ", text.to_lowercase().replace(|c: char| !c.is_alphanumeric() && c != '-', " "));
        for (topic, keywords) in &self.buckets {
            if keywords.iter().any(|k| lower.contains(&format!(" {} ", k.to_lowercase()))) {
                return topic;
            }
        }
        &self.fallback
    }

    /// Fills `topic` on records that lack one.
    pub fn fill(&self, records: &mut [CommentRecord]) {
        for r in records.iter_mut().filter(|r| r.topic.is_none()) {
            r.topic = Some(self.assign(&r.body).to_string());
        }
    }
}
