//! Deterministic marker-based classifier used as an offline test double.

use serde::{Deserialize, Serialize};

use super::{check_text, Classifier, ClassifyError};
use crate::model::IHLabel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LexiconConfig {
    /// Case-insensitive words or phrases signalling arrogance.
    pub arrogance: Vec<String>,
    /// Absolutes that count only when written in capitals.
    pub caps_absolutes: Vec<String>,
    /// Case-insensitive words or phrases signalling humility.
    pub humility: Vec<String>,
    /// A question sentence starting with one of these counts as humble.
    pub interrogatives: Vec<String>,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        LexiconConfig {
            arrogance: v(&["idiot", "moron", "everyone knows"]),
            caps_absolutes: v(&["NEVER", "ALWAYS"]),
            humility: v(&["i think", "i'm not sure", "in my opinion"]),
            interrogatives: v(&["who", "what", "when", "where", "why", "how", "which"]),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LexiconStub {
    config: LexiconConfig,
}

// Lowercase, fold curly apostrophes, keep letters/digits/apostrophes, and pad
// with spaces so phrase matching respects word boundaries.
fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push(' ');
    let mut last_space = true;
    for ch in text.chars() {
        let ch = if ch == '\u{2019}' || ch == '\u{2018}' { '\'' } else { ch };
        if ch.is_alphanumeric() || ch == '\'' {
            out.extend(ch.to_lowercase());
            last_space = false;
        } else if !last_space {
            out.push(' ');
            last_space = true;
        }
    }
    if !last_space {
        out.push(' ');
    }
    out
}

fn contains_phrase(normalized: &str, phrase: &str) -> bool {
    let p = normalize(phrase);
    !p.trim().is_empty() && normalized.contains(&p)
}

impl LexiconStub {
    pub fn new(config: LexiconConfig) -> Self {
        LexiconStub { config }
    }

    fn is_arrogant(&self, text: &str, normalized: &str) -> bool {
        if self.config.arrogance.iter().any(|m| contains_phrase(normalized, m)) {
            return true;
        }
        text.split(|c: char| !c.is_alphanumeric()).any(|tok| self.config.caps_absolutes.iter().any(|m| m == tok))
    }

    fn is_humble(&self, text: &str, normalized: &str) -> bool {
        if self.config.humility.iter().any(|m| contains_phrase(normalized, m)) {
            return true;
        }
        // Sentences end at . ! or ?
        let mut start = 0;
        for (i, ch) in text.char_indices() {
            if matches!(ch, '.' | '!' | '?') {
                let sentence = &text[start..i];
                start = i + ch.len_utf8();
                if ch != '?' {
                    continue;
                }
                let first = sentence
                    .split(|c: char| !c.is_alphanumeric() && c != '\'')
                    .find(|w| !w.is_empty())
                    .map(str::to_lowercase);
                if let Some(w) = first {
                    if self.config.interrogatives.iter().any(|q| q.eq_ignore_ascii_case(&w)) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// IA markers take precedence over IH markers; no marker means Neutral.
    pub fn label(&self, text: &str) -> IHLabel {
        let normalized = normalize(text);
        if self.is_arrogant(text, &normalized) {
            IHLabel::IA
        } else if self.is_humble(text, &normalized) {
            IHLabel::IH
        } else {
            IHLabel::Neutral
        }
    }
}

impl Default for LexiconStub {
    fn default() -> Self {
        LexiconStub::new(LexiconConfig::default())
    }
}

impl Classifier for LexiconStub {
    fn classify(&self, text: &str) -> Result<IHLabel, ClassifyError> {
        check_text(text)?;
        Ok(self.label(text))
    }

    fn name(&self) -> String {
        "lexicon_stub".into()
    }
}

/// Convenience wrapper over the default lexicon.
pub fn lexicon_stub_classify(text: &str) -> IHLabel {
    LexiconStub::default().label(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marker_rules() {
        assert_eq!(lexicon_stub_classify("You are an idiot."), IHLabel::IA);
        assert_eq!(lexicon_stub_classify("I think this could work, but I'm not sure."), IHLabel::IH);
        assert_eq!(lexicon_stub_classify("The bill passed yesterday."), IHLabel::Neutral);
    }

    #[test]
    fn arrogance_wins_over_humility() {
        assert_eq!(lexicon_stub_classify("I think you are a moron."), IHLabel::IA);
    }

    #[test]
    fn caps_rule_is_case_sensitive() {
        assert_eq!(lexicon_stub_classify("That will NEVER happen."), IHLabel::IA);
        assert_eq!(lexicon_stub_classify("I never said that."), IHLabel::Neutral);
    }

    #[test]
    fn word_boundaries_and_apostrophes() {
        assert_eq!(lexicon_stub_classify("Idiotic policy."), IHLabel::Neutral);
        assert_eq!(lexicon_stub_classify("I\u{2019}m not sure about the numbers"), IHLabel::IH);
        assert_eq!(lexicon_stub_classify("EVERYONE KNOWS that"), IHLabel::IA);
    }

    #[test]
    fn interrogative_questions() {
        assert_eq!(lexicon_stub_classify("Taxes went up. Why would that help?"), IHLabel::IH);
        assert_eq!(lexicon_stub_classify("Really?"), IHLabel::Neutral);
        assert_eq!(lexicon_stub_classify("Why not. It is fine."), IHLabel::Neutral);
    }

    #[test]
    fn empty_text_rejected() {
        assert!(matches!(LexiconStub::default().classify("  "), Err(ClassifyError::EmptyText)));
    }
}
