//! Bundled prompt and consent assets are embedded byte for byte.

use humility_core::assets::{
    demeanor_prompt, personas, render_classifier_prompt, render_feedback_prompt, CLASSIFIER_PLACEHOLDER,
    CLASSIFIER_PROMPT, CONSENT_TEXT, FEEDBACK_PLACEHOLDER, FEEDBACK_PROMPT,
};
use humility_core::IHLabel;

const ASSETS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/prompts/");

fn on_disk(name: &str) -> String {
    std::fs::read_to_string(format!("{ASSETS}{name}")).unwrap()
}

#[test]
fn embedded_text_matches_files() {
    assert_eq!(CLASSIFIER_PROMPT, on_disk("classifier.txt"));
    assert_eq!(FEEDBACK_PROMPT, on_disk("feedback.txt"));
    assert_eq!(CONSENT_TEXT, on_disk("consent.txt"));
    assert_eq!(demeanor_prompt(IHLabel::IH), on_disk("demeanor_ih.txt"));
    assert_eq!(demeanor_prompt(IHLabel::IA), on_disk("demeanor_ia.txt"));
    assert_eq!(demeanor_prompt(IHLabel::Neutral), on_disk("demeanor_neutral.txt"));
}

#[test]
fn placeholders_appear_once_and_are_substituted() {
    assert_eq!(CLASSIFIER_PROMPT.matches(CLASSIFIER_PLACEHOLDER).count(), 1);
    assert_eq!(FEEDBACK_PROMPT.matches(FEEDBACK_PLACEHOLDER).count(), 1);
    let c = render_classifier_prompt("a $1 {} \\n comment");
    assert_eq!(c, CLASSIFIER_PROMPT.replace(CLASSIFIER_PLACEHOLDER, "a $1 {} \\n comment"));
    let f = render_feedback_prompt("x");
    assert!(!f.contains(FEEDBACK_PLACEHOLDER) && f.len() == FEEDBACK_PROMPT.len() - FEEDBACK_PLACEHOLDER.len() + 1);
}

#[test]
fn classifier_prompt_lists_the_three_labels_last() {
    let tail = CLASSIFIER_PROMPT.trim_end().rsplit("\n\n").nth(1).unwrap();
    assert_eq!(tail, "Valid labels:\nIH, IA, Neutral");
    assert!(!personas().is_empty());
}
