//! Bundled prompt texts, persona profiles and consent copy.
//!
//! Prompt files are stored byte-for-byte; rendering only substitutes the
//! placeholder token.

use serde::Deserialize;

use crate::model::IHLabel;

pub const CLASSIFIER_PROMPT: &str = include_str!("../assets/prompts/classifier.txt");
pub const CLASSIFIER_PLACEHOLDER: &str = "{Comment to Label}";

pub const FEEDBACK_PROMPT: &str = include_str!("../assets/prompts/feedback.txt");
pub const FEEDBACK_PLACEHOLDER: &str = "{Participant Comment}";

pub const DEMEANOR_IH: &str = include_str!("../assets/prompts/demeanor_ih.txt");
pub const DEMEANOR_IA: &str = include_str!("../assets/prompts/demeanor_ia.txt");
pub const DEMEANOR_NEUTRAL: &str = include_str!("../assets/prompts/demeanor_neutral.txt");

pub const CONSENT_TEXT: &str = include_str!("../assets/prompts/consent.txt");

const PERSONAS_TOML: &str = include_str!("../assets/personas.toml");

pub fn render_classifier_prompt(comment: &str) -> String {
    CLASSIFIER_PROMPT.replacen(CLASSIFIER_PLACEHOLDER, comment, 1)
}

pub fn render_feedback_prompt(comment: &str) -> String {
    FEEDBACK_PROMPT.replacen(FEEDBACK_PLACEHOLDER, comment, 1)
}

/// Demeanor instruction for agents in the given environment arm.
pub fn demeanor_prompt(env: IHLabel) -> &'static str {
    match env {
        IHLabel::IH => DEMEANOR_IH,
        IHLabel::IA => DEMEANOR_IA,
        IHLabel::Neutral => DEMEANOR_NEUTRAL,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Persona {
    pub handle: String,
    pub profile: String,
}

#[derive(Deserialize)]
struct PersonaFile {
    persona: Vec<Persona>,
}

/// The ten dialogue-agent personas, in publication order.
pub fn personas() -> Vec<Persona> {
    let file: PersonaFile = toml::from_str(PERSONAS_TOML).expect("bundled personas are valid");
    file.persona
}
