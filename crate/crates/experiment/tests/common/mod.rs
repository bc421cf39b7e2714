#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use humility_core::rct::Topic;
use humility_experiment::{
    Backends, ContentPack, EventStore, ExperimentConfig, ExperimentService, StepClock, SurveyResponse, TopicItems,
};

pub const IH_TEXT: &str = "I think that is fair, though I'm not sure it holds everywhere.";
pub const IA_TEXT: &str = "Only a moron would believe that.";
pub const NEUTRAL_TEXT: &str = "The bill was introduced in March.";

pub fn clock() -> Arc<StepClock> {
    Arc::new(StepClock::new(1_700_000_000_000, 1_000))
}

pub fn service_with(cfg: ExperimentConfig, backends: Backends, store: EventStore) -> ExperimentService {
    ExperimentService::with_parts(cfg, ContentPack::sample(), backends, clock(), store).unwrap()
}

pub fn service(cfg: ExperimentConfig) -> ExperimentService {
    service_with(cfg, Backends::stub(), EventStore::in_memory())
}

pub fn survey(stances: [u8; 3], interests: [u8; 3]) -> SurveyResponse {
    let topics: BTreeMap<Topic, TopicItems> = Topic::ALL
        .iter()
        .enumerate()
        .map(|(i, t)| (*t, TopicItems { interest: interests[i], stance: stances[i] }))
        .collect();
    let mut attention = BTreeMap::new();
    attention.insert("select_7".to_string(), 7);
    attention.insert("select_2".to_string(), 2);
    SurveyResponse { ih_items: (1..=8).map(Some).collect(), topics, attention, demographics: BTreeMap::new() }
}

pub fn post_survey() -> SurveyResponse {
    let mut r = survey([5, 5, 5], [5, 5, 5]);
    r.topics.clear();
    r.ih_items = vec![Some(7); 8];
    r.demographics.insert("age_band".into(), "25-34".into());
    r
}
