//! Survey payloads, validation and topic assignment.

use std::collections::BTreeMap;

use humility_core::rct::{
    ih_item_key, interest_key, stance_key, SurveyItemExport, SurveyStage, Topic, IH_ITEMS, SCALE_MAX, SCALE_MIN,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{AttentionCheck, SurveyStageSel};
use crate::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicItems {
    pub interest: u8,
    pub stance: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurveyResponse {
    /// The eight IH items in order; `null` marks an unanswered item.
    pub ih_items: Vec<Option<u8>>,
    pub topics: BTreeMap<Topic, TopicItems>,
    pub attention: BTreeMap<String, i64>,
    pub demographics: BTreeMap<String, String>,
}

fn in_scale(v: u8) -> bool {
    (SCALE_MIN..=SCALE_MAX).contains(&v)
}

impl SurveyResponse {
    /// Checks the response for `stage` and returns the IH items.
    pub fn validate(&self, stage: SurveyStage) -> Result<[u8; IH_ITEMS], ExperimentError> {
        if self.ih_items.len() > IH_ITEMS {
            return Err(ExperimentError::Validation(format!(
                "expected {IH_ITEMS} IH items, got {}",
                self.ih_items.len()
            )));
        }
        let mut items = [0u8; IH_ITEMS];
        for (i, slot) in items.iter_mut().enumerate() {
            let key = ih_item_key(i + 1);
            match self.ih_items.get(i).copied().flatten() {
                None => return Err(ExperimentError::Validation(format!("item {key} missing"))),
                Some(v) if !in_scale(v) => {
                    return Err(ExperimentError::Validation(format!(
                        "item {key} = {v} outside {SCALE_MIN}..{SCALE_MAX}"
                    )))
                }
                Some(v) => *slot = v,
            }
        }
        for (topic, t) in &self.topics {
            if !in_scale(t.interest) {
                return Err(ExperimentError::Validation(format!(
                    "item {} = {} out of scale",
                    interest_key(*topic),
                    t.interest
                )));
            }
            if !in_scale(t.stance) {
                return Err(ExperimentError::Validation(format!(
                    "item {} = {} out of scale",
                    stance_key(*topic),
                    t.stance
                )));
            }
        }
        if stage == SurveyStage::Pre {
            for topic in Topic::ALL {
                if !self.topics.contains_key(&topic) {
                    return Err(ExperimentError::Validation(format!("item {} missing", stance_key(topic))));
                }
            }
        }
        if stage == SurveyStage::Pre && !self.demographics.is_empty() {
            return Err(ExperimentError::Validation("demographics belong to the post-survey".into()));
        }
        Ok(items)
    }

    /// Flattens the response into per-item export rows, in a fixed item order.
    pub fn export_items(&self, participant_id: &str, stage: SurveyStage) -> Vec<SurveyItemExport> {
        let row = |item: String, value: String| SurveyItemExport {
            participant_id: participant_id.to_string(),
            stage,
            item,
            value,
        };
        let mut out = Vec::new();
        for (i, v) in self.ih_items.iter().enumerate() {
            if let Some(v) = v {
                out.push(row(ih_item_key(i + 1), v.to_string()));
            }
        }
        for (topic, t) in &self.topics {
            out.push(row(interest_key(*topic), t.interest.to_string()));
            out.push(row(stance_key(*topic), t.stance.to_string()));
        }
        for (k, v) in &self.attention {
            out.push(row(format!("attention_{k}"), v.to_string()));
        }
        for (k, v) in &self.demographics {
            out.push(row(format!("demo_{k}"), v.clone()));
        }
        out
    }
}

/// Stance extremity on the doubled scale: |2·stance − 11|, so 1 and 10 score 9, 5 and 6 score 1.
pub fn extremity(stance: u8) -> u8 {
    (2 * stance as i16 - 11).unsigned_abs() as u8
}

/// Picks the topic with the most extreme stance, then the highest interest,
/// then uniformly at random. The flag reports whether the random draw decided.
pub fn assign_topic<R: Rng + ?Sized>(
    topics: &BTreeMap<Topic, TopicItems>,
    rng: &mut R,
) -> Result<(Topic, bool), ExperimentError> {
    let scored: Vec<(Topic, u8, u8)> =
        Topic::ALL.iter().filter_map(|t| topics.get(t).map(|i| (*t, extremity(i.stance), i.interest))).collect();
    let best = scored
        .iter()
        .map(|&(_, e, i)| (e, i))
        .max()
        .ok_or_else(|| ExperimentError::Validation("no topic items".into()))?;
    let tied: Vec<Topic> = scored.iter().filter(|&&(_, e, i)| (e, i) == best).map(|s| s.0).collect();
    if tied.len() == 1 {
        Ok((tied[0], false))
    } else {
        Ok((tied[rng.random_range(0..tied.len())], true))
    }
}

/// Pass requires every check for the stage answered with its expected value.
pub fn attention_passed(checks: &[AttentionCheck], stage: SurveyStage, answers: &BTreeMap<String, i64>) -> bool {
    checks
        .iter()
        .filter(|c| match c.stage {
            SurveyStageSel::Both => true,
            SurveyStageSel::Pre => stage == SurveyStage::Pre,
            SurveyStageSel::Post => stage == SurveyStage::Post,
        })
        .all(|c| answers.get(&c.name) == Some(&c.expected))
}
