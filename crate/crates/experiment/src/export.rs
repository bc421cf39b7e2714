use humility_core::rct::{ExperimentBundle, ParticipantExport, SurveyStage};

use crate::session::SessionState;

/// Flattens sessions into the three analysis tables, ordered by enrollment.
pub fn export_bundle<'a>(states: impl IntoIterator<Item = &'a SessionState>) -> ExperimentBundle {
    let mut states: Vec<&SessionState> = states.into_iter().collect();
    states.sort_by_key(|s| s.assignment.seed_trace);
    let mut bundle = ExperimentBundle::default();
    for s in states {
        let a = &s.assignment;
        bundle.participants.push(ParticipantExport {
            participant_id: a.participant_id.clone(),
            external_id: a.external_id.clone(),
            cue_arm: a.cue_arm,
            env_arm: a.env_arm,
            assigned_at: a.assigned_at,
            seed_trace: a.seed_trace,
            phase: s.phase.as_str().to_string(),
            topic: s.topic,
            stance_side: s.stance_side,
            attention_pass: s.attention_pass,
            triggered_feedback: s.triggered_feedback(),
            completion_token: s.completion_token.clone(),
        });
        bundle.comments.extend(s.comments.iter().cloned());
        if let Some(r) = &s.pre_survey {
            bundle.surveys.extend(r.export_items(&a.participant_id, SurveyStage::Pre));
        }
        if let Some(r) = &s.post_survey {
            bundle.surveys.extend(r.export_items(&a.participant_id, SurveyStage::Post));
        }
    }
    bundle
}
