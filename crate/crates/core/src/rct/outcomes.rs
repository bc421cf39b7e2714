//! Per-participant outcomes computed from an experiment export.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    coded_mean, ih_item_key, CueArm, ExperimentBundle, RctError, Resolution, StanceSide, SurveyStage, IH_ITEMS,
    SCALE_MAX, SCALE_MIN,
};
use crate::classify::Classifier;
use crate::model::{mean_ih, IHLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub participant: String,
    pub cue_arm: CueArm,
    pub env_arm: IHLabel,
    pub triggered_feedback: bool,
    pub topic_stance_group: StanceSide,
    /// Pre-survey coded mean on the 1–10 scale; standardized within the
    /// fitted sample by the covariate models.
    pub baseline_ih: f64,
    pub demonstrated_ih: f64,
    pub self_reported_change: f64,
    pub n_comments: usize,
    pub attention_pass: bool,
}

/// Which label each posted comment contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    /// Classify every posted comment with the analysis classifier.
    #[default]
    Reclassify,
    /// Keep the live gate label when it was assigned to the posted text;
    /// classify the rest.
    LiveWhereAvailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub participant: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub rows: Vec<OutcomeRow>,
    pub excluded: Vec<Exclusion>,
}

/// Mean IH score of a participant's posted comments.
pub fn demonstrated_ih(labels: &[IHLabel]) -> Result<f64, RctError> {
    Ok(mean_ih(labels)?)
}

/// Mean of the coded post items minus mean of the coded pre items.
pub fn self_reported_change(pre: &[u8; IH_ITEMS], post: &[u8; IH_ITEMS]) -> f64 {
    coded_mean(post) - coded_mean(pre)
}

/// Demonstrated IH over all posted comments of the given rows.
pub fn pooled_demonstrated_ih(rows: &[OutcomeRow]) -> Option<f64> {
    let n: usize = rows.iter().map(|r| r.n_comments).sum();
    if n == 0 {
        return None;
    }
    Some(rows.iter().map(|r| r.demonstrated_ih * r.n_comments as f64).sum::<f64>() / n as f64)
}

/// Parses the eight IH items of one survey, or explains what is missing.
pub fn ih_items(answers: &HashMap<&str, &str>) -> Result<[u8; IH_ITEMS], String> {
    let mut out = [0u8; IH_ITEMS];
    for (i, slot) in out.iter_mut().enumerate() {
        let key = ih_item_key(i + 1);
        let raw = answers.get(key.as_str()).ok_or_else(|| format!("item {key} missing"))?;
        let v: u8 = raw.trim().parse().map_err(|_| format!("item {key} is not an integer: `{raw}`"))?;
        if !(SCALE_MIN..=SCALE_MAX).contains(&v) {
            return Err(format!("item {key} out of range: {v}"));
        }
        *slot = v;
    }
    Ok(out)
}

struct Pending<'a> {
    participant: &'a super::ParticipantExport,
    side: StanceSide,
    pre: [u8; IH_ITEMS],
    post: [u8; IH_ITEMS],
    // (posted text, label usable as-is)
    comments: Vec<(&'a str, Option<IHLabel>)>,
}

/// Builds one row per analyzable participant. Participants without a
/// complete pre or post survey, without a topic assignment, or without any
/// posted comment are listed in `excluded`.
pub fn compute_outcomes<C: Classifier + ?Sized>(
    bundle: &ExperimentBundle,
    classifier: &C,
    mode: LabelMode,
) -> Result<OutcomeReport, RctError> {
    let mut answers: HashMap<(&str, SurveyStage), HashMap<&str, &str>> = HashMap::new();
    for s in &bundle.surveys {
        answers.entry((s.participant_id.as_str(), s.stage)).or_default().insert(s.item.as_str(), s.value.as_str());
    }
    let mut posted: HashMap<&str, Vec<(&str, Option<IHLabel>)>> = HashMap::new();
    for c in bundle.comments.iter().filter(|c| c.is_posted_participant_comment()) {
        let text = c.posted_text.as_deref().unwrap_or_default();
        let live = match (mode, c.resolution) {
            (LabelMode::LiveWhereAvailable, Resolution::AutoPosted | Resolution::PostedOriginal) => c.live_label,
            _ => None,
        };
        posted.entry(c.participant_id.as_str()).or_default().push((text, live));
    }

    let empty = HashMap::new();
    let mut report = OutcomeReport::default();
    let mut pending = Vec::new();
    for p in &bundle.participants {
        let id = p.participant_id.as_str();
        let exclude = |reason: String| Exclusion { participant: id.to_string(), reason };
        let Some(side) = p.stance_side else {
            report.excluded.push(exclude("no topic assignment".into()));
            continue;
        };
        let pre = match ih_items(answers.get(&(id, SurveyStage::Pre)).unwrap_or(&empty)) {
            Ok(v) => v,
            Err(e) => {
                report.excluded.push(exclude(format!("pre-survey: {e}")));
                continue;
            }
        };
        let Some(post_answers) = answers.get(&(id, SurveyStage::Post)) else {
            report.excluded.push(exclude("missing post-survey".into()));
            continue;
        };
        let post = match ih_items(post_answers) {
            Ok(v) => v,
            Err(e) => {
                report.excluded.push(exclude(format!("post-survey: {e}")));
                continue;
            }
        };
        let comments = posted.remove(id).unwrap_or_default();
        if comments.is_empty() {
            report.excluded.push(exclude("no posted comments".into()));
            continue;
        }
        pending.push(Pending { participant: p, side, pre, post, comments });
    }

    let to_classify: Vec<&str> =
        pending.iter().flat_map(|p| p.comments.iter().filter(|c| c.1.is_none()).map(|c| c.0)).collect();
    let mut fresh = classifier.classify_batch(&to_classify).into_iter();
    for p in pending {
        let mut labels = Vec::with_capacity(p.comments.len());
        for (_, live) in &p.comments {
            let label = match live {
                Some(l) => *l,
                None => fresh.next().expect("one result per classified text")?,
            };
            labels.push(label);
        }
        let part = p.participant;
        report.rows.push(OutcomeRow {
            participant: part.participant_id.clone(),
            cue_arm: part.cue_arm,
            env_arm: part.env_arm,
            triggered_feedback: part.triggered_feedback,
            topic_stance_group: p.side,
            baseline_ih: coded_mean(&p.pre),
            demonstrated_ih: demonstrated_ih(&labels)?,
            self_reported_change: self_reported_change(&p.pre, &p.post),
            n_comments: labels.len(),
            attention_pass: part.attention_pass,
        });
    }
    Ok(report)
}

pub fn write_outcomes<W: Write>(w: W, rows: &[OutcomeRow]) -> Result<(), RctError> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_outcomes<R: Read>(r: R) -> Result<Vec<OutcomeRow>, RctError> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|row| row.map_err(RctError::from)).collect()
}

pub fn read_outcomes_file(path: &Path) -> Result<Vec<OutcomeRow>, RctError> {
    read_outcomes(File::open(path)?)
}

/// Arm-by-arm means of the three outcomes, for a quick look at an export.
pub fn arm_summary(rows: &[OutcomeRow]) -> String {
    use std::fmt::Write as _;
    let mut cells: BTreeMap<(CueArm, IHLabel), Vec<&OutcomeRow>> = BTreeMap::new();
    for r in rows {
        cells.entry((r.cue_arm, r.env_arm)).or_default().push(r);
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:<8} {:>5} {:>12} {:>12} {:>10}",
        "Cue", "Env", "N", "Demonstrated", "Self change", "Comments"
    );
    for ((cue, env), rs) in cells {
        let n = rs.len() as f64;
        let mean = |f: &dyn Fn(&OutcomeRow) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
        let _ = writeln!(
            out,
            "{:<8} {:<8} {:>5} {:>12.3} {:>12.3} {:>10.2}",
            cue.as_str(),
            env.as_str(),
            rs.len(),
            mean(&|r| r.demonstrated_ih),
            mean(&|r| r.self_reported_change),
            mean(&|r| r.n_comments as f64)
        );
    }
    out
}
