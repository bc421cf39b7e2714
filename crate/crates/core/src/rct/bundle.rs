//! The experiment export: participants, comments and survey items as three
//! CSV files with a fixed column order.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CueArm, RctError, StanceSide, Topic};
use crate::model::IHLabel;

pub const PARTICIPANTS_FILE: &str = "participants.csv";
pub const COMMENTS_FILE: &str = "comments.csv";
pub const SURVEYS_FILE: &str = "surveys.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantExport {
    pub participant_id: String,
    pub external_id: String,
    pub cue_arm: CueArm,
    pub env_arm: IHLabel,
    pub assigned_at: i64,
    pub seed_trace: u64,
    pub phase: String,
    pub topic: Option<Topic>,
    /// The participant's own side; the seeded threads take the opposite one.
    pub stance_side: Option<StanceSide>,
    pub attention_pass: bool,
    pub triggered_feedback: bool,
    pub completion_token: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthorKind {
    Participant,
    Agent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    AutoPosted,
    PostedOriginal,
    PostedRevised,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentExport {
    pub comment_id: String,
    pub participant_id: String,
    pub thread_id: String,
    pub author_kind: AuthorKind,
    pub persona: Option<String>,
    pub reply_to: Option<String>,
    pub intended_text: String,
    pub posted_text: Option<String>,
    pub live_label: Option<IHLabel>,
    pub feedback_shown: bool,
    pub suggestion: Option<String>,
    pub resolution: Resolution,
    /// Classifier or agent backend outage affected this event.
    pub outage: bool,
    pub created_at: i64,
    pub posted_at: Option<i64>,
}

impl CommentExport {
    pub fn is_posted_participant_comment(&self) -> bool {
        self.author_kind == AuthorKind::Participant && self.resolution != Resolution::None && self.posted_text.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurveyStage {
    Pre,
    Post,
}

/// One survey answer. IH items are `ih_1`..`ih_8`, topic items
/// `interest_<topic>` / `stance_<topic>`, attention items `attention_<name>`,
/// demographics `demo_<name>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyItemExport {
    pub participant_id: String,
    pub stage: SurveyStage,
    pub item: String,
    pub value: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentBundle {
    pub participants: Vec<ParticipantExport>,
    pub comments: Vec<CommentExport>,
    pub surveys: Vec<SurveyItemExport>,
}

fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T], headers: &[&str]) -> Result<(), RctError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(headers)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<Vec<T>, RctError> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|row| row.map_err(RctError::from)).collect()
}

pub const PARTICIPANT_COLUMNS: [&str; 12] = [
    "participant_id",
    "external_id",
    "cue_arm",
    "env_arm",
    "assigned_at",
    "seed_trace",
    "phase",
    "topic",
    "stance_side",
    "attention_pass",
    "triggered_feedback",
    "completion_token",
];

pub const COMMENT_COLUMNS: [&str; 15] = [
    "comment_id",
    "participant_id",
    "thread_id",
    "author_kind",
    "persona",
    "reply_to",
    "intended_text",
    "posted_text",
    "live_label",
    "feedback_shown",
    "suggestion",
    "resolution",
    "outage",
    "created_at",
    "posted_at",
];

pub const SURVEY_COLUMNS: [&str; 4] = ["participant_id", "stage", "item", "value"];

impl ExperimentBundle {
    /// Serializes the three files into memory, in the order
    /// participants, comments, surveys.
    pub fn to_csv_bytes(&self) -> Result<[Vec<u8>; 3], RctError> {
        let mut p = Vec::new();
        write_rows(&mut p, &self.participants, &PARTICIPANT_COLUMNS)?;
        let mut c = Vec::new();
        write_rows(&mut c, &self.comments, &COMMENT_COLUMNS)?;
        let mut s = Vec::new();
        write_rows(&mut s, &self.surveys, &SURVEY_COLUMNS)?;
        Ok([p, c, s])
    }

    pub fn write_dir(&self, dir: &Path) -> Result<(), RctError> {
        std::fs::create_dir_all(dir)?;
        let [p, c, s] = self.to_csv_bytes()?;
        for (name, bytes) in [(PARTICIPANTS_FILE, p), (COMMENTS_FILE, c), (SURVEYS_FILE, s)] {
            File::create(dir.join(name))?.write_all(&bytes)?;
        }
        Ok(())
    }

    pub fn from_readers<P: Read, C: Read, S: Read>(p: P, c: C, s: S) -> Result<Self, RctError> {
        Ok(ExperimentBundle { participants: read_rows(p)?, comments: read_rows(c)?, surveys: read_rows(s)? })
    }

    pub fn read_dir(dir: &Path) -> Result<Self, RctError> {
        let open = |name: &str| {
            File::open(dir.join(name)).map_err(|e| RctError::Io(std::io::Error::new(e.kind(), format!("{name}: {e}"))))
        };
        Self::from_readers(open(PARTICIPANTS_FILE)?, open(COMMENTS_FILE)?, open(SURVEYS_FILE)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentBundle {
        ExperimentBundle {
            participants: vec![ParticipantExport {
                participant_id: "p1".into(),
                external_id: "ext, \"quoted\"".into(),
                cue_arm: CueArm::Treated,
                env_arm: IHLabel::IA,
                assigned_at: 1_700_000_000_000,
                seed_trace: 3,
                phase: "complete".into(),
                topic: Some(Topic::Climate),
                stance_side: Some(StanceSide::ProGovIntervention),
                attention_pass: true,
                triggered_feedback: true,
                completion_token: None,
            }],
            comments: vec![CommentExport {
                comment_id: "c1".into(),
                participant_id: "p1".into(),
                thread_id: "th1".into(),
                author_kind: AuthorKind::Participant,
                persona: None,
                reply_to: None,
                intended_text: "line one\nline two".into(),
                posted_text: Some("revised".into()),
                live_label: Some(IHLabel::Neutral),
                feedback_shown: true,
                suggestion: Some("try asking".into()),
                resolution: Resolution::PostedRevised,
                outage: false,
                created_at: 5,
                posted_at: Some(6),
            }],
            surveys: vec![SurveyItemExport {
                participant_id: "p1".into(),
                stage: SurveyStage::Pre,
                item: "ih_1".into(),
                value: "7".into(),
            }],
        }
    }

    #[test]
    fn round_trip() {
        let b = sample();
        let [p, c, s] = b.to_csv_bytes().unwrap();
        let back = ExperimentBundle::from_readers(&p[..], &c[..], &s[..]).unwrap();
        assert_eq!(back, b);
        let header = String::from_utf8(p).unwrap();
        assert!(header.starts_with(&PARTICIPANT_COLUMNS.join(",")));
    }

    #[test]
    fn empty_bundle_is_headers_only() {
        let [p, c, s] = ExperimentBundle::default().to_csv_bytes().unwrap();
        assert_eq!(String::from_utf8(p).unwrap(), PARTICIPANT_COLUMNS.join(",") + "\n");
        assert_eq!(String::from_utf8(c).unwrap(), COMMENT_COLUMNS.join(",") + "\n");
        assert_eq!(String::from_utf8(s).unwrap(), SURVEY_COLUMNS.join(",") + "\n");
    }

    #[test]
    fn headers_match_struct_fields() {
        let [p, c, _] = sample().to_csv_bytes().unwrap();
        for (bytes, cols) in [(p, &PARTICIPANT_COLUMNS[..]), (c, &COMMENT_COLUMNS[..])] {
            let mut rdr = csv::Reader::from_reader(&bytes[..]);
            let n = rdr.records().next().unwrap().unwrap().len();
            assert_eq!(n, cols.len());
        }
    }
}
