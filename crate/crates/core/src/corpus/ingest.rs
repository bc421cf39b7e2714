//! Comment-dump readers.
//!
//! Line-delimited JSON objects (or CSV with the same column names):
//! `id, author, subreddit, link_id, created_utc, body` plus optional `topic`
//! and `label`. `created_utc` is epoch seconds, integer or fractional, given as
//! a number or a numeric string.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::CorpusError;
use crate::model::{CommentRecord, IHLabel};

/// Ingest aborts when more than this fraction of lines is malformed.
pub const MAX_MALFORMED_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    JsonlDump,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    /// Non-blank input lines (data rows for CSV).
    pub lines: usize,
    pub records: usize,
    /// (1-based line number, reason) for every skipped line.
    pub skipped: Vec<(usize, String)>,
    pub deleted: usize,
    pub removed: usize,
}

pub fn ingest(path: &Path, format: InputFormat) -> Result<(Vec<CommentRecord>, IngestReport), CorpusError> {
    let file = File::open(path)?;
    ingest_reader(BufReader::new(file), format)
}

pub fn ingest_reader<R: Read>(
    reader: R,
    format: InputFormat,
) -> Result<(Vec<CommentRecord>, IngestReport), CorpusError> {
    let parsed: Vec<(usize, Result<CommentRecord, String>)> = match format {
        InputFormat::JsonlDump => {
            let lines: Vec<(usize, String)> = BufReader::new(reader)
                .lines()
                .enumerate()
                .map(|(i, l)| l.map(|l| (i + 1, l)))
                .collect::<Result<_, _>>()?;
            lines
                .into_par_iter()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(n, l)| {
                    let rec = serde_json::from_str::<Value>(&l).map_err(|e| format!("invalid JSON: {e}")).and_then(
                        |v| match v {
                            Value::Object(m) => record_from_map(&m),
                            _ => Err("not a JSON object".to_string()),
                        },
                    );
                    (n, rec)
                })
                .collect()
        }
        InputFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
            let headers = rdr.headers()?.clone();
            let mut out = Vec::new();
            for (i, row) in rdr.records().enumerate() {
                let line = i + 2;
                let rec = match row {
                    Ok(row) => {
                        let m: Map<String, Value> = headers
                            .iter()
                            .zip(row.iter())
                            .filter(|(_, v)| !v.is_empty())
                            .map(|(h, v)| (h.trim().to_string(), Value::String(v.to_string())))
                            .collect();
                        record_from_map(&m)
                    }
                    Err(e) => Err(e.to_string()),
                };
                out.push((line, rec));
            }
            out
        }
    };

    let mut report = IngestReport { lines: parsed.len(), ..Default::default() };
    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(parsed.len());
    for (line, rec) in parsed {
        match rec {
            Ok(r) if !seen.insert(r.id.clone()) => report.skipped.push((line, format!("duplicate id `{}`", r.id))),
            Ok(r) => records.push(r),
            Err(reason) => report.skipped.push((line, reason)),
        }
    }
    let malformed = report.skipped.len();
    if report.lines > 0 && malformed as f64 > MAX_MALFORMED_FRACTION * report.lines as f64 {
        let (first_line, first_reason) = report.skipped[0].clone();
        return Err(CorpusError::CorpusQuality {
            malformed,
            lines: report.lines,
            limit_pct: MAX_MALFORMED_FRACTION * 100.0,
            first_line,
            first_reason,
        });
    }
    for (line, reason) in &report.skipped {
        tracing::warn!(line, %reason, "skipped malformed input line");
    }
    report.records = records.len();
    report.deleted = records.iter().filter(|r| r.body_status() == crate::model::BodyStatus::Deleted).count();
    report.removed = records.iter().filter(|r| r.body_status() == crate::model::BodyStatus::Removed).count();
    Ok((records, report))
}

fn text_field(m: &Map<String, Value>, key: &str) -> Result<String, String> {
    match m.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        Some(_) => Err(format!("field `{key}` has the wrong type")),
        None => Err(format!("missing field `{key}`")),
    }
}

fn optional_text(m: &Map<String, Value>, key: &str) -> Result<Option<String>, String> {
    match m.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) if s.is_empty() => Ok(None),
        _ => text_field(m, key).map(Some),
    }
}

fn record_from_map(m: &Map<String, Value>) -> Result<CommentRecord, String> {
    let seconds = match m.get("created_utc") {
        Some(Value::Number(n)) => n.as_f64().ok_or("created_utc out of range")?,
        Some(Value::String(s)) => s.trim().parse::<f64>().map_err(|_| format!("created_utc `{s}` is not numeric"))?,
        Some(_) => return Err("field `created_utc` has the wrong type".into()),
        None => return Err("missing field `created_utc`".into()),
    };
    if !seconds.is_finite() {
        return Err("created_utc is not finite".into());
    }
    let id = text_field(m, "id")?;
    if id.is_empty() {
        return Err("empty id".into());
    }
    let label = optional_text(m, "label")?.map(|s| s.parse::<IHLabel>().map_err(|e| e.to_string())).transpose()?;
    Ok(CommentRecord {
        id,
        author: text_field(m, "author")?,
        thread_id: text_field(m, "link_id")?,
        subreddit: optional_text(m, "subreddit")?,
        created_at: (seconds * 1000.0).round() as i64,
        body: text_field(m, "body")?,
        label,
        topic: optional_text(m, "topic")?,
    })
}

#[derive(Serialize)]
struct DumpLine<'a> {
    id: &'a str,
    author: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    subreddit: Option<&'a str>,
    link_id: &'a str,
    created_utc: Value,
    body: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    topic: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'static str>,
}

/// Writes records in the JSONL dump schema; labels, when present, are kept.
pub fn write_dump<W: Write>(records: &[CommentRecord], mut out: W) -> Result<(), CorpusError> {
    for r in records {
        let created_utc = if r.created_at % 1000 == 0 {
            Value::from(r.created_at / 1000)
        } else {
            Value::from(r.created_at as f64 / 1000.0)
        };
        let line = DumpLine {
            id: &r.id,
            author: &r.author,
            subreddit: r.subreddit.as_deref(),
            link_id: &r.thread_id,
            created_utc,
            body: &r.body,
            topic: r.topic.as_deref(),
            label: r.label.map(IHLabel::as_str),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DUMP: &str = r#"{"id":"c1","author":"alice","subreddit":"politics","link_id":"t3_a","created_utc":1714521600,"body":"I think so."}
{"id":"c2","author":"bob","subreddit":"politics","link_id":"t3_a","created_utc":"1714521660","body":"[deleted]","topic":"economy"}
{"id":"c3","author":"carol","subreddit":"news","link_id":"t3_b","created_utc":1714521700.5,"body":"Facts only."}
"#;

    #[test]
    fn three_line_fixture() {
        let (recs, rep) = ingest_reader(DUMP.as_bytes(), InputFormat::JsonlDump).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(rep.records, 3);
        assert_eq!(recs[0].author, "alice");
        assert_eq!(recs[0].thread_id, "t3_a");
        assert_eq!(recs[0].subreddit.as_deref(), Some("politics"));
        assert_eq!(recs[0].created_at, 1_714_521_600_000);
        assert_eq!(recs[1].created_at, 1_714_521_660_000);
        assert_eq!(recs[1].topic.as_deref(), Some("economy"));
        assert_eq!(recs[1].body_status(), crate::model::BodyStatus::Deleted);
        assert_eq!(rep.deleted, 1);
        assert_eq!(recs[2].created_at, 1_714_521_700_500);
    }

    #[test]
    fn one_bad_line_in_hundred() {
        let mut s = String::new();
        for i in 0..100 {
            if i == 50 {
                s.push_str("{not json\n");
            } else {
                s.push_str(&format!(
                    "{{\"id\":\"c{i}\",\"author\":\"a\",\"subreddit\":\"s\",\"link_id\":\"t\",\"created_utc\":{i},\"body\":\"x y z\"}}\n"
                ));
            }
        }
        let (recs, rep) = ingest_reader(s.as_bytes(), InputFormat::JsonlDump).unwrap();
        assert_eq!(recs.len(), 99);
        assert_eq!(rep.skipped.len(), 1);
        assert_eq!(rep.skipped[0].0, 51);
    }

    #[test]
    fn too_many_bad_lines_abort() {
        let mut s = String::new();
        for i in 0..10 {
            if i < 2 {
                s.push_str("[]\n");
            } else {
                s.push_str(&format!(
                    "{{\"id\":\"c{i}\",\"author\":\"a\",\"link_id\":\"t\",\"created_utc\":{i},\"body\":\"b\"}}\n"
                ));
            }
        }
        assert!(matches!(
            ingest_reader(s.as_bytes(), InputFormat::JsonlDump),
            Err(CorpusError::CorpusQuality { malformed: 2, lines: 10, .. })
        ));
    }

    #[test]
    fn duplicate_ids_are_skipped() {
        let line = |id: &str| {
            format!("{{\"id\":\"{id}\",\"author\":\"a\",\"link_id\":\"t\",\"created_utc\":1,\"body\":\"b\"}}\n")
        };
        let s: String = (0..10).map(|i| line(&format!("c{i}"))).chain([line("c3")]).collect();
        let (recs, rep) = ingest_reader(s.as_bytes(), InputFormat::JsonlDump).unwrap();
        assert_eq!(recs.len(), 10);
        assert_eq!(rep.skipped.len(), 1);
        assert_eq!(rep.skipped[0].0, 11);
    }

    #[test]
    fn csv_input() {
        let s = "id,author,subreddit,link_id,created_utc,body,topic,label\n\
                 c1,alice,pol,t1,100,\"Well, I think so\",,IH\n\
                 c2,bob,pol,t1,101,fine then,guns,\n";
        let (recs, _) = ingest_reader(s.as_bytes(), InputFormat::Csv).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].body, "Well, I think so");
        assert_eq!(recs[0].label, Some(IHLabel::IH));
        assert_eq!(recs[0].topic, None);
        assert_eq!(recs[1].topic.as_deref(), Some("guns"));
    }

    #[test]
    fn dump_round_trip() {
        let (recs, _) = ingest_reader(DUMP.as_bytes(), InputFormat::JsonlDump).unwrap();
        let mut labeled = recs.clone();
        labeled[0].label = Some(IHLabel::IH);
        let mut buf = Vec::new();
        write_dump(&labeled, &mut buf).unwrap();
        let (back, _) = ingest_reader(buf.as_slice(), InputFormat::JsonlDump).unwrap();
        assert_eq!(back, labeled);
    }
}
