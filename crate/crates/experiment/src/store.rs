//! Append-only event log: one JSON record per line, one file per UTC day,
//! plus an optional derived snapshot.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::events::{Event, EventRecord};
use crate::session::SessionState;
use crate::ExperimentError;

pub const SNAPSHOT_FILE: &str = "snapshot.json";

fn store_err(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Store(msg.into())
}

/// Log file name for an event timestamp.
pub fn day_file(at_ms: i64) -> String {
    let day = DateTime::<Utc>::from_timestamp_millis(at_ms).unwrap_or_default().format("%Y-%m-%d");
    format!("events-{day}.jsonl")
}

/// Session states as of `last_seq`, keyed by session id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub last_seq: u64,
    pub sessions: BTreeMap<String, SessionState>,
}

impl Snapshot {
    pub fn empty() -> Self {
        Snapshot { last_seq: 0, sessions: BTreeMap::new() }
    }

    /// Folds records with `seq > last_seq` into the snapshot.
    pub fn advance<'a>(&mut self, records: impl IntoIterator<Item = &'a EventRecord>) -> Result<(), ExperimentError> {
        for r in records {
            if r.seq <= self.last_seq {
                continue;
            }
            match &r.event {
                Event::Enrolled { assignment } => {
                    if self.sessions.contains_key(&r.session) {
                        return Err(store_err(format!("session {} enrolled twice (seq {})", r.session, r.seq)));
                    }
                    self.sessions.insert(r.session.clone(), SessionState::new(assignment.clone()));
                }
                e => self
                    .sessions
                    .get_mut(&r.session)
                    .ok_or_else(|| store_err(format!("event for unknown session {} (seq {})", r.session, r.seq)))?
                    .apply(e)
                    .map_err(|err| store_err(format!("seq {}: {err}", r.seq)))?,
            }
            self.last_seq = r.seq;
        }
        Ok(())
    }
}

pub struct EventStore {
    dir: Option<PathBuf>,
    fsync: bool,
    records: Vec<EventRecord>,
    open: Option<(String, File)>,
}

impl EventStore {
    pub fn in_memory() -> Self {
        EventStore { dir: None, fsync: false, records: Vec::new(), open: None }
    }

    /// Opens (creating if needed) a log directory and loads every record in it.
    /// A torn final line, as left by a crash mid-write, is dropped.
    pub fn open(dir: &Path, fsync: bool) -> Result<Self, ExperimentError> {
        fs::create_dir_all(dir)?;
        let mut files: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("events-") && n.ends_with(".jsonl"))
            })
            .collect();
        files.sort();
        let mut records: Vec<EventRecord> = Vec::new();
        let n_files = files.len();
        for (fi, path) in files.iter().enumerate() {
            let lines: Vec<String> = BufReader::new(File::open(path)?).lines().collect::<Result<_, _>>()?;
            let n_lines = lines.len();
            for (li, line) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<EventRecord>(line) {
                    Ok(r) => {
                        if records.last().is_some_and(|p| p.seq >= r.seq) {
                            return Err(store_err(format!(
                                "{}:{}: sequence {} out of order",
                                path.display(),
                                li + 1,
                                r.seq
                            )));
                        }
                        records.push(r);
                    }
                    Err(e) if fi + 1 == n_files && li + 1 == n_lines => {
                        tracing::warn!(file = %path.display(), error = %e, "dropping torn final log line");
                        Self::truncate_last_line(path)?;
                    }
                    Err(e) => return Err(store_err(format!("{}:{}: {e}", path.display(), li + 1))),
                }
            }
        }
        Ok(EventStore { dir: Some(dir.to_path_buf()), fsync, records, open: None })
    }

    fn truncate_last_line(path: &Path) -> Result<(), ExperimentError> {
        let text = fs::read_to_string(path)?;
        let keep = text.trim_end_matches('\n').rfind('\n').map(|i| i + 1).unwrap_or(0);
        fs::write(path, &text[..keep])?;
        Ok(())
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn last_seq(&self) -> u64 {
        self.records.last().map(|r| r.seq).unwrap_or(0)
    }

    /// Appends events for one session; each record is written as a single line
    /// and flushed before the next.
    pub fn append(&mut self, session: &str, at: i64, events: &[Event]) -> Result<Vec<EventRecord>, ExperimentError> {
        let mut out = Vec::with_capacity(events.len());
        for event in events {
            let record =
                EventRecord { seq: self.last_seq() + 1, at, session: session.to_string(), event: event.clone() };
            if let Some(dir) = &self.dir {
                let name = day_file(at);
                if self.open.as_ref().map(|(n, _)| n != &name).unwrap_or(true) {
                    let f = OpenOptions::new().create(true).append(true).open(dir.join(&name))?;
                    self.open = Some((name, f));
                }
                let (_, f) = self.open.as_mut().expect("opened above");
                let mut line = serde_json::to_vec(&record)?;
                line.push(b'\n');
                f.write_all(&line)?;
                f.flush()?;
                if self.fsync {
                    f.sync_data()?;
                }
            }
            self.records.push(record.clone());
            out.push(record);
        }
        Ok(out)
    }

    /// Folds the whole log into session states.
    pub fn replay(&self) -> Result<Snapshot, ExperimentError> {
        let mut snap = Snapshot::empty();
        snap.advance(&self.records)?;
        Ok(snap)
    }

    /// Writes `snapshot.json` atomically (temp file then rename).
    pub fn write_snapshot(&self) -> Result<Option<PathBuf>, ExperimentError> {
        let Some(dir) = &self.dir else { return Ok(None) };
        let snap = self.replay()?;
        let tmp = dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        let path = dir.join(SNAPSHOT_FILE);
        fs::write(&tmp, serde_json::to_vec(&snap)?)?;
        fs::rename(&tmp, &path)?;
        Ok(Some(path))
    }

    /// Session states from the snapshot, if any, brought forward with later records.
    pub fn restore(&self) -> Result<Snapshot, ExperimentError> {
        let mut snap = match &self.dir {
            Some(dir) if dir.join(SNAPSHOT_FILE).exists() => {
                let snap: Snapshot = serde_json::from_slice(&fs::read(dir.join(SNAPSHOT_FILE))?)?;
                if snap.last_seq > self.last_seq() {
                    tracing::warn!("snapshot is ahead of the log; rebuilding from events");
                    Snapshot::empty()
                } else {
                    snap
                }
            }
            _ => Snapshot::empty(),
        };
        snap.advance(&self.records)?;
        Ok(snap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::Assignment;
    use humility_core::rct::CueArm;
    use humility_core::IHLabel;

    fn enrolled(id: &str) -> Event {
        Event::Enrolled {
            assignment: Assignment {
                participant_id: id.into(),
                external_id: format!("ext-{id}"),
                cue_arm: CueArm::Control,
                env_arm: IHLabel::IH,
                assigned_at: 0,
                seed_trace: 0,
            },
        }
    }

    #[test]
    fn day_files() {
        assert_eq!(day_file(0), "events-1970-01-01.jsonl");
        assert_eq!(day_file(86_400_000 - 1), "events-1970-01-01.jsonl");
        assert_eq!(day_file(86_400_000), "events-1970-01-02.jsonl");
    }

    #[test]
    fn reopen_and_snapshot() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut s = EventStore::open(dir.path(), true).unwrap();
            s.append("a", 0, &[enrolled("a"), Event::Consented]).unwrap();
            s.write_snapshot().unwrap();
            s.append("b", 86_400_000, &[enrolled("b")]).unwrap();
        }
        let s = EventStore::open(dir.path(), false).unwrap();
        assert_eq!(s.records().len(), 3);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 3);
        let restored = s.restore().unwrap();
        assert_eq!(restored, s.replay().unwrap());
        assert_eq!(restored.sessions.len(), 2);
        assert_eq!(restored.last_seq, 3);
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut s = EventStore::open(dir.path(), false).unwrap();
            s.append("a", 0, &[enrolled("a")]).unwrap();
        }
        let path = dir.path().join(day_file(0));
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"seq\":2,\"at\":0,\"sess").unwrap();
        drop(f);
        let mut s = EventStore::open(dir.path(), false).unwrap();
        assert_eq!(s.records().len(), 1);
        s.append("a", 0, &[Event::Consented]).unwrap();
        let s = EventStore::open(dir.path(), false).unwrap();
        assert_eq!(s.records().len(), 2);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(day_file(0)), "garbage\n{}\n").unwrap();
        assert!(matches!(EventStore::open(dir.path(), false), Err(ExperimentError::Store(_))));
    }
}
