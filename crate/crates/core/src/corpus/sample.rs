//! Per-day block sampling of submissions (threads).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::model::CommentRecord;

const MS_PER_DAY: i64 = 86_400_000;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleReport {
    pub days: usize,
    pub threads_total: usize,
    pub threads_selected: usize,
    pub comments_selected: usize,
}

/// Selects ⌈fraction · count⌉ threads uniformly without replacement from each
/// UTC calendar day and keeps every comment of the selected threads, in input
/// order. A thread belongs to the day of its earliest comment.
pub fn block_sample(
    records: Vec<CommentRecord>,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<CommentRecord>, SampleReport), CorpusError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CorpusError::InvalidFraction(fraction));
    }
    let mut first_seen: HashMap<&str, i64> = HashMap::new();
    for r in &records {
        let e = first_seen.entry(r.thread_id.as_str()).or_insert(r.created_at);
        *e = (*e).min(r.created_at);
    }
    let mut by_day: BTreeMap<i64, BTreeSet<&str>> = BTreeMap::new();
    for (&thread, &t) in &first_seen {
        by_day.entry(t.div_euclid(MS_PER_DAY)).or_default().insert(thread);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected: BTreeSet<String> = BTreeSet::new();
    for threads in by_day.values() {
        let threads: Vec<&str> = threads.iter().copied().collect();
        // Guard against 0.1 * 30 = 3.0000000000000004 rounding up to 4.
        let k = ((fraction * threads.len() as f64) - 1e-9).ceil().max(1.0) as usize;
        let k = k.min(threads.len());
        for i in sample(&mut rng, threads.len(), k).into_iter() {
            selected.insert(threads[i].to_string());
        }
    }
    let report_days = by_day.len();
    let threads_total = first_seen.len();
    let kept: Vec<CommentRecord> = records.into_iter().filter(|r| selected.contains(&r.thread_id)).collect();
    let report = SampleReport {
        days: report_days,
        threads_total,
        threads_selected: selected.len(),
        comments_selected: kept.len(),
    };
    Ok((kept, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: usize, thread: &str, day: i64, offset_ms: i64) -> CommentRecord {
        CommentRecord {
            id: format!("c{id}"),
            author: "a".into(),
            thread_id: thread.into(),
            subreddit: None,
            created_at: day * MS_PER_DAY + offset_ms,
            body: "x y z".into(),
            label: None,
            topic: None,
        }
    }

    fn corpus() -> Vec<CommentRecord> {
        let mut v = Vec::new();
        let mut id = 0;
        for t in 0..8 {
            for c in 0..3 {
                v.push(rec(id, &format!("t{t}"), 19_000, 1000 * t + c));
                id += 1;
            }
        }
        v
    }

    #[test]
    fn quarter_of_eight_is_two() {
        let (kept, rep) = block_sample(corpus(), 0.25, 1).unwrap();
        assert_eq!(rep.threads_selected, 2);
        assert_eq!(kept.len(), 6);
        let threads: BTreeSet<_> = kept.iter().map(|r| r.thread_id.clone()).collect();
        assert_eq!(threads.len(), 2);
    }

    #[test]
    fn full_fraction_is_identity() {
        let c = corpus();
        let (kept, _) = block_sample(c.clone(), 1.0, 9).unwrap();
        assert_eq!(kept, c);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = block_sample(corpus(), 0.5, 3).unwrap().0;
        let b = block_sample(corpus(), 0.5, 3).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn days_sampled_separately_and_thread_day_is_earliest_comment() {
        let mut v = Vec::new();
        for t in 0..4 {
            v.push(rec(t, &format!("a{t}"), 100, 0));
            v.push(rec(10 + t, &format!("b{t}"), 101, 0));
        }
        // a late reply on day 102 does not move thread a0 off day 100
        v.push(rec(99, "a0", 102, 0));
        let (_, rep) = block_sample(v, 0.5, 0).unwrap();
        assert_eq!(rep.days, 2);
        assert_eq!(rep.threads_selected, 4);
    }

    #[test]
    fn rounding_guard() {
        let mut v = Vec::new();
        for t in 0..30 {
            v.push(rec(t, &format!("t{t}"), 5, t as i64));
        }
        assert_eq!(block_sample(v, 0.1, 0).unwrap().1.threads_selected, 3);
    }

    #[test]
    fn invalid_fraction() {
        assert!(block_sample(corpus(), 0.0, 0).is_err());
        assert!(block_sample(corpus(), 1.5, 0).is_err());
    }
}
