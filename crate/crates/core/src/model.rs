//! Domain vocabulary: labels, sub-labels, the codebook and comment records.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown sub-label `{0}`")]
    UnknownSubLabel(String),
    #[error("cannot average an empty label sequence")]
    EmptySequence,
    #[error("`{0}` is not a valid label (expected IH, IA or Neutral)")]
    InvalidLabel(String),
    #[error("malformed codebook: {0}")]
    Codebook(String),
}

/// Coarse three-way label. Scores are IA = -1, Neutral = 0, IH = +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IHLabel {
    IA,
    Neutral,
    IH,
}

impl IHLabel {
    pub const ALL: [IHLabel; 3] = [IHLabel::IH, IHLabel::Neutral, IHLabel::IA];

    pub fn score(self) -> i8 {
        match self {
            IHLabel::IA => -1,
            IHLabel::Neutral => 0,
            IHLabel::IH => 1,
        }
    }

    pub fn from_score(score: i64) -> Option<IHLabel> {
        match score {
            -1 => Some(IHLabel::IA),
            0 => Some(IHLabel::Neutral),
            1 => Some(IHLabel::IH),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IHLabel::IA => "IA",
            IHLabel::Neutral => "Neutral",
            IHLabel::IH => "IH",
        }
    }

    /// Position in the ordinal scale IA < Neutral < IH (0, 1, 2).
    pub fn ordinal(self) -> usize {
        (self.score() + 1) as usize
    }
}

/// Free function form of [`IHLabel::score`].
pub fn score_of(label: IHLabel) -> i8 {
    label.score()
}

impl fmt::Display for IHLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IHLabel {
    type Err = ModelError;

    /// Accepts the label names case-insensitively, or the integer scores.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "ih" | "1" | "+1" => Ok(IHLabel::IH),
            "ia" | "-1" => Ok(IHLabel::IA),
            "neutral" | "0" => Ok(IHLabel::Neutral),
            _ => Err(ModelError::InvalidLabel(t.to_string())),
        }
    }
}

/// Arithmetic mean of the scores, in [-1, 1].
pub fn mean_ih(labels: &[IHLabel]) -> Result<f64, ModelError> {
    if labels.is_empty() {
        return Err(ModelError::EmptySequence);
    }
    let total: i64 = labels.iter().map(|l| l.score() as i64).sum();
    Ok(total as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    IH,
    IA,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubLabel {
    pub name: String,
    pub polarity: Polarity,
    pub definition: String,
    /// Dropped from the working codebook for low frequency. Still parses,
    /// never counts toward aggregation.
    #[serde(default)]
    pub retired: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub version: String,
    #[serde(rename = "sublabel")]
    pub sublabels: Vec<SubLabel>,
}

const BUNDLED_CODEBOOK: &str = include_str!("../assets/codebook.toml");

impl Codebook {
    /// The codebook shipped with the crate: seven active sub-labels plus the
    /// retired ones.
    pub fn bundled() -> Codebook {
        Codebook::from_toml(BUNDLED_CODEBOOK).expect("bundled codebook is valid")
    }

    pub fn from_toml(text: &str) -> Result<Codebook, ModelError> {
        let book: Codebook = toml::from_str(text).map_err(|e| ModelError::Codebook(e.to_string()))?;
        let mut seen = BTreeSet::new();
        for s in &book.sublabels {
            if !seen.insert(s.name.to_lowercase()) {
                return Err(ModelError::Codebook(format!("duplicate sub-label `{}`", s.name)));
            }
        }
        Ok(book)
    }

    /// Case-insensitive lookup by name.
    pub fn get(&self, name: &str) -> Option<&SubLabel> {
        let needle = name.trim();
        self.sublabels.iter().find(|s| s.name.eq_ignore_ascii_case(needle))
    }

    pub fn active(&self) -> impl Iterator<Item = &SubLabel> {
        self.sublabels.iter().filter(|s| !s.retired)
    }

    /// Coarse label from a set of sub-label names by majority of polarity.
    pub fn aggregate<I, S>(&self, names: I) -> Result<Aggregate, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut ih = 0usize;
        let mut ia = 0usize;
        let mut seen = BTreeSet::new();
        for name in names {
            let name = name.as_ref();
            let sub = self.get(name).ok_or_else(|| ModelError::UnknownSubLabel(name.to_string()))?;
            if sub.retired || !seen.insert(sub.name.as_str()) {
                continue;
            }
            match sub.polarity {
                Polarity::IH => ih += 1,
                Polarity::IA => ia += 1,
            }
        }
        Ok(match ih.cmp(&ia) {
            Ordering::Greater => Aggregate::IH,
            Ordering::Less => Aggregate::IA,
            Ordering::Equal if ih == 0 => Aggregate::Neutral,
            Ordering::Equal => Aggregate::MixedTie,
        })
    }
}

/// Free function form of [`Codebook::aggregate`].
pub fn aggregate_sublabels<I, S>(codebook: &Codebook, names: I) -> Result<Aggregate, ModelError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    codebook.aggregate(names)
}

/// Result of sub-label aggregation. `MixedTie` means equal nonzero IH and IA
/// counts; annotators resolved those by splitting the text by hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Aggregate {
    IH,
    IA,
    Neutral,
    MixedTie,
}

/// How to collapse [`Aggregate::MixedTie`] when a three-way label is required.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TiePolicy {
    #[default]
    Neutral,
    Reject,
}

impl Aggregate {
    pub fn label(self) -> Option<IHLabel> {
        match self {
            Aggregate::IH => Some(IHLabel::IH),
            Aggregate::IA => Some(IHLabel::IA),
            Aggregate::Neutral => Some(IHLabel::Neutral),
            Aggregate::MixedTie => None,
        }
    }

    pub fn resolve(self, policy: TiePolicy) -> Option<IHLabel> {
        match (self.label(), policy) {
            (Some(l), _) => Some(l),
            (None, TiePolicy::Neutral) => {
                tracing::info!("mixed IH/IA tie resolved to Neutral by tie policy");
                Some(IHLabel::Neutral)
            }
            (None, TiePolicy::Reject) => None,
        }
    }
}

/// One annotator's sub-labels for one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub item_id: String,
    pub annotator: String,
    pub sublabels: BTreeSet<String>,
}

impl Annotation {
    pub fn validate(&self, codebook: &Codebook) -> Result<(), ModelError> {
        match self.sublabels.iter().find(|s| codebook.get(s).is_none()) {
            Some(bad) => Err(ModelError::UnknownSubLabel(bad.clone())),
            None => Ok(()),
        }
    }
}

/// Deleted / moderated markers used by comment dumps.
pub const DELETED_MARKER: &str = "[deleted]";
pub const REMOVED_MARKER: &str = "[removed]";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyStatus {
    Live,
    Deleted,
    Removed,
}

/// A single comment. `created_at` is UTC epoch milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub id: String,
    pub author: String,
    pub thread_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subreddit: Option<String>,
    pub created_at: i64,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<IHLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
}

impl CommentRecord {
    pub fn body_status(&self) -> BodyStatus {
        match self.body.trim() {
            DELETED_MARKER => BodyStatus::Deleted,
            REMOVED_MARKER => BodyStatus::Removed,
            _ => BodyStatus::Live,
        }
    }

    /// Within-thread total order: (created_at, id).
    pub fn thread_order(&self, other: &Self) -> Ordering {
        self.created_at.cmp(&other.created_at).then_with(|| self.id.cmp(&other.id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scores() {
        assert_eq!(score_of(IHLabel::IA), -1);
        assert_eq!(score_of(IHLabel::Neutral), 0);
        assert_eq!(score_of(IHLabel::IH), 1);
    }

    #[test]
    fn bundled_codebook_shape() {
        let book = Codebook::bundled();
        let active: Vec<_> = book.active().collect();
        assert_eq!(active.len(), 7);
        assert_eq!(active.iter().filter(|s| s.polarity == Polarity::IH).count(), 4);
        assert_eq!(active.iter().filter(|s| s.polarity == Polarity::IA).count(), 3);
        assert_eq!(book.sublabels.iter().filter(|s| s.retired).count(), 5);
    }

    #[test]
    fn codebook_definitions_are_verbatim() {
        let book = Codebook::bundled();
        let golden = [
            ("Acknowledges Personal Beliefs", "Affirms individual convictions by speaking openly without contempt and/or uses first-person language to express an opinion or viewpoint without contempt."),
            ("Engages Respectfully with Diverse Perspectives", "Directly addresses and thoughtfully responds to differing perspectives in a way that acknowledges their validity or rationale."),
            ("Recognizes limitations in one's own knowledge or beliefs", "Acknowledges that one's political knowledge, beliefs, or information sources may be incomplete or subject to bias."),
            ("Seeks out new information", "Actively searches for new knowledge and perspectives on political issues or clarification on statements made or poses a non-rhetorical question."),
            ("Polarizing or Tribalistic Language", "Characterizes political opponents as inherently evil, less human, or existential threats, creating an \"us vs. them\" narrative that undermines productive dialogue and fuels division."),
            ("Condescending Attitude", "Overbearing or dismissive behavior that undermines others' perspectives or intellect."),
            ("Close-minded Absolutism", "Using strong, definitive language to express convictions without engaging with or acknowledging diverse perspectives."),
        ];
        for (name, def) in golden {
            assert_eq!(book.get(name).unwrap().definition, def, "{name}");
        }
    }

    #[test]
    fn aggregation_examples() {
        let book = Codebook::bundled();
        assert_eq!(book.aggregate(Vec::<&str>::new()).unwrap(), Aggregate::Neutral);
        assert_eq!(
            book.aggregate(["Acknowledges Personal Beliefs", "Seeks out new information", "Condescending Attitude"])
                .unwrap(),
            Aggregate::IH
        );
        assert_eq!(
            book.aggregate(["Acknowledges Personal Beliefs", "Close-minded Absolutism"]).unwrap(),
            Aggregate::MixedTie
        );
        assert_eq!(book.aggregate(["Condescending Attitude"]).unwrap(), Aggregate::IA);
        assert_eq!(book.aggregate(["Nonsense label"]), Err(ModelError::UnknownSubLabel("Nonsense label".into())));
    }

    #[test]
    fn retired_sublabels_parse_but_do_not_count() {
        let book = Codebook::bundled();
        assert_eq!(book.aggregate(["Ad Hominem"]).unwrap(), Aggregate::Neutral);
        assert_eq!(
            book.aggregate(["Ad Hominem", "Displays Empathy", "Seeks out new information"]).unwrap(),
            Aggregate::IH
        );
    }

    #[test]
    fn tie_policy() {
        assert_eq!(Aggregate::MixedTie.resolve(TiePolicy::Neutral), Some(IHLabel::Neutral));
        assert_eq!(Aggregate::MixedTie.resolve(TiePolicy::Reject), None);
        assert_eq!(Aggregate::IA.resolve(TiePolicy::Reject), Some(IHLabel::IA));
    }

    #[test]
    fn mean_examples() {
        use IHLabel::*;
        assert_eq!(mean_ih(&[IH, IH, IA, Neutral]).unwrap(), 0.25);
        assert_eq!(mean_ih(&[Neutral, Neutral]).unwrap(), 0.0);
        assert_eq!(mean_ih(&[IA, IA, IA, IH]).unwrap(), -0.5);
        assert_eq!(mean_ih(&[]), Err(ModelError::EmptySequence));
    }

    #[test]
    fn annotation_validation() {
        let book = Codebook::bundled();
        let mut a = Annotation {
            item_id: "p1".into(),
            annotator: "a".into(),
            sublabels: ["Condescending Attitude".to_string()].into(),
        };
        assert!(a.validate(&book).is_ok());
        a.sublabels.insert("Sarcasm".into());
        assert!(a.validate(&book).is_err());
    }

    #[test]
    fn body_status_and_order() {
        let mut c = CommentRecord {
            id: "b".into(),
            author: "u".into(),
            thread_id: "t".into(),
            subreddit: None,
            created_at: 10,
            body: "[deleted]".into(),
            label: None,
            topic: None,
        };
        assert_eq!(c.body_status(), BodyStatus::Deleted);
        let mut d = c.clone();
        d.id = "a".into();
        assert_eq!(c.thread_order(&d), Ordering::Greater);
        c.created_at = 9;
        assert_eq!(c.thread_order(&d), Ordering::Less);
    }

    fn label_strategy() -> impl Strategy<Value = IHLabel> {
        prop_oneof![Just(IHLabel::IA), Just(IHLabel::Neutral), Just(IHLabel::IH)]
    }

    fn sublabel_strategy() -> impl Strategy<Value = Vec<String>> {
        let names: Vec<String> = Codebook::bundled().active().map(|s| s.name.clone()).collect();
        proptest::sample::subsequence(names, 0..=7)
    }

    proptest! {
        #[test]
        fn aggregate_is_permutation_invariant(mut names in sublabel_strategy(), seed in any::<u64>()) {
            let book = Codebook::bundled();
            let a = book.aggregate(&names).unwrap();
            // deterministic shuffle
            let n = names.len();
            if n > 1 {
                let mut s = seed;
                for i in (1..n).rev() {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    names.swap(i, (s >> 33) as usize % (i + 1));
                }
            }
            prop_assert_eq!(a, book.aggregate(&names).unwrap());
        }

        #[test]
        fn mean_is_bounded_and_balanced(labels in proptest::collection::vec(label_strategy(), 1..50),
                                        k in 0usize..10, neutrals in 0usize..10) {
            let m = mean_ih(&labels).unwrap();
            prop_assert!((-1.0..=1.0).contains(&m));
            let mut balanced = vec![IHLabel::IH; k];
            balanced.extend(vec![IHLabel::IA; k]);
            balanced.extend(vec![IHLabel::Neutral; neutrals]);
            if !balanced.is_empty() {
                prop_assert_eq!(mean_ih(&balanced).unwrap(), 0.0);
            }
        }

        #[test]
        fn label_round_trips(label in label_strategy()) {
            let parsed: IHLabel = label.to_string().parse().unwrap();
            prop_assert_eq!(parsed.score(), label.score());
            let from_int: IHLabel = label.score().to_string().parse().unwrap();
            prop_assert_eq!(from_int, label);
        }
    }
}
