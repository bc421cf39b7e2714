use std::sync::Mutex;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Classifier, ClassifyError};
use crate::model::IHLabel;

/// Ignores the text and samples a label from a fixed distribution.
/// Probabilities are given in the order (IH, Neutral, IA).
#[derive(Debug)]
pub struct RandomBaseline {
    weights: WeightedIndex<f64>,
    rng: Mutex<ChaCha8Rng>,
    probabilities: [f64; 3],
}

impl RandomBaseline {
    pub fn new(probabilities: [f64; 3], seed: u64) -> Result<Self, ClassifyError> {
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(ClassifyError::InvalidDistribution(format!("{probabilities:?} has a negative entry")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ClassifyError::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        let weights =
            WeightedIndex::new(probabilities).map_err(|e| ClassifyError::InvalidDistribution(e.to_string()))?;
        Ok(RandomBaseline { weights, rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)), probabilities })
    }

    /// Distribution proportional to per-class counts (IH, Neutral, IA).
    pub fn from_counts(counts: [usize; 3], seed: u64) -> Result<Self, ClassifyError> {
        let n: usize = counts.iter().sum();
        if n == 0 {
            return Err(ClassifyError::InvalidDistribution("all counts are zero".into()));
        }
        Self::new(counts.map(|c| c as f64 / n as f64), seed)
    }

    pub fn probabilities(&self) -> [f64; 3] {
        self.probabilities
    }

    pub fn sample(&self) -> IHLabel {
        let mut rng = self.rng.lock().unwrap_or_else(|e| e.into_inner());
        IHLabel::ALL[self.weights.sample(&mut *rng)]
    }
}

impl Classifier for RandomBaseline {
    fn classify(&self, _text: &str) -> Result<IHLabel, ClassifyError> {
        Ok(self.sample())
    }

    fn name(&self) -> String {
        "random_baseline".into()
    }
}

/// Labels everything Neutral.
#[derive(Debug, Clone, Copy, Default)]
pub struct MajorityBaseline;

impl Classifier for MajorityBaseline {
    fn classify(&self, _text: &str) -> Result<IHLabel, ClassifyError> {
        Ok(IHLabel::Neutral)
    }

    fn name(&self) -> String {
        "majority_baseline".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_distributions() {
        assert!(RandomBaseline::new([0.5, 0.6, -0.1], 0).is_err());
        assert!(RandomBaseline::new([0.5, 0.4, 0.0], 0).is_err());
        assert!(RandomBaseline::new([0.0, 0.0, 0.0], 0).is_err());
    }

    #[test]
    fn degenerate_distribution_is_constant() {
        let r = RandomBaseline::new([0.0, 1.0, 0.0], 3).unwrap();
        assert!((0..200).all(|_| r.sample() == IHLabel::Neutral));
    }

    #[test]
    fn same_seed_same_sequence() {
        let a = RandomBaseline::new([0.2, 0.5, 0.3], 42).unwrap();
        let b = RandomBaseline::new([0.2, 0.5, 0.3], 42).unwrap();
        let sa: Vec<_> = (0..100).map(|_| a.sample()).collect();
        let sb: Vec<_> = (0..100).map(|_| b.sample()).collect();
        assert_eq!(sa, sb);
    }
}
