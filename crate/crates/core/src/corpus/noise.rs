use rand::Rng;

use super::{LocalIndex, SliceId, SliceVocabulary};

/// Unigram distribution of a slice raised to the 3/4 power, over the
/// slice's local indices.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseDistribution {
    slice: SliceId,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl NoiseDistribution {
    pub fn new(vocab: &SliceVocabulary) -> Self {
        Self::from_counts(vocab.slice().clone(), vocab.counts())
    }

    /// Builds the distribution from counts in local-index order.
    pub fn from_counts(slice: SliceId, counts: &[u64]) -> Self {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
        let norm: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / norm).collect();
        let mut cumulative = Vec::with_capacity(probabilities.len());
        let mut acc = 0.0;
        for p in &probabilities {
            acc += p;
            cumulative.push(acc);
        }
        NoiseDistribution {
            slice,
            probabilities,
            cumulative,
        }
    }

    pub fn slice(&self) -> &SliceId {
        &self.slice
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Draws one local index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LocalIndex {
        let total = *self.cumulative.last().expect("noise distribution is empty");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        LocalIndex(i.min(self.cumulative.len() - 1) as u32)
    }
}

/// Same as [`NoiseDistribution::new`].
pub fn noise_distribution(vocab: &SliceVocabulary) -> NoiseDistribution {
    NoiseDistribution::new(vocab)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn dist(counts: &[u64]) -> NoiseDistribution {
        NoiseDistribution::from_counts(SliceId::new("s").unwrap(), counts)
    }

    #[test]
    fn three_quarter_power() {
        let d = dist(&[16, 1]);
        assert!((d.probabilities()[0] - 8.0 / 9.0).abs() < 1e-15);
        assert!((d.probabilities()[1] - 1.0 / 9.0).abs() < 1e-15);

        let d = dist(&[81, 16, 1]);
        for (p, expected) in d.probabilities().iter().zip([27.0 / 36.0, 8.0 / 36.0, 1.0 / 36.0]) {
            assert!((p - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_counts() {
        let d = dist(&[7, 7]);
        assert_eq!(d.probabilities(), [0.5, 0.5]);
    }

    #[test]
    fn sums_to_one() {
        let counts: Vec<u64> = (1..=500).map(|i| (i * 7919 % 1000 + 1) as u64).collect();
        let d = dist(&counts);
        let sum: f64 = d.probabilities().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(d.probabilities().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn degenerate_distribution() {
        let d = dist(&[5]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| d.sample(&mut rng) == LocalIndex(0)));
    }

    // Empirical frequencies over 10^6 draws must sit within 3 standard errors
    // of the target probability for every word, and the chi-square statistic
    // must be plausible for its degrees of freedom.
    #[test]
    fn empirical_frequencies_match() {
        let counts = [100u64, 50, 20, 10, 5, 2, 1, 1];
        let d = dist(&counts);
        let draws = 1_000_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut hist = vec![0usize; counts.len()];
        for _ in 0..draws {
            hist[d.sample(&mut rng).get()] += 1;
        }
        let mut chi2 = 0.0;
        for (observed, &p) in hist.iter().zip(d.probabilities()) {
            let expected = p * draws as f64;
            let se = (draws as f64 * p * (1.0 - p)).sqrt();
            assert!((*observed as f64 - expected).abs() < 3.0 * se);
            chi2 += (*observed as f64 - expected).powi(2) / expected;
        }
        // 7 degrees of freedom; the 0.999 quantile is about 24.3.
        assert!(chi2 < 24.3, "chi2 = {chi2}");
    }
}
