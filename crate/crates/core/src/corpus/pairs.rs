use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LocalIndex, NoiseDistribution, SliceCorpus, SliceId, SliceVocabulary};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Positive,
    Negative,
}

/// One (input, output) word pair of a slice, in local indices. The slice
/// is implied by the stream the pair belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrainingPair {
    pub input: LocalIndex,
    pub output: LocalIndex,
    pub label: Label,
}

impl TrainingPair {
    pub fn positive(input: LocalIndex, output: LocalIndex) -> Self {
        TrainingPair {
            input,
            output,
            label: Label::Positive,
        }
    }
}

/// Probability of keeping one occurrence of a word with relative frequency
/// `word_freq` under sample factor `t`: `min(1, sqrt(t/f) + t/f)`.
pub fn subsample_keep_prob(word_freq: f64, t: f64) -> f64 {
    let ratio = t / word_freq;
    (ratio.sqrt() + ratio).min(1.0)
}

/// Generates the positive skip-gram pairs of one slice.
///
/// Out-of-vocabulary tokens are removed first. Each remaining occurrence is
/// then kept with [`subsample_keep_prob`] (`subsample = None` keeps
/// everything). For every kept token, each other kept token within
/// `window` positions of the filtered document yields one
/// `(token, context)` pair; discarded occurrences leave their position
/// empty rather than closing the gap.
pub fn generate_pairs<R: Rng + ?Sized>(
    corpus: &SliceCorpus,
    vocab: &SliceVocabulary,
    window: usize,
    subsample: Option<f64>,
    rng: &mut R,
) -> Vec<TrainingPair> {
    let keep_probs: Option<Vec<f64>> = subsample.map(|t| {
        let total = vocab.total_count() as f64;
        vocab
            .counts()
            .iter()
            .map(|&c| subsample_keep_prob(c as f64 / total, t))
            .collect()
    });

    let mut pairs = Vec::new();
    let mut doc: Vec<LocalIndex> = Vec::new();
    let mut kept: Vec<bool> = Vec::new();
    for document in &corpus.documents {
        doc.clear();
        doc.extend(document.iter().filter_map(|t| vocab.local_index(t)));
        kept.clear();
        kept.extend(doc.iter().map(|w| match &keep_probs {
            Some(probs) => {
                let p = probs[w.get()];
                p >= 1.0 || rng.random::<f64>() < p
            }
            None => true,
        }));

        for (pos, &input) in doc.iter().enumerate() {
            if !kept[pos] {
                continue;
            }
            let lo = pos.saturating_sub(window);
            let hi = (pos + window).min(doc.len() - 1);
            for ctx in lo..=hi {
                if ctx != pos && kept[ctx] {
                    pairs.push(TrainingPair::positive(input, doc[ctx]));
                }
            }
        }
    }
    pairs
}

/// Negative samples for a batch of positive pairs.
///
/// Emits `ratio.count(batch.len())` pairs. The i-th negative reuses the
/// input word of positive `i mod |batch|` and draws its output from `noise`.
pub fn sample_negatives<R: Rng + ?Sized>(
    batch: &[TrainingPair],
    noise: &NoiseDistribution,
    ratio: NegativeRatio,
    rng: &mut R,
) -> Vec<TrainingPair> {
    if batch.is_empty() {
        return Vec::new();
    }
    (0..ratio.count(batch.len()))
        .map(|i| TrainingPair {
            input: batch[i % batch.len()].input,
            output: noise.sample(rng),
            label: Label::Negative,
        })
        .collect()
}

/// Number of negative pairs per positive pair, as a fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NegativeRatio {
    numerator: u32,
    denominator: u32,
}

impl NegativeRatio {
    pub fn new(numerator: u32, denominator: u32) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::InvalidConfig("negative ratio denominator is zero".into()));
        }
        Ok(NegativeRatio {
            numerator,
            denominator,
        })
    }

    /// `k` negatives for every positive.
    pub fn per_positive(k: u32) -> Self {
        NegativeRatio {
            numerator: k,
            denominator: 1,
        }
    }

    pub fn numerator(&self) -> u32 {
        self.numerator
    }

    pub fn denominator(&self) -> u32 {
        self.denominator
    }

    /// `floor(ratio * positives)`.
    pub fn count(&self, positives: usize) -> usize {
        (positives as u64 * self.numerator as u64 / self.denominator as u64) as usize
    }
}

impl Default for NegativeRatio {
    fn default() -> Self {
        NegativeRatio {
            numerator: 3,
            denominator: 4,
        }
    }
}

impl fmt::Display for NegativeRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl FromStr for NegativeRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("bad negative ratio {s:?}, expected N or N/M"));
        match s.split_once('/') {
            Some((n, d)) => NegativeRatio::new(
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            ),
            None => Ok(NegativeRatio::per_positive(s.trim().parse().map_err(|_| bad())?)),
        }
    }
}

impl TryFrom<String> for NegativeRatio {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NegativeRatio> for String {
    fn from(r: NegativeRatio) -> String {
        r.to_string()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of an independent random stream: the base seed XOR a hash of the
/// slice id, further mixed with `salt` (epoch, stream purpose, ...).
pub fn stream_seed(seed: u64, slice: &SliceId, salt: u64) -> u64 {
    splitmix64(seed ^ fnv1a(slice.as_str().as_bytes()) ^ splitmix64(salt))
}

pub fn stream_rng(seed: u64, slice: &SliceId, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, slice, salt))
}
