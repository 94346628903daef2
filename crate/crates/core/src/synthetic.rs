//! Generated corpora with known structure.
//!
//! Documents mix a Zipf-weighted pool of function words with words of one
//! of two topics, [`MONEY`] and [`RIVER`]. Pivot words are planted into
//! topic documents with a per-slice topic share, so their contexts (and
//! nothing else) differ between slices by a controlled amount.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{SliceCorpus, SliceId};

pub const MONEY: [&str; 8] = ["money", "loan", "cash", "deposit", "credit", "interest", "account", "finance"];
pub const RIVER: [&str; 8] = ["river", "water", "shore", "fish", "boat", "stream", "mud", "flood"];
pub const GENERAL: [&str; 22] = [
    "the", "of", "and", "a", "to", "in", "is", "it", "that", "was", "for", "on", "are", "with", "as", "at", "be",
    "this", "have", "from", "or", "by",
];
/// The default pivot of [`drift_pair`].
pub const PIVOT: &str = "bank";

const DOC_LEN: usize = 20;
/// Chance that a token of a topic document is a topic word.
const TOPIC_TOKEN: f64 = 0.5;
/// Chance that a pivot is planted into a document of its current topic.
const PIVOT_RATE: f64 = 0.6;

#[derive(Clone, Copy, PartialEq)]
enum Topic {
    Money,
    River,
    None,
}

fn slice_id(i: usize) -> SliceId {
    SliceId::new(format!("s{}", i + 1)).unwrap()
}

fn general_weights() -> WeightedIndex<f64> {
    WeightedIndex::new((0..GENERAL.len()).map(|r| 1.0 / (r as f64 + 1.0))).unwrap()
}

/// One slice of topic documents. Each pivot lands in river documents with
/// probability `river_share` per occurrence and in money documents
/// otherwise.
pub fn topic_slice(id: SliceId, tokens: usize, pivots: &[&str], river_share: f64, rng: &mut impl Rng) -> SliceCorpus {
    let general = general_weights();
    let mut corpus = SliceCorpus::new(id);
    let mut produced = 0;
    while produced < tokens {
        let topic = match rng.random::<f64>() {
            x if x < 0.4 => Topic::Money,
            x if x < 0.8 => Topic::River,
            _ => Topic::None,
        };
        let mut doc: Vec<String> = (0..DOC_LEN)
            .map(|_| {
                let pool = match topic {
                    Topic::Money => Some(&MONEY),
                    Topic::River => Some(&RIVER),
                    Topic::None => None,
                };
                match pool {
                    Some(p) if rng.random::<f64>() < TOPIC_TOKEN => p.choose(rng).unwrap().to_string(),
                    _ => GENERAL[general.sample(rng)].to_string(),
                }
            })
            .collect();
        if topic != Topic::None {
            for &p in pivots {
                let pivot_topic = if rng.random::<f64>() < river_share {
                    Topic::River
                } else {
                    Topic::Money
                };
                if pivot_topic == topic && rng.random::<f64>() < PIVOT_RATE {
                    let at = rng.random_range(0..=doc.len());
                    doc.insert(at, p.to_string());
                }
            }
        }
        produced += doc.len();
        corpus.documents.push(doc);
    }
    corpus
}

/// Slices `s1, s2, ...` with pivot river shares taken from `shares`.
pub fn topic_slices(shares: &[f64], pivots: &[&str], tokens_per_slice: usize, seed: u64) -> Vec<SliceCorpus> {
    shares
        .iter()
        .enumerate()
        .map(|(i, &share)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            topic_slice(slice_id(i), tokens_per_slice, pivots, share, &mut rng)
        })
        .collect()
}

/// Two slices in which [`PIVOT`] keeps company with money words in `s1`
/// and river words in `s2`; every other word has the same distribution.
pub fn drift_pair(tokens_per_slice: usize, seed: u64) -> Vec<SliceCorpus> {
    topic_slices(&[0.0, 1.0], &[PIVOT], tokens_per_slice, seed)
}

/// `n` slices drawn from one distribution, without pivots.
pub fn stable_slices(n: usize, tokens_per_slice: usize, seed: u64) -> Vec<SliceCorpus> {
    topic_slices(&vec![0.0; n], &[], tokens_per_slice, seed)
}

/// Slices whose vocabularies overlap only partly: a shared pool, words
/// private to each slice and words shared by neighbouring slices.
pub fn partial_vocab_slices(n: usize, tokens_per_slice: usize, seed: u64) -> Vec<SliceCorpus> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64 + 1).wrapping_mul(0x2545_f491_4f6c_dd1d));
            let mut words: Vec<String> = GENERAL[..12].iter().map(|w| w.to_string()).collect();
            words.extend((0..6).map(|j| format!("own{}x{j}", i + 1)));
            words.extend((0..3).map(|j| format!("pair{}x{j}", i + 1)));
            if i > 0 {
                words.extend((0..3).map(|j| format!("pair{i}x{j}")));
            }
            let weights = WeightedIndex::new((0..words.len()).map(|r| 1.0 / (r as f64 + 2.0))).unwrap();
            let mut corpus = SliceCorpus::new(slice_id(i));
            let mut produced = 0;
            while produced < tokens_per_slice {
                let doc: Vec<String> = (0..16).map(|_| words[weights.sample(&mut rng)].clone()).collect();
                produced += doc.len();
                corpus.documents.push(doc);
            }
            corpus
        })
        .collect()
}
