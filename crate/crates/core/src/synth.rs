//! Synthetic corpora with disjoint true topics.
//!
//! Word blocks `0..k`, `k..2k`, ... form the true topics. Each topic's word
//! distribution is a symmetric Dirichlet draw over its block, each document
//! draws a topic mixture from `Dirichlet(alpha_m)`, and every occurrence picks
//! its topic first and then a word. All randomness comes from a `ChaCha8Rng`
//! seeded with `SyntheticSpec::seed`.

use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Zipf};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Vocabulary, WordId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_topics: usize,
    pub words_per_topic: usize,
    pub n_docs: usize,
    pub doc_length: usize,
    pub beta_tilde: f64,
    pub alpha_m_tilde: Vec<f64>,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_topics: 4,
            words_per_topic: 100,
            n_docs: 6000,
            doc_length: 30,
            beta_tilde: 0.01,
            alpha_m_tilde: vec![5.0, 0.5, 0.5, 0.5],
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_topics == 0 || self.words_per_topic == 0 || self.n_docs == 0 || self.doc_length == 0 {
            return Err(Error::invalid("synthetic spec sizes must be positive"));
        }
        if self.alpha_m_tilde.len() != self.n_topics {
            return Err(Error::invalid(format!(
                "alpha_m_tilde has {} entries for {} topics",
                self.alpha_m_tilde.len(),
                self.n_topics
            )));
        }
        if !(self.beta_tilde > 0.0) || self.alpha_m_tilde.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::invalid("Dirichlet parameters must be positive"));
        }
        Ok(())
    }
}

/// Generator-side topics over the full generator vocabulary (words named
/// `"0"`, `"1"`, ...). Compare against models by word name, since corpora drop
/// words that were never drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueModel {
    pub vocab: Vec<String>,
    /// `n_topics` dense rows over `vocab`.
    pub topic_word: Vec<Vec<f64>>,
    pub word_topic: Vec<usize>,
}

impl TrueModel {
    pub fn n_topics(&self) -> usize {
        self.topic_word.len()
    }

    /// True topic of a word given by name.
    pub fn topic_of(&self, word: &str) -> Option<usize> {
        self.vocab.iter().position(|w| w == word).map(|i| self.word_topic[i])
    }
}

/// Draws from `Dirichlet(alpha)` as normalized Gamma variates. If every
/// component underflows (tiny parameters), the mass goes to one uniformly
/// chosen component.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
        .collect();
    let s: f64 = x.iter().sum();
    if s > 0.0 && s.is_finite() {
        x.iter_mut().for_each(|v| *v /= s);
    } else {
        // all components underflowed: put the mass on one uniformly chosen slot
        let k = rng.random_range(0..x.len());
        x.iter_mut().enumerate().for_each(|(i, v)| *v = if i == k { 1.0 } else { 0.0 });
    }
    x
}

/// Inverse-CDF draw from a discrete distribution given as a slice.
pub(crate) fn sample_discrete<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let total: f64 = p.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &pi) in p.iter().enumerate() {
        u -= pi;
        if u < 0.0 {
            return i;
        }
    }
    // rounding left u ≥ 0: take the last non-zero slot
    p.iter().rposition(|&pi| pi > 0.0).unwrap_or(p.len() - 1)
}

/// Generates a corpus and its true model. Words are named by their number
/// (`"0"`, `"1"`, ...), so block membership stays recoverable after the
/// vocabulary is compacted or split.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Corpus, TrueModel)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = spec.words_per_topic;
    let v = spec.n_topics * k;

    let mut topic_word = Vec::with_capacity(spec.n_topics);
    for t in 0..spec.n_topics {
        let block = sample_dirichlet(&vec![spec.beta_tilde; k], &mut rng);
        let mut row = vec![0.0; v];
        row[t * k..(t + 1) * k].copy_from_slice(&block);
        topic_word.push(row);
    }
    let word_topic = (0..v).map(|w| w / k).collect();

    let mut docs = Vec::with_capacity(spec.n_docs);
    for d in 0..spec.n_docs {
        let theta = sample_dirichlet(&spec.alpha_m_tilde, &mut rng);
        let tokens: Vec<WordId> = (0..spec.doc_length)
            .map(|_| {
                let t = sample_discrete(&theta, &mut rng);
                t * k + sample_discrete(&topic_word[t][t * k..(t + 1) * k], &mut rng)
            })
            .collect();
        docs.push(Document::from_tokens(d as u64, tokens));
    }

    let names: Vec<String> = (0..v).map(|w| w.to_string()).collect();
    let corpus = Corpus::new(Vocabulary::from_words(names.clone())?, docs)?;
    let truth = TrueModel {
        vocab: names,
        topic_word,
        word_topic,
    };
    Ok((corpus, truth))
}

/// Text-like corpus: every token is drawn independently from a Zipf law over
/// `n_types` word types. Distinct words grow sublinearly with the number of
/// tokens (Heaps' law) until the type pool saturates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipfSpec {
    pub n_docs: usize,
    pub doc_length: usize,
    pub n_types: usize,
    pub exponent: f64,
    pub seed: u64,
}

impl Default for ZipfSpec {
    fn default() -> Self {
        Self {
            n_docs: 1000,
            doc_length: 40,
            n_types: 50_000,
            exponent: 1.1,
            seed: 0,
        }
    }
}

pub fn generate_zipf(spec: &ZipfSpec) -> Result<Corpus> {
    if spec.n_docs == 0 || spec.doc_length == 0 || spec.n_types == 0 {
        return Err(Error::invalid("zipf spec sizes must be positive"));
    }
    let zipf = Zipf::new(spec.n_types as f64, spec.exponent)
        .map_err(|e| Error::invalid(format!("zipf law: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let docs = (0..spec.n_docs)
        .map(|d| {
            let tokens: Vec<WordId> = (0..spec.doc_length)
                .map(|_| zipf.sample(&mut rng) as WordId - 1)
                .collect();
            Document::from_tokens(d as u64, tokens)
        })
        .collect();
    let names = (0..spec.n_types).map(|w| format!("w{w}"));
    Corpus::new(Vocabulary::from_words(names)?, docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            n_docs: 300,
            seed,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn default_shape() {
        let (c, truth) = generate_synthetic(&SyntheticSpec::with_seed(1)).unwrap();
        assert_eq!(c.num_docs(), 6000);
        assert!(c.docs().iter().all(|d| d.len() == 30));
        assert!(c.vocab_size() <= 400);
        assert_eq!(truth.n_topics(), 4);
        for row in &truth.topic_word {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn truth_blocks_are_disjoint_and_cover() {
        let (c, truth) = generate_synthetic(&small(2)).unwrap();
        assert_eq!(truth.vocab.len(), 400);
        for w in 0..400 {
            let support: Vec<usize> = (0..4).filter(|&t| truth.topic_word[t][w] > 0.0).collect();
            assert!(support.len() <= 1);
            assert_eq!(truth.word_topic[w], w / 100);
            if let Some(&t) = support.first() {
                assert_eq!(t, truth.word_topic[w]);
            }
        }
        // every corpus word is a generator word
        assert!(c.vocab().words().iter().all(|w| truth.topic_of(w).is_some()));
    }

    #[test]
    fn seeds_control_output() {
        let (a, _) = generate_synthetic(&small(5)).unwrap();
        let (b, _) = generate_synthetic(&small(5)).unwrap();
        let (c, _) = generate_synthetic(&small(6)).unwrap();
        assert_eq!(a.docs(), b.docs());
        assert_ne!(a.docs(), c.docs());
    }

    #[test]
    fn rejects_bad_spec() {
        let mut s = small(0);
        s.alpha_m_tilde = vec![1.0; 3];
        assert!(generate_synthetic(&s).is_err());
        s.alpha_m_tilde = vec![1.0, 1.0, 0.0, 1.0];
        assert!(generate_synthetic(&s).is_err());
    }

    #[test]
    fn zipf_vocabulary_grows_sublinearly() {
        let spec = |n_docs| ZipfSpec {
            n_docs,
            doc_length: 20,
            n_types: 20_000,
            exponent: 1.1,
            seed: 3,
        };
        let small = generate_zipf(&spec(200)).unwrap();
        let large = generate_zipf(&spec(800)).unwrap();
        let growth = large.vocab_size() as f64 / small.vocab_size() as f64;
        assert!(growth > 1.5 && growth < 4.0, "growth {growth}");
        // the most frequent type is the first one
        let top = (0..large.vocab_size()).max_by_key(|&w| large.freq(w)).unwrap();
        assert_eq!(large.vocab().word(top), "w0");
    }

    #[test]
    fn dirichlet_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = sample_dirichlet(&[0.01; 50], &mut rng);
            assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
