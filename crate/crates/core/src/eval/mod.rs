//! Evaluable topic models and the measures computed on them.
//!
//! Every model (Topic Grouper cut, unigram, perfect, LDA) is brought into the
//! same [`TopicModel`] form: topic-word rows `Φ`, a prior direction `m` and a
//! concentration `α`. Held-out quality is measured by perplexity under the
//! Dirichlet-mixture document likelihood, and against synthetic ground truth
//! by the error rate.

mod error_rate;
mod hungarian;
mod lrs;

pub use error_rate::{error_rate, error_rate_brute_force, error_rate_hungarian, topic_cost_matrix};
pub use hungarian::min_cost_assignment;
pub use lrs::{
    fit_alpha, log_prob_doc_lrs, perplexity, AlphaSearch, AlphaTrace, PerplexityReport, DEFAULT_PARTICLES,
};

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::synth::TrueModel;
use crate::tg::Dendrogram;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub version: u32,
    /// Word surface strings; column `w` of `phi` belongs to `vocab[w]`.
    pub vocab: Vec<String>,
    /// One dense distribution over `vocab` per topic.
    pub phi: Vec<Vec<f64>>,
    pub m: Vec<f64>,
    /// Dirichlet concentration; unset until fitted.
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl TopicModel {
    pub fn new(vocab: Vec<String>, phi: Vec<Vec<f64>>, m: Vec<f64>, alpha: Option<f64>) -> Result<Self> {
        let model = Self {
            version: MODEL_VERSION,
            vocab,
            phi,
            m,
            alpha,
            meta: None,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn n_topics(&self) -> usize {
        self.phi.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.phi.len();
        if n == 0 || self.m.len() != n {
            return Err(Error::invalid(format!("{n} topic rows with {} prior entries", self.m.len())));
        }
        let v = self.vocab.len();
        let mut covered = vec![false; v];
        for (t, row) in self.phi.iter().enumerate() {
            if row.len() != v {
                return Err(Error::invalid(format!("topic {t} has {} columns, vocabulary {v}", row.len())));
            }
            if row.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::invalid(format!("topic {t} has a negative or NaN entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("topic {t} sums to {s}")));
            }
            for (c, &p) in covered.iter_mut().zip(row) {
                *c |= p > 0.0;
            }
        }
        if let Some(w) = covered.iter().position(|c| !c) {
            return Err(Error::invalid(format!("word {:?} has zero probability in every topic", self.vocab[w])));
        }
        let ms: f64 = self.m.iter().sum();
        if (ms - 1.0).abs() > 1e-9 || self.m.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::invalid(format!("prior direction sums to {ms}")));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::invalid(format!("alpha {a} is not positive")));
            }
        }
        Ok(())
    }

    /// Checks that a corpus is expressed over this model's vocabulary.
    pub fn check_corpus(&self, corpus: &Corpus) -> Result<()> {
        if corpus.vocab().words() != self.vocab.as_slice() {
            return Err(Error::invalid("corpus vocabulary differs from the model vocabulary"));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let m: TopicModel = serde_json::from_reader(BufReader::new(f))?;
        if m.version != MODEL_VERSION {
            return Err(Error::Version(m.version));
        }
        m.validate()?;
        Ok(m)
    }
}

/// Converts the cut `T(n)` into a model: `Φ_t(w) = f(w)/f(t)` for `w ∈ t`,
/// `m_t = f(t)/Σ f`. Frequencies come from `corpus`, which must be the
/// training corpus of the dendrogram.
pub fn tg_to_model(dendrogram: &Dendrogram, corpus: &Corpus, n: usize) -> Result<TopicModel> {
    if corpus.vocab().words() != dendrogram.vocab.as_slice() {
        return Err(Error::invalid("corpus vocabulary differs from the dendrogram vocabulary"));
    }
    let view = dendrogram.flat_view(n)?;
    let v = corpus.vocab_size();
    let total: u64 = view.topics.iter().map(|t| t.f).sum();
    let mut phi = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    for t in &view.topics {
        let mut row = vec![0.0; v];
        for &w in &t.words {
            row[w] = corpus.freq(w) as f64 / t.f as f64;
        }
        phi.push(row);
        m.push(t.f as f64 / total as f64);
    }
    TopicModel::new(corpus.vocab().words().to_vec(), phi, m, None)
}

/// Single-topic model `Φ(w) = f(w)/Σ f`.
pub fn unigram_model(corpus: &Corpus) -> TopicModel {
    let total = corpus.total_tokens() as f64;
    let row = corpus.freqs().iter().map(|&f| f as f64 / total).collect();
    TopicModel::new(corpus.vocab().words().to_vec(), vec![row], vec![1.0], None)
        .expect("corpus frequencies are positive")
}

/// The unigram row repeated `n` times with a uniform `m`; comparable to
/// `n`-topic models by error rate, and with the same perplexity as
/// [`unigram_model`].
pub fn unigram_model_n(corpus: &Corpus, n: usize) -> Result<TopicModel> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let u = unigram_model(corpus);
    TopicModel::new(u.vocab, vec![u.phi[0].clone(); n], vec![1.0 / n as f64; n], None)
}

/// Training-data estimates under the true word-topic assignment.
pub fn perfect_model(truth: &TrueModel, train: &Corpus) -> Result<TopicModel> {
    let n = truth.n_topics();
    let v = train.vocab_size();
    let mut block_f = vec![0u64; n];
    let mut topic = Vec::with_capacity(v);
    for (w, word) in train.vocab().words().iter().enumerate() {
        let t = truth
            .topic_of(word)
            .ok_or_else(|| Error::invalid(format!("word {word:?} is unknown to the true model")))?;
        block_f[t] += train.freq(w);
        topic.push(t);
    }
    if let Some(t) = block_f.iter().position(|&f| f == 0) {
        return Err(Error::invalid(format!("true topic {t} has no training occurrences")));
    }
    let mut phi = vec![vec![0.0; v]; n];
    for (w, &t) in topic.iter().enumerate() {
        phi[t][w] = train.freq(w) as f64 / block_f[t] as f64;
    }
    let total: u64 = block_f.iter().sum();
    let m = block_f.iter().map(|&f| f as f64 / total as f64).collect();
    TopicModel::new(train.vocab().words().to_vec(), phi, m, None)
}
