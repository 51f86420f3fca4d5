//! LDA baseline: collapsed Gibbs sampling with fixed hyperparameters, and
//! fold-in inference of `p(t|d)` for unseen documents.

use rand::Rng;
use serde::Serialize;

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::eval::TopicModel;
use crate::rng::{derived_rng, rng};

#[derive(Debug, Clone, Serialize)]
pub struct GibbsConfig {
    pub n_topics: usize,
    pub alpha_m: Vec<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl GibbsConfig {
    /// Heuristic hyperparameters for `n` topics with default sweep counts.
    pub fn heuristic(n: usize, seed: u64) -> Self {
        let (alpha_m, beta) = heuristic_hypers(n);
        Self {
            n_topics: n,
            alpha_m,
            beta,
            iterations: 500,
            burn_in: 200,
            seed,
        }
    }
}

/// Symmetric `αm` with `α = 50/n`, and `β = 0.1`.
pub fn heuristic_hypers(n: usize) -> (Vec<f64>, f64) {
    let alpha = 50.0 / n as f64;
    (vec![alpha / n as f64; n], 0.1)
}

/// Sampler state. Counts are kept consistent with `z` after every sweep.
#[derive(Debug, Clone)]
pub struct GibbsState {
    /// Topic of every token, per document, in `Document::tokens` order.
    pub z: Vec<Vec<usize>>,
    pub n_tw: Vec<Vec<u32>>,
    pub n_dt: Vec<Vec<u32>>,
    pub n_t: Vec<u64>,
    pub alpha_m: Vec<f64>,
    pub beta: f64,
    pub iteration: usize,
    tokens: Vec<Vec<usize>>,
}

impl GibbsState {
    /// Random initial assignment.
    pub fn init<R: Rng>(corpus: &Corpus, alpha_m: Vec<f64>, beta: f64, rng: &mut R) -> Self {
        let n = alpha_m.len();
        let v = corpus.vocab_size();
        let tokens: Vec<Vec<usize>> = corpus.docs().iter().map(Document::tokens).collect();
        let mut st = Self {
            z: Vec::with_capacity(tokens.len()),
            n_tw: vec![vec![0; v]; n],
            n_dt: vec![vec![0; n]; tokens.len()],
            n_t: vec![0; n],
            alpha_m,
            beta,
            iteration: 0,
            tokens,
        };
        for d in 0..st.tokens.len() {
            let zs: Vec<usize> = st.tokens[d]
                .iter()
                .map(|&w| {
                    let t = rng.random_range(0..n);
                    st.n_tw[t][w] += 1;
                    st.n_dt[d][t] += 1;
                    st.n_t[t] += 1;
                    t
                })
                .collect();
            st.z.push(zs);
        }
        st
    }

    /// One full sweep over all tokens.
    pub fn sweep<R: Rng>(&mut self, rng: &mut R) {
        let n = self.alpha_m.len();
        let v = self.n_tw.first().map_or(0, Vec::len);
        let vbeta = v as f64 * self.beta;
        let mut p = vec![0.0; n];
        for d in 0..self.tokens.len() {
            for i in 0..self.tokens[d].len() {
                let w = self.tokens[d][i];
                let old = self.z[d][i];
                self.n_tw[old][w] -= 1;
                self.n_dt[d][old] -= 1;
                self.n_t[old] -= 1;
                let mut total = 0.0;
                for t in 0..n {
                    let x = (self.n_tw[t][w] as f64 + self.beta) / (self.n_t[t] as f64 + vbeta)
                        * (self.n_dt[d][t] as f64 + self.alpha_m[t]);
                    total += x;
                    p[t] = total;
                }
                let u = rng.random::<f64>() * total;
                let new = p.partition_point(|&c| c <= u).min(n - 1);
                self.z[d][i] = new;
                self.n_tw[new][w] += 1;
                self.n_dt[d][new] += 1;
                self.n_t[new] += 1;
            }
        }
        self.iteration += 1;
    }

    /// Recounts everything from `z` and compares against the kept counts.
    pub fn counts_consistent(&self) -> bool {
        let n = self.alpha_m.len();
        let v = self.n_tw.first().map_or(0, Vec::len);
        let mut n_tw = vec![vec![0u32; v]; n];
        let mut n_dt = vec![vec![0u32; n]; self.tokens.len()];
        let mut n_t = vec![0u64; n];
        for (d, zs) in self.z.iter().enumerate() {
            for (&t, &w) in zs.iter().zip(&self.tokens[d]) {
                n_tw[t][w] += 1;
                n_dt[d][t] += 1;
                n_t[t] += 1;
            }
        }
        let doc_sums = n_dt
            .iter()
            .zip(&self.tokens)
            .all(|(row, toks)| row.iter().map(|&c| c as usize).sum::<usize>() == toks.len());
        let topic_sums = n_tw
            .iter()
            .zip(&n_t)
            .all(|(row, &tot)| row.iter().map(|&c| c as u64).sum::<u64>() == tot);
        n_tw == self.n_tw && n_dt == self.n_dt && n_t == self.n_t && doc_sums && topic_sums
    }

    /// Point estimate `Φ_t(w) = (n_tw + β)/(n_t + |V|β)`, `m = αm/α`, `α = Σ αm`.
    pub fn to_model(&self, corpus: &Corpus) -> Result<TopicModel> {
        let v = corpus.vocab_size();
        let vbeta = v as f64 * self.beta;
        let phi = self
            .n_tw
            .iter()
            .zip(&self.n_t)
            .map(|(row, &nt)| {
                row.iter()
                    .map(|&c| (c as f64 + self.beta) / (nt as f64 + vbeta))
                    .collect()
            })
            .collect();
        let alpha: f64 = self.alpha_m.iter().sum();
        let m = self.alpha_m.iter().map(|&a| a / alpha).collect();
        TopicModel::new(corpus.vocab().words().to_vec(), phi, m, Some(alpha))
    }
}

fn check_config(cfg: &GibbsConfig) -> Result<()> {
    if cfg.n_topics == 0 || cfg.alpha_m.len() != cfg.n_topics {
        return Err(Error::invalid(format!(
            "{} topics with {} prior entries",
            cfg.n_topics,
            cfg.alpha_m.len()
        )));
    }
    if cfg.alpha_m.iter().any(|&a| !(a > 0.0)) || !(cfg.beta > 0.0) {
        return Err(Error::invalid("hyperparameters must be positive"));
    }
    if cfg.iterations <= cfg.burn_in {
        return Err(Error::invalid("iterations must exceed burn-in"));
    }
    Ok(())
}

/// Runs `cfg.iterations` sweeps and returns the model from the final sample.
/// `on_sweep` sees the state after every sweep.
pub fn gibbs_train_with(
    corpus: &Corpus,
    cfg: &GibbsConfig,
    mut on_sweep: impl FnMut(&GibbsState),
) -> Result<TopicModel> {
    check_config(cfg)?;
    let mut r = rng(cfg.seed);
    let mut st = GibbsState::init(corpus, cfg.alpha_m.clone(), cfg.beta, &mut r);
    for _ in 0..cfg.iterations {
        st.sweep(&mut r);
        on_sweep(&st);
    }
    st.to_model(corpus)
}

pub fn gibbs_train(corpus: &Corpus, cfg: &GibbsConfig) -> Result<TopicModel> {
    gibbs_train_with(corpus, cfg, |_| {})
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FoldInConfig {
    /// Independent chains.
    pub chains: usize,
    pub sweeps: usize,
    /// Leading sweeps of each chain that are not counted.
    pub discard: usize,
    pub seed: u64,
}

impl Default for FoldInConfig {
    fn default() -> Self {
        Self {
            chains: 10,
            sweeps: 50,
            discard: 20,
            seed: 0,
        }
    }
}

/// Estimates `p(t|d)` by Gibbs-sampling the document's token topics with `Φ`
/// held fixed. Each chain's post-burn-in samples contribute the topic
/// indicator frequencies; the result averages over chains and samples.
/// Chain `s` uses the stream derived from `(cfg.seed, s)`.
pub fn fold_in(model: &TopicModel, doc: &Document, cfg: &FoldInConfig) -> Result<Vec<f64>> {
    let n = model.n_topics();
    if cfg.chains == 0 || cfg.sweeps <= cfg.discard {
        return Err(Error::invalid("fold-in needs at least one chain and one kept sweep"));
    }
    let alpha = model
        .alpha
        .ok_or_else(|| Error::invalid("model alpha is unset"))?;
    let prior: Vec<f64> = model.m.iter().map(|&m| alpha * m).collect();
    let tokens = doc.tokens();
    if tokens.is_empty() {
        return Ok(model.m.clone());
    }
    if tokens.iter().any(|&w| w >= model.vocab_size()) {
        return Err(Error::invalid("document word outside the model vocabulary"));
    }
    let mut acc = vec![0.0; n];
    let mut p = vec![0.0; n];
    for s in 0..cfg.chains {
        let mut r = derived_rng(cfg.seed, s as u64);
        let mut counts = vec![0u32; n];
        let mut z: Vec<usize> = tokens
            .iter()
            .map(|&w| {
                let mut total = 0.0;
                for t in 0..n {
                    total += model.phi[t][w] * prior[t];
                    p[t] = total;
                }
                let t = p.partition_point(|&c| c <= r.random::<f64>() * total).min(n - 1);
                counts[t] += 1;
                t
            })
            .collect();
        for sweep in 0..cfg.sweeps {
            for (i, &w) in tokens.iter().enumerate() {
                counts[z[i]] -= 1;
                let mut total = 0.0;
                for t in 0..n {
                    total += model.phi[t][w] * (counts[t] as f64 + prior[t]);
                    p[t] = total;
                }
                let u = r.random::<f64>() * total;
                let t = p.partition_point(|&c| c <= u).min(n - 1);
                z[i] = t;
                counts[t] += 1;
            }
            if sweep >= cfg.discard {
                for t in 0..n {
                    acc[t] += counts[t] as f64;
                }
            }
        }
    }
    let total: f64 = acc.iter().sum();
    Ok(acc.into_iter().map(|x| x / total).collect())
}
