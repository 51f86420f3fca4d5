use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::TopicModel;
use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::rng::{derived_rng, rng};

pub const DEFAULT_PARTICLES: usize = 20;

/// Left-to-right sequential estimate of `ln p(d | Φ, αm)`.
///
/// The bag is expanded into tokens in ascending word-id order. `particles`
/// particles each carry topic counts `c_t` over the tokens seen so far. At
/// position `j` every particle predicts `p_r = Σ_t Φ_t(w_j)(c_t + αm_t)/(j + α)`
/// and `ln((1/R) Σ_r p_r)` is added to the estimate. Particles are then
/// resampled in proportion to `p_r` and each draws `z_j ∝ Φ_t(w_j)(c_t + αm_t)`.
/// The resampling makes the product of per-position averages an unbiased
/// estimate of `p(d)`.
pub fn log_prob_doc_lrs(model: &TopicModel, doc: &Document, particles: usize, seed: u64) -> Result<f64> {
    let mut rng = rng(seed);
    lrs_with(model, doc, particles, &mut rng)
}

fn lrs_with<R: Rng>(model: &TopicModel, doc: &Document, particles: usize, rng: &mut R) -> Result<f64> {
    if particles == 0 {
        return Err(Error::invalid("at least one particle is required"));
    }
    let alpha = model
        .alpha
        .ok_or_else(|| Error::invalid("model alpha is unset; fit or set it first"))?;
    let n = model.n_topics();
    let prior: Vec<f64> = model.m.iter().map(|&m| alpha * m).collect();

    let mut counts = vec![0u32; particles * n];
    let mut next = vec![0u32; particles * n];
    // per particle: unnormalized z-weights for the current token
    let mut weights = vec![0.0f64; particles * n];
    let mut pred = vec![0.0f64; particles];
    let mut cum = vec![0.0f64; particles];
    let mut total = 0.0;

    for (j, w) in doc.tokens().into_iter().enumerate() {
        if w >= model.vocab_size() {
            return Err(Error::invalid(format!("word id {w} outside the model vocabulary")));
        }
        let denom = j as f64 + alpha;
        for r in 0..particles {
            let c = &counts[r * n..(r + 1) * n];
            let wt = &mut weights[r * n..(r + 1) * n];
            let mut s = 0.0;
            for t in 0..n {
                let x = model.phi[t][w] * (c[t] as f64 + prior[t]);
                wt[t] = x;
                s += x;
            }
            pred[r] = s / denom;
        }
        let mean = pred.iter().sum::<f64>() / particles as f64;
        if !(mean > 0.0) {
            return Err(Error::DegenerateModel(format!(
                "word {:?} has zero probability under every topic",
                model.vocab[w]
            )));
        }
        total += mean.ln();

        // resample ancestors ∝ p_r, then draw z_j per particle
        let mut acc = 0.0;
        for r in 0..particles {
            acc += pred[r];
            cum[r] = acc;
        }
        for r in 0..particles {
            let u = rng.random::<f64>() * acc;
            let a = cum.partition_point(|&x| x <= u).min(particles - 1);
            let src = &weights[a * n..(a + 1) * n];
            let ws: f64 = src.iter().sum();
            let mut v = rng.random::<f64>() * ws;
            let mut z = n - 1;
            for (t, &x) in src.iter().enumerate() {
                v -= x;
                if v < 0.0 {
                    z = t;
                    break;
                }
            }
            if src[z] == 0.0 {
                z = src.iter().rposition(|&x| x > 0.0).unwrap_or(z);
            }
            next[r * n..(r + 1) * n].copy_from_slice(&counts[a * n..(a + 1) * n]);
            next[r * n + z] += 1;
        }
        std::mem::swap(&mut counts, &mut next);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerplexityReport {
    pub total_log_prob: f64,
    pub token_count: u64,
    pub perplexity: f64,
    /// `(doc id, ln p(d), |d|)`
    pub per_doc: Vec<(u64, f64, u64)>,
    pub particles: usize,
    pub seed: u64,
}

/// Held-out perplexity `exp(−Σ ln p(d) / Σ |d|)`. Document `d` uses the stream
/// derived from `(seed, d.id)`, so reordering the test set changes nothing.
pub fn perplexity(model: &TopicModel, test: &Corpus, particles: usize, seed: u64) -> Result<PerplexityReport> {
    if test.num_docs() == 0 {
        return Err(Error::EmptyCorpus("test set is empty".into()));
    }
    model.check_corpus(test)?;
    let per_doc = test
        .docs()
        .par_iter()
        .map(|d| {
            let mut r = derived_rng(seed, d.id);
            lrs_with(model, d, particles, &mut r).map(|lp| (d.id, lp, d.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sorted: Vec<f64> = per_doc.iter().map(|&(_, lp, _)| lp).collect();
    // order-independent sum
    sorted.sort_by(f64::total_cmp);
    let total_log_prob: f64 = sorted.iter().sum();
    let token_count: u64 = per_doc.iter().map(|&(_, _, n)| n).sum();
    Ok(PerplexityReport {
        total_log_prob,
        token_count,
        perplexity: (-total_log_prob / token_count as f64).exp(),
        per_doc,
        particles,
        seed,
    })
}

/// Settings for the concentration search.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaSearch {
    pub particles: usize,
    pub seed: u64,
    pub iterations: usize,
    pub log10_lo: f64,
    pub log10_hi: f64,
    /// Evaluate on at most this many training documents (the first ones).
    pub max_docs: Option<usize>,
}

impl Default for AlphaSearch {
    fn default() -> Self {
        Self {
            particles: DEFAULT_PARTICLES,
            seed: 0,
            iterations: 20,
            log10_lo: -2.0,
            log10_hi: 2.0,
            max_docs: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaTrace {
    pub alpha: f64,
    /// `(alpha, training perplexity)` for every evaluation, in order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Golden-section search over `log10 α` for the lowest training perplexity.
/// Both interval ends are evaluated too; the returned `α` is the best point
/// seen, preferring the final interior point on ties.
pub fn fit_alpha(model: &TopicModel, train: &Corpus, cfg: &AlphaSearch) -> Result<(TopicModel, AlphaTrace)> {
    model.check_corpus(train)?;
    let subset;
    let train = match cfg.max_docs {
        Some(k) if k < train.num_docs() => {
            subset = Corpus::with_vocabulary(train.vocab().clone(), train.docs()[..k].to_vec())?;
            &subset
        }
        _ => train,
    };
    let mut evaluations = Vec::new();
    let mut objective = |x: f64| -> Result<f64> {
        let a = 10f64.powf(x);
        let p = perplexity(&model.clone().with_alpha(a), train, cfg.particles, cfg.seed)?.perplexity;
        if !p.is_finite() {
            return Err(Error::DegenerateModel(format!("training perplexity {p} at alpha {a}")));
        }
        evaluations.push((a, p));
        Ok(p)
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (cfg.log10_lo, cfg.log10_hi);
    let f_lo = objective(lo)?;
    let f_hi = objective(hi)?;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    for _ in 0..cfg.iterations {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2)?;
        }
    }
    let (mut best_x, mut best_f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for (x, f) in [(cfg.log10_lo, f_lo), (cfg.log10_hi, f_hi)] {
        if f < best_f {
            best_x = x;
            best_f = f;
        }
    }
    let alpha = 10f64.powf(best_x);
    Ok((model.clone().with_alpha(alpha), AlphaTrace { alpha, evaluations }))
}
