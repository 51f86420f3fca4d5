//! Independent reference implementations used as test oracles. Nothing here
//! calls the library's scoring, estimation or assignment code.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use topic_grouper::synth::TrueModel;
use topic_grouper::{Corpus, Document, TopicModel, Vocabulary};

/// `h(t)` straight from its definition, natural log.
pub fn h_oracle(corpus: &Corpus, words: &[usize]) -> f64 {
    let mut doc_part = 0.0;
    for d in corpus.docs() {
        let fdt: u64 = words.iter().map(|&w| d.count(w) as u64).sum();
        if fdt > 0 {
            doc_part += fdt as f64 * ((fdt as f64).ln() - (d.len() as f64).ln());
        }
    }
    let mut word_part = 0.0;
    let mut ft = 0u64;
    for &w in words {
        let f = corpus.freq(w);
        ft += f;
        word_part += f as f64 * (f as f64).ln();
    }
    doc_part + word_part - ft as f64 * (ft as f64).ln()
}

pub fn delta_oracle(corpus: &Corpus, s: &[usize], t: &[usize]) -> f64 {
    let mut u: Vec<usize> = s.iter().chain(t).copied().collect();
    u.sort_unstable();
    h_oracle(corpus, &u) - h_oracle(corpus, s) - h_oracle(corpus, t)
}

/// `Σ_d Σ_w f_d(w) ln(f_d(w)/|d|)`: the singleton partition's likelihood.
pub fn singleton_likelihood(corpus: &Corpus) -> f64 {
    corpus
        .docs()
        .iter()
        .flat_map(|d| {
            let len = d.len() as f64;
            d.counts().iter().map(move |&(_, c)| c as f64 * (c as f64 / len).ln())
        })
        .sum()
}

/// `Σ_w f(w) ln(f(w)/f(V))`.
pub fn unigram_likelihood(corpus: &Corpus) -> f64 {
    let total = corpus.total_tokens() as f64;
    corpus
        .freqs()
        .iter()
        .map(|&f| f as f64 * (f as f64 / total).ln())
        .sum()
}

pub fn relative_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Random corpus with `2..=max_v` words and `1..=max_d` documents; every
/// word occurs at least once.
pub fn random_corpus<R: Rng>(rng: &mut R, max_v: usize, max_d: usize, max_count: u32) -> Corpus {
    loop {
        let v = rng.random_range(2..=max_v);
        let n_docs = rng.random_range(1..=max_d);
        let mut docs: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n_docs];
        for w in 0..v {
            let d = rng.random_range(0..n_docs);
            docs[d].push((w, rng.random_range(1..=max_count)));
        }
        for doc in docs.iter_mut() {
            for w in 0..v {
                if rng.random_bool(0.3) {
                    doc.push((w, rng.random_range(1..=max_count)));
                }
            }
        }
        let names: Vec<String> = (0..v).map(|w| format!("w{w}")).collect();
        let docs = docs
            .into_iter()
            .enumerate()
            .map(|(i, c)| Document::from_counts(i as u64, c))
            .collect();
        if let Ok(c) = Corpus::new(Vocabulary::from_words(names).unwrap(), docs) {
            if c.vocab_size() >= 2 {
                return c;
            }
        }
    }
}

/// Error rate by enumerating every bijection, aligning words by name.
pub fn error_rate_oracle(model: &TopicModel, truth: &TrueModel) -> f64 {
    let n = truth.topic_word.len();
    assert_eq!(model.phi.len(), n);
    let index: HashMap<&str, usize> = model.vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let cost = |t: usize, s: usize| -> f64 {
        truth
            .vocab
            .iter()
            .enumerate()
            .map(|(w, name)| {
                let p = index.get(name.as_str()).map_or(0.0, |&i| model.phi[t][i]);
                (p - truth.topic_word[s][w]).abs()
            })
            .sum()
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permutations(&mut perm, 0, &mut |p| {
        let total: f64 = (0..n).map(|t| cost(t, p[t])).sum();
        best = best.min(total);
    });
    best / (2.0 * n as f64)
}

pub fn permutations(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

/// `p(d)` for the token sequence in ascending word order, summing over every
/// topic assignment of the Dirichlet-multinomial mixture.
pub fn doc_prob_enumerated(model: &TopicModel, tokens: &[usize]) -> f64 {
    let n = model.phi.len();
    let alpha = model.alpha.unwrap();
    let l = tokens.len();
    let mut total = 0.0;
    let mut z = vec![0usize; l];
    loop {
        let mut counts = vec![0.0; n];
        let mut p = 1.0;
        for (j, (&w, &t)) in tokens.iter().zip(&z).enumerate() {
            p *= model.phi[t][w] * (counts[t] + alpha * model.m[t]) / (j as f64 + alpha);
            counts[t] += 1.0;
        }
        total += p;
        // next assignment in base n
        let mut i = 0;
        while i < l {
            z[i] += 1;
            if z[i] < n {
                break;
            }
            z[i] = 0;
            i += 1;
        }
        if i == l {
            return total;
        }
    }
}

/// Plain multinomial Naive Bayes over words with add-one Lidstone smoothing.
pub struct WordNb {
    log_prior: Vec<f64>,
    log_cond: Vec<Vec<f64>>,
}

impl WordNb {
    pub fn train(corpus: &Corpus, labels: &[usize], n_classes: usize) -> Self {
        let v = corpus.vocab_size();
        let mut docs = vec![0.0; n_classes];
        let mut counts = vec![vec![0.0; v]; n_classes];
        for (d, &c) in corpus.docs().iter().zip(labels) {
            docs[c] += 1.0;
            for &(w, x) in d.counts() {
                counts[c][w] += x as f64;
            }
        }
        let total: f64 = docs.iter().sum();
        WordNb {
            log_prior: docs.iter().map(|&x| (x / total).ln()).collect(),
            log_cond: counts
                .iter()
                .map(|row| {
                    let denom = v as f64 + row.iter().sum::<f64>();
                    row.iter().map(|&x| ((1.0 + x) / denom).ln()).collect()
                })
                .collect(),
        }
    }

    pub fn classify(&self, d: &Document) -> usize {
        let score = |c: usize| {
            self.log_prior[c] + d.counts().iter().map(|&(w, x)| x as f64 * self.log_cond[c][w]).sum::<f64>()
        };
        let mut best = 0;
        for c in 1..self.log_prior.len() {
            if score(c) > score(best) {
                best = c;
            }
        }
        best
    }
}
