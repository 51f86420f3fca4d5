//! Topic Grouper: agglomerative clustering of vocabulary words into disjoint
//! topics, greedily maximizing the plug-in log-likelihood `Σ_t h(t)`.
//!
//! For a topic `t` (a set of words),
//!
//! ```text
//! h(t) = Σ_{d: f_d(t)>0} f_d(t)·(ln f_d(t) − ln |d|) + Σ_{w∈t} f(w)·ln f(w) − f(t)·ln f(t)
//! ```
//!
//! and joining `s` and `t` changes the total by `Δh(s,t) = h(s∪t) − h(s) − h(t) ≤ 0`.
//! Two trainers produce the same merge sequence: [`train_ehac`] keeps one
//! priority queue per topic (quadratic memory), [`train_mehac`] keeps only each
//! topic's best partner (linear memory).
//!
//! Ties between equal `Δh` values are broken by preferring the pair whose
//! topics are smallest under the order "smallest contained word id".

mod dendrogram;
mod ehac;
mod mehac;

pub use dendrogram::{delta_h_series, Dendrogram, FlatTopic, FlatView, Merge, SeriesRow, DENDROGRAM_VERSION};
pub use ehac::{train_ehac, train_ehac_with, EhacConfig};
pub use mehac::{train_mehac, train_mehac_with_stats, MehacStats};

use std::cmp::Ordering;

use crate::corpus::{Corpus, WordId};

pub type TopicId = usize;

/// `x·ln x` with the convention `0·ln 0 = 0`.
#[inline]
pub(crate) fn xlogx(x: u64) -> f64 {
    if x == 0 {
        0.0
    } else {
        let x = x as f64;
        x * x.ln()
    }
}

/// Cached per-corpus quantities used by every `h` evaluation.
pub(crate) struct Scorer<'a> {
    corpus: &'a Corpus,
    log_len: Vec<f64>,
    /// `x ln x` for every `x` up to the longest document.
    xlx: Vec<f64>,
}

impl<'a> Scorer<'a> {
    pub(crate) fn new(corpus: &'a Corpus) -> Self {
        let log_len = corpus.docs().iter().map(|d| (d.len() as f64).ln()).collect();
        let max_len = corpus.docs().iter().map(|d| d.len()).max().unwrap_or(0);
        let xlx = (0..=max_len).map(xlogx).collect();
        Self { corpus, log_len, xlx }
    }

    #[inline]
    fn g(&self, x: u32) -> f64 {
        self.xlx[x as usize]
    }

    pub(crate) fn singleton(&self, id: TopicId, w: WordId) -> TopicState {
        let postings = self.corpus.postings(w).to_vec();
        let h = postings
            .iter()
            .map(|&(d, c)| self.g(c) - c as f64 * self.log_len[d as usize])
            .sum();
        let f = self.corpus.freq(w);
        TopicState {
            id,
            words: vec![w],
            f,
            i: xlogx(f),
            h,
            doc_freq: postings,
        }
    }

    /// `Σ_d (a_d + b_d)(ln(a_d + b_d) − ln|d|)` over the union of supports.
    fn doc_term(&self, a: &[(u32, u32)], b: &[(u32, u32)]) -> f64 {
        let mut sum = 0.0;
        merge_walk(a, b, |d, x, y| {
            let c = x + y;
            sum += self.g(c) - c as f64 * self.log_len[d as usize];
        });
        sum
    }

    /// `h(s∪t)` from cached `f`, `i` and per-document frequencies.
    pub(crate) fn h_merged(&self, s: &TopicState, t: &TopicState) -> f64 {
        let f = s.f + t.f;
        self.doc_term(&s.doc_freq, &t.doc_freq) + s.i + t.i - xlogx(f)
    }

    /// `Δh(s,t)` in difference form. Documents containing only one of the two
    /// topics contribute exactly zero, so only the shared support is summed;
    /// this keeps `Δh` free of the cancellation error of `h(s∪t) − h(s) − h(t)`.
    pub(crate) fn delta(&self, s: &TopicState, t: &TopicState) -> f64 {
        let mut shared = 0.0;
        intersect_walk(&s.doc_freq, &t.doc_freq, |x, y| {
            shared += self.g(x + y) - (self.g(x) + self.g(y));
        });
        // grouped sums keep the result bit-identical under swapping s and t
        shared - (xlogx(s.f + t.f) - (xlogx(s.f) + xlogx(t.f)))
    }

    pub(crate) fn join(&self, id: TopicId, s: &TopicState, t: &TopicState, delta_h: f64) -> TopicState {
        let mut words = Vec::with_capacity(s.words.len() + t.words.len());
        words.extend_from_slice(&s.words);
        words.extend_from_slice(&t.words);
        words.sort_unstable();
        let mut doc_freq = Vec::with_capacity(s.doc_freq.len() + t.doc_freq.len());
        merge_walk(&s.doc_freq, &t.doc_freq, |d, x, y| doc_freq.push((d, x + y)));
        TopicState {
            id,
            words,
            f: s.f + t.f,
            i: s.i + t.i,
            h: s.h + t.h + delta_h,
            doc_freq,
        }
    }
}

/// Walks two doc-sorted sparse lists, calling `f(doc, a, b)` for every document
/// in the union (missing side = 0).
#[inline]
fn merge_walk(a: &[(u32, u32)], b: &[(u32, u32)], mut f: impl FnMut(u32, u32, u32)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (da, ca) = a[i];
        let (db, cb) = b[j];
        match da.cmp(&db) {
            Ordering::Less => {
                f(da, ca, 0);
                i += 1;
            }
            Ordering::Greater => {
                f(db, 0, cb);
                j += 1;
            }
            Ordering::Equal => {
                f(da, ca, cb);
                i += 1;
                j += 1;
            }
        }
    }
    a[i..].iter().for_each(|&(d, c)| f(d, c, 0));
    b[j..].iter().for_each(|&(d, c)| f(d, 0, c));
}

#[inline]
fn intersect_walk(a: &[(u32, u32)], b: &[(u32, u32)], mut f: impl FnMut(u32, u32)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                f(a[i].1, b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
}

/// A live topic during agglomeration.
#[derive(Debug, Clone)]
pub struct TopicState {
    pub id: TopicId,
    /// Sorted member word ids.
    pub words: Vec<WordId>,
    /// `f(t)`.
    pub f: u64,
    /// `i(t) = Σ_{w∈t} f(w)·ln f(w)`.
    pub i: f64,
    pub h: f64,
    /// `(doc-index, f_d(t))` sorted by doc index, no zero entries.
    pub doc_freq: Vec<(u32, u32)>,
}

impl TopicState {
    pub fn singleton(corpus: &Corpus, w: WordId) -> Self {
        Scorer::new(corpus).singleton(w, w)
    }

    /// Smallest member word id: the topic's position in the tie-break order.
    pub fn order_key(&self) -> WordId {
        self.words[0]
    }
}

/// `h({w})`.
pub fn h_singleton(corpus: &Corpus, w: WordId) -> f64 {
    TopicState::singleton(corpus, w).h
}

/// `h({v, w})` from the two postings lists.
pub fn h_pair(corpus: &Corpus, v: WordId, w: WordId) -> f64 {
    let scorer = Scorer::new(corpus);
    let fv = corpus.freq(v);
    let fw = corpus.freq(w);
    scorer.doc_term(corpus.postings(v), corpus.postings(w)) + xlogx(fv) + xlogx(fw) - xlogx(fv + fw)
}

/// `h(s∪t)` reusing the cached statistics of `s` and `t`.
pub fn h_merged(s: &TopicState, t: &TopicState, corpus: &Corpus) -> f64 {
    Scorer::new(corpus).h_merged(s, t)
}

/// `Δh(s,t) = h(s∪t) − h(s) − h(t)`; the cluster distance is its negation.
pub fn delta_h(s: &TopicState, t: &TopicState, corpus: &Corpus) -> f64 {
    Scorer::new(corpus).delta(s, t)
}

/// `h(t)` evaluated directly from the definition for an explicit word set.
pub fn h_of_words(corpus: &Corpus, words: &[WordId]) -> f64 {
    let mut member = vec![false; corpus.vocab_size()];
    for &w in words {
        member[w] = true;
    }
    let mut doc_part = 0.0;
    for d in corpus.docs() {
        let fdt: u64 = d
            .counts()
            .iter()
            .filter(|&&(w, _)| member[w])
            .map(|&(_, c)| c as u64)
            .sum();
        if fdt > 0 {
            doc_part += fdt as f64 * ((fdt as f64).ln() - (d.len() as f64).ln());
        }
    }
    let word_part: f64 = words.iter().map(|&w| xlogx(corpus.freq(w))).sum();
    let ft: u64 = words.iter().map(|&w| corpus.freq(w)).sum();
    doc_part + word_part - xlogx(ft)
}

/// A scored join candidate. Greater is better: higher `Δh`, then the smaller
/// `(min key, max key)` pair under the topic order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Candidate {
    pub delta_h: f64,
    pub key: (WordId, WordId),
}

impl Candidate {
    pub(crate) fn new(delta_h: f64, a: &TopicState, b: &TopicState) -> Self {
        let (x, y) = (a.order_key(), b.order_key());
        Self {
            delta_h,
            key: (x.min(y), x.max(y)),
        }
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.delta_h
            .total_cmp(&other.delta_h)
            .then_with(|| other.key.cmp(&self.key))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::abc;
    use approx::assert_relative_eq;

    // d1: a×2, b×1; d2: b×1, c×1. Values evaluated by hand with natural logs.
    #[test]
    fn singleton_values() {
        let c = abc();
        assert_relative_eq!(h_singleton(&c, 0), 2.0 * (2.0f64 / 3.0).ln(), epsilon = 1e-12);
        assert_relative_eq!(h_singleton(&c, 0), -0.8109302162, epsilon = 1e-9);
    }

    #[test]
    fn singleton_degenerate_cases() {
        use crate::corpus::{Document, Vocabulary};
        let vocab = Vocabulary::from_words(["x", "y"]).unwrap();
        let c = Corpus::new(
            vocab,
            vec![Document::from_counts(0, [(0, 1)]), Document::from_counts(1, [(1, 3)])],
        )
        .unwrap();
        assert_eq!(h_singleton(&c, 0), 0.0);
        assert_eq!(h_singleton(&c, 1), 0.0);
    }

    #[test]
    fn pair_values() {
        let c = abc();
        assert_relative_eq!(h_pair(&c, 0, 1), -3.4657359028, epsilon = 1e-9);
        assert_relative_eq!(h_pair(&c, 1, 2), -3.0081547936, epsilon = 1e-9);
        assert_relative_eq!(h_pair(&c, 1, 0), h_pair(&c, 0, 1), epsilon = 1e-15);
        assert_relative_eq!(h_pair(&c, 0, 1), h_of_words(&c, &[0, 1]), epsilon = 1e-12);
    }

    #[test]
    fn merged_matches_pair_and_scratch() {
        let c = abc();
        let b = TopicState::singleton(&c, 1);
        let cc = TopicState::singleton(&c, 2);
        assert_relative_eq!(h_merged(&b, &cc, &c), -3.0081547936, epsilon = 1e-9);
        assert_relative_eq!(h_merged(&b, &cc, &c), h_pair(&c, 1, 2), epsilon = 1e-12);
    }

    #[test]
    fn delta_values() {
        let c = abc();
        let t: Vec<TopicState> = (0..3).map(|w| TopicState::singleton(&c, w)).collect();
        assert_relative_eq!(delta_h(&t[0], &t[1], &c), -0.8630462173, epsilon = 1e-9);
        assert_relative_eq!(delta_h(&t[1], &t[2], &c), -0.5232481437, epsilon = 1e-9);
        assert_relative_eq!(delta_h(&t[0], &t[2], &c), -1.9095425049, epsilon = 1e-9);
        assert_eq!(delta_h(&t[0], &t[1], &c), delta_h(&t[1], &t[0], &c));
        for (s, u) in [(0, 1), (1, 2), (0, 2)] {
            let direct = h_merged(&t[s], &t[u], &c) - t[s].h - t[u].h;
            assert_relative_eq!(delta_h(&t[s], &t[u], &c), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn final_merge_gives_unigram_likelihood() {
        let c = abc();
        let scorer = Scorer::new(&c);
        let a = scorer.singleton(0, 0);
        let b = scorer.singleton(1, 1);
        let cc = scorer.singleton(2, 2);
        let bc = scorer.join(3, &b, &cc, scorer.delta(&b, &cc));
        let n = c.total_tokens();
        let unigram: f64 = c.freqs().iter().map(|&f| xlogx(f)).sum::<f64>() - xlogx(n);
        assert_relative_eq!(scorer.h_merged(&a, &bc), unigram, max_relative = 1e-12);
    }

    #[test]
    fn candidate_order() {
        let hi = Candidate { delta_h: -0.1, key: (5, 6) };
        let lo = Candidate { delta_h: -0.2, key: (0, 1) };
        assert!(hi > lo);
        let tie_small = Candidate { delta_h: -0.1, key: (0, 9) };
        assert!(tie_small > hi);
    }
}
