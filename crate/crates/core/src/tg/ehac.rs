use std::collections::BinaryHeap;

use super::{Candidate, Dendrogram, Merge, Scorer, TopicId, TopicState};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct EhacConfig {
    /// Upper bound in bytes for the per-topic queues.
    pub memory_budget: u64,
}

impl Default for EhacConfig {
    fn default() -> Self {
        Self {
            memory_budget: 2 << 30,
        }
    }
}

impl EhacConfig {
    /// Bytes needed for the queues of a vocabulary of size `v`: every pair is
    /// queued twice initially and stale entries linger until popped.
    pub fn estimated_bytes(v: usize) -> u64 {
        let v = v as u64;
        let entry = std::mem::size_of::<QueueEntry>() as u64;
        2 * v * v * entry
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct QueueEntry {
    cand: Candidate,
    partner: TopicId,
}

/// Trains with one priority queue of join partners per live topic.
pub fn train_ehac(corpus: &Corpus) -> Result<Dendrogram> {
    train_ehac_with(corpus, &EhacConfig::default())
}

pub fn train_ehac_with(corpus: &Corpus, cfg: &EhacConfig) -> Result<Dendrogram> {
    let v = corpus.vocab_size();
    if v < 2 {
        return Err(Error::invalid("need at least two words to cluster"));
    }
    let needed = EhacConfig::estimated_bytes(v);
    if needed > cfg.memory_budget {
        return Err(Error::MemoryBudget {
            needed,
            budget: cfg.memory_budget,
        });
    }

    let scorer = Scorer::new(corpus);
    let total = 2 * v - 1;
    let mut topics: Vec<Option<TopicState>> = (0..v).map(|w| Some(scorer.singleton(w, w))).collect();
    topics.resize(total, None);
    let leaf_h: Vec<f64> = topics.iter().flatten().map(|t| t.h).collect();

    let mut queues: Vec<BinaryHeap<QueueEntry>> = (0..total).map(|_| BinaryHeap::new()).collect();
    for s in 0..v {
        queues[s].reserve(v - 1);
    }
    for s in 0..v {
        for t in s + 1..v {
            let (ts, tt) = (topics[s].as_ref().unwrap(), topics[t].as_ref().unwrap());
            let cand = Candidate::new(scorer.delta(ts, tt), ts, tt);
            queues[s].push(QueueEntry { cand, partner: t });
            queues[t].push(QueueEntry { cand, partner: s });
        }
    }

    let mut live: Vec<TopicId> = (0..v).collect();
    let mut merges = Vec::with_capacity(v - 1);
    while live.len() > 1 {
        // best head over all live queues, dropping entries for dead partners
        let mut best: Option<(Candidate, TopicId)> = None;
        for &r in &live {
            let q = &mut queues[r];
            while q.peek().is_some_and(|e| topics[e.partner].is_none()) {
                q.pop();
            }
            if let Some(head) = q.peek() {
                if best.is_none_or(|(b, _)| head.cand > b) {
                    best = Some((head.cand, r));
                }
            }
        }
        let (cand, s) = best.expect("live topics always have live partners");
        let t = queues[s].pop().expect("non-empty queue").partner;

        let new_id = v + merges.len();
        let (ts, tt) = (topics[s].take().unwrap(), topics[t].take().unwrap());
        let (left, right) = if ts.order_key() < tt.order_key() { (ts, tt) } else { (tt, ts) };
        let u = scorer.join(new_id, &left, &right, cand.delta_h);
        merges.push(Merge {
            left_id: left.id,
            right_id: right.id,
            new_id,
            delta_h: cand.delta_h,
            h_new: u.h,
            f_new: u.f,
        });
        queues[s] = BinaryHeap::new();
        queues[t] = BinaryHeap::new();
        live.retain(|&r| r != s && r != t);

        let mut uq = BinaryHeap::with_capacity(live.len());
        for &r in &live {
            let tr = topics[r].as_ref().unwrap();
            let cand = Candidate::new(scorer.delta(tr, &u), tr, &u);
            uq.push(QueueEntry { cand, partner: r });
            queues[r].push(QueueEntry { cand, partner: new_id });
        }
        queues[new_id] = uq;
        topics[new_id] = Some(u);
        live.push(new_id);
    }
    Ok(Dendrogram::new(corpus, leaf_h, merges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::abc;
    use crate::corpus::{Document, Vocabulary};

    #[test]
    fn three_word_sequence() {
        let d = train_ehac(&abc()).unwrap();
        assert_eq!(d.merges.len(), 2);
        let m0 = &d.merges[0];
        assert_eq!((m0.left_id, m0.right_id, m0.new_id), (1, 2, 3));
        assert!((m0.delta_h - -0.5232481437).abs() < 1e-9);
        let m1 = &d.merges[1];
        assert_eq!((m1.left_id, m1.right_id, m1.new_id), (0, 3, 4));
        assert_eq!(m1.f_new, 5);
    }

    #[test]
    fn two_words_one_merge() {
        let vocab = Vocabulary::from_words(["x", "y"]).unwrap();
        let c = Corpus::new(vocab, vec![Document::from_counts(0, [(0, 1), (1, 2)])]).unwrap();
        let d = train_ehac(&c).unwrap();
        assert_eq!(d.merges.len(), 1);
        assert_eq!((d.merges[0].left_id, d.merges[0].right_id), (0, 1));
    }

    #[test]
    fn single_word_is_rejected() {
        let vocab = Vocabulary::from_words(["x"]).unwrap();
        let c = Corpus::new(vocab, vec![Document::from_counts(0, [(0, 1)])]).unwrap();
        assert!(train_ehac(&c).is_err());
    }

    #[test]
    fn memory_guard_refuses_cleanly() {
        let cfg = EhacConfig { memory_budget: 10 };
        match train_ehac_with(&abc(), &cfg) {
            Err(Error::MemoryBudget { needed, budget }) => {
                assert_eq!(budget, 10);
                assert!(needed > 10);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
