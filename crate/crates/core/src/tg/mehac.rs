use std::collections::BinaryHeap;

use super::{Candidate, Dendrogram, Merge, Scorer, TopicId, TopicState};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Counters from a memory-efficient training run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MehacStats {
    /// Largest number of simultaneously valid queue entries (one per topic).
    pub peak_live_entries: usize,
    /// Largest physical heap size, including superseded entries awaiting removal.
    pub peak_heap_len: usize,
    /// Best-partner recomputations triggered by a marked entry reaching the top.
    pub deferred_updates: usize,
}

/// Heap entry for `owner`. It is current only while `stamp` matches the
/// owner's slot; superseded entries are skipped when they surface. Among equal
/// candidates a marked entry surfaces first so its recomputation happens
/// before any join it might compete with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Entry {
    cand: Candidate,
    marked: bool,
    stamp: u64,
    owner: TopicId,
}

/// Best-partner record of a live topic. `partner == None` marks a deferred
/// recomputation; `cand` then keeps its old, optimistic priority.
#[derive(Debug, Clone, Copy)]
struct Slot {
    partner: Option<TopicId>,
    cand: Candidate,
    stamp: u64,
}

struct State<'s, 'c> {
    scorer: &'s Scorer<'c>,
    topics: Vec<Option<TopicState>>,
    slots: Vec<Option<Slot>>,
    live: Vec<TopicId>,
    heap: BinaryHeap<Entry>,
    next_stamp: u64,
    valid: usize,
    stats: MehacStats,
}

impl State<'_, '_> {
    fn push(&mut self, owner: TopicId, partner: Option<TopicId>, cand: Candidate) {
        let stamp = self.next_stamp;
        self.next_stamp += 1;
        if self.slots[owner].replace(Slot { partner, cand, stamp }).is_none() {
            self.valid += 1;
        }
        self.heap.push(Entry {
            cand,
            marked: partner.is_none(),
            stamp,
            owner,
        });
        self.stats.peak_heap_len = self.stats.peak_heap_len.max(self.heap.len());
        self.stats.peak_live_entries = self.stats.peak_live_entries.max(self.valid);
    }

    fn take_slot(&mut self, owner: TopicId) -> Option<Slot> {
        let slot = self.slots[owner].take();
        if slot.is_some() {
            self.valid -= 1;
        }
        slot
    }

    fn is_current(&self, e: &Entry) -> bool {
        self.topics[e.owner].is_some() && self.slots[e.owner].is_some_and(|s| s.stamp == e.stamp)
    }

    /// Scans every other live topic for the best partner of `s`.
    fn update_join_partner_for(&mut self, s: TopicId) {
        let ts = self.topics[s].as_ref().unwrap();
        let mut best: Option<(Candidate, TopicId)> = None;
        for &r in &self.live {
            if r == s {
                continue;
            }
            let tr = self.topics[r].as_ref().unwrap();
            let cand = Candidate::new(self.scorer.delta(ts, tr), ts, tr);
            if best.is_none_or(|(b, _)| cand > b) {
                best = Some((cand, r));
            }
        }
        match best {
            Some((cand, t)) => self.push(s, Some(t), cand),
            None => {
                self.take_slot(s);
            }
        }
    }

    /// Drops superseded entries once they outnumber the valid ones, keeping
    /// the heap linear in the number of live topics.
    fn compact(&mut self) {
        if self.heap.len() > 2 * self.live.len() + 16 {
            let entries: Vec<Entry> = std::mem::take(&mut self.heap).into_vec();
            self.heap = entries.into_iter().filter(|e| self.is_current(e)).collect();
        }
    }
}

/// Trains keeping only each topic's best join partner in a single queue.
pub fn train_mehac(corpus: &Corpus) -> Result<Dendrogram> {
    train_mehac_with_stats(corpus).map(|(d, _)| d)
}

pub fn train_mehac_with_stats(corpus: &Corpus) -> Result<(Dendrogram, MehacStats)> {
    let v = corpus.vocab_size();
    if v < 2 {
        return Err(Error::invalid("need at least two words to cluster"));
    }
    let scorer = Scorer::new(corpus);
    let total = 2 * v - 1;
    let mut topics: Vec<Option<TopicState>> = (0..v).map(|w| Some(scorer.singleton(w, w))).collect();
    topics.resize(total, None);
    let leaf_h: Vec<f64> = topics.iter().flatten().map(|t| t.h).collect();

    let mut st = State {
        scorer: &scorer,
        topics,
        slots: vec![None; total],
        live: (0..v).collect(),
        heap: BinaryHeap::with_capacity(2 * v),
        next_stamp: 0,
        valid: 0,
        stats: MehacStats::default(),
    };

    // best initial partners; the pair scan is symmetric so each Δh is computed once
    let mut best: Vec<Option<(Candidate, TopicId)>> = vec![None; v];
    for s in 0..v {
        for t in s + 1..v {
            let (ts, tt) = (st.topics[s].as_ref().unwrap(), st.topics[t].as_ref().unwrap());
            let cand = Candidate::new(scorer.delta(ts, tt), ts, tt);
            if best[s].is_none_or(|(b, _)| cand > b) {
                best[s] = Some((cand, t));
            }
            if best[t].is_none_or(|(b, _)| cand > b) {
                best[t] = Some((cand, s));
            }
        }
    }
    for (s, b) in best.into_iter().enumerate() {
        let (cand, t) = b.expect("at least two topics");
        st.push(s, Some(t), cand);
    }

    let mut merges = Vec::with_capacity(v - 1);
    while st.live.len() > 1 {
        let e = st.heap.pop().expect("live topics keep a queue entry");
        if !st.is_current(&e) {
            continue;
        }
        let slot = st.take_slot(e.owner).unwrap();
        let Some(t) = slot.partner else {
            st.stats.deferred_updates += 1;
            st.update_join_partner_for(e.owner);
            continue;
        };
        let s = e.owner;

        // join s and t; t's own entry dies with it
        st.take_slot(t);
        let new_id = v + merges.len();
        let ts = st.topics[s].take().unwrap();
        let tt = st.topics[t].take().unwrap();
        let (left, right) = if ts.order_key() < tt.order_key() { (ts, tt) } else { (tt, ts) };
        let delta_h = slot.cand.delta_h;
        let u = scorer.join(new_id, &left, &right, delta_h);
        merges.push(Merge {
            left_id: left.id,
            right_id: right.id,
            new_id,
            delta_h,
            h_new: u.h,
            f_new: u.f,
        });
        st.live.retain(|&r| r != s && r != t);
        st.topics[new_id] = Some(u);
        st.live.push(new_id);
        st.update_join_partner_for(new_id);

        let others: Vec<TopicId> = st.live.iter().copied().filter(|&w| w != new_id).collect();
        for w in others {
            let Some(slot) = st.slots[w] else { continue };
            let tw = st.topics[w].as_ref().unwrap();
            let tu = st.topics[new_id].as_ref().unwrap();
            let cand = Candidate::new(scorer.delta(tw, tu), tw, tu);
            if cand > slot.cand {
                st.push(w, Some(new_id), cand);
            } else if slot.partner == Some(s) || slot.partner == Some(t) {
                // defer: keep the old priority, recompute when it surfaces
                st.push(w, None, slot.cand);
            }
        }
        st.compact();
    }
    let stats = st.stats;
    Ok((Dendrogram::new(corpus, leaf_h, merges), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::abc;
    use crate::tg::train_ehac;

    #[test]
    fn matches_ehac_on_three_words() {
        let c = abc();
        assert_eq!(train_mehac(&c).unwrap().merges, train_ehac(&c).unwrap().merges);
    }

    #[test]
    fn live_entries_bounded_by_vocabulary() {
        let c = abc();
        let (_, stats) = train_mehac_with_stats(&c).unwrap();
        assert!(stats.peak_live_entries <= c.vocab_size());
    }
}
