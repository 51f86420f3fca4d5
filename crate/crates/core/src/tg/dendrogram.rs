use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TopicId;
use crate::corpus::{Corpus, WordId};
use crate::error::{Error, Result};

pub const DENDROGRAM_VERSION: u32 = 1;

/// One join. Leaves are topics `0..n_leaves` (leaf `w` holds word `w`); the
/// topic created by merge `k` has id `n_leaves + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    #[serde(rename = "left")]
    pub left_id: TopicId,
    #[serde(rename = "right")]
    pub right_id: TopicId,
    #[serde(rename = "new")]
    pub new_id: TopicId,
    pub delta_h: f64,
    pub h_new: f64,
    pub f_new: u64,
}

/// The full merge tree produced by a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub version: u32,
    pub n_leaves: usize,
    #[serde(default)]
    pub n_docs: usize,
    pub vocab: Vec<String>,
    /// `f(w)` of each leaf.
    pub leaf_f: Vec<u64>,
    /// `h({w})` of each leaf.
    pub leaf_h: Vec<f64>,
    pub merges: Vec<Merge>,
    /// Provenance echoed by the tools (version, command line, seeds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatTopic {
    pub id: TopicId,
    pub words: Vec<WordId>,
    pub f: u64,
    pub h: f64,
}

/// The partition `T(n)`, topics ordered by their smallest word id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatView {
    pub n: usize,
    pub topics: Vec<FlatTopic>,
    /// word id -> index into `topics`
    pub assignment: Vec<usize>,
}

impl FlatView {
    /// `h` summed over all topics: the plug-in log-likelihood of `T(n)`.
    pub fn total_h(&self) -> f64 {
        self.topics.iter().map(|t| t.h).sum()
    }

    pub fn topic_of(&self, w: WordId) -> usize {
        self.assignment[w]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesRow {
    pub n: usize,
    pub delta_h: f64,
    /// `Δh_n / Δh_{n+1}`; absent for `n = |V| − 1` or a zero denominator.
    pub ratio: Option<f64>,
}

impl Dendrogram {
    pub(crate) fn new(corpus: &Corpus, leaf_h: Vec<f64>, merges: Vec<Merge>) -> Self {
        Self {
            version: DENDROGRAM_VERSION,
            n_leaves: corpus.vocab_size(),
            n_docs: corpus.num_docs(),
            vocab: corpus.vocab().words().to_vec(),
            leaf_f: corpus.freqs().to_vec(),
            leaf_h,
            merges,
            meta: None,
        }
    }

    pub fn n_topics_total(&self) -> usize {
        self.n_leaves + self.merges.len()
    }

    pub fn root(&self) -> TopicId {
        self.n_topics_total() - 1
    }

    pub fn is_leaf(&self, id: TopicId) -> bool {
        id < self.n_leaves
    }

    /// Merge record that created `id`, if it is not a leaf.
    pub fn merge_of(&self, id: TopicId) -> Option<&Merge> {
        id.checked_sub(self.n_leaves).and_then(|k| self.merges.get(k))
    }

    /// Number of topics `n` of the flat view in which `id` first appears.
    pub fn created_at(&self, id: TopicId) -> usize {
        match id.checked_sub(self.n_leaves) {
            None => self.n_leaves,
            Some(k) => self.n_leaves - k - 1,
        }
    }

    pub fn f(&self, id: TopicId) -> u64 {
        match self.merge_of(id) {
            Some(m) => m.f_new,
            None => self.leaf_f[id],
        }
    }

    pub fn h(&self, id: TopicId) -> f64 {
        match self.merge_of(id) {
            Some(m) => m.h_new,
            None => self.leaf_h[id],
        }
    }

    /// Parent of each topic id (`None` for the root).
    pub fn parents(&self) -> Vec<Option<TopicId>> {
        let mut parent = vec![None; self.n_topics_total()];
        for m in &self.merges {
            parent[m.left_id] = Some(m.new_id);
            parent[m.right_id] = Some(m.new_id);
        }
        parent
    }

    /// Member words of `id`, sorted.
    pub fn words_of(&self, id: TopicId) -> Vec<WordId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(t) = stack.pop() {
            match self.merge_of(t) {
                Some(m) => {
                    stack.push(m.left_id);
                    stack.push(m.right_id);
                }
                None => out.push(t),
            }
        }
        out.sort_unstable();
        out
    }

    /// `T(n)`: replays the first `|V| − n` merges.
    pub fn flat_view(&self, n: usize) -> Result<FlatView> {
        if n < 1 || n > self.n_leaves {
            return Err(Error::invalid(format!("n = {n} outside 1..={}", self.n_leaves)));
        }
        let steps = self.n_leaves - n;
        if steps > self.merges.len() {
            return Err(Error::invalid(format!(
                "dendrogram holds only {} merges",
                self.merges.len()
            )));
        }
        let mut members: Vec<Option<Vec<WordId>>> = (0..self.n_leaves).map(|w| Some(vec![w])).collect();
        members.resize(self.n_leaves + steps, None);
        for m in &self.merges[..steps] {
            let mut a = members[m.left_id].take().expect("left topic live");
            let b = members[m.right_id].take().expect("right topic live");
            a.extend(b);
            a.sort_unstable();
            members[m.new_id] = Some(a);
        }
        let mut topics: Vec<FlatTopic> = members
            .into_iter()
            .enumerate()
            .filter_map(|(id, w)| {
                w.map(|words| FlatTopic {
                    id,
                    f: self.f(id),
                    h: self.h(id),
                    words,
                })
            })
            .collect();
        topics.sort_by_key(|t| t.words[0]);
        let mut assignment = vec![0; self.n_leaves];
        for (i, t) in topics.iter().enumerate() {
            for &w in &t.words {
                assignment[w] = i;
            }
        }
        Ok(FlatView { n, topics, assignment })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let d: Dendrogram = serde_json::from_reader(BufReader::new(f))?;
        d.check()?;
        Ok(d)
    }

    /// Structural validation of a deserialized tree.
    pub fn check(&self) -> Result<()> {
        if self.version != DENDROGRAM_VERSION {
            return Err(Error::Version(self.version));
        }
        if self.vocab.len() != self.n_leaves
            || self.leaf_f.len() != self.n_leaves
            || self.leaf_h.len() != self.n_leaves
        {
            return Err(Error::invalid("leaf arrays disagree with n_leaves"));
        }
        if self.n_leaves == 0 || self.merges.len() + 1 != self.n_leaves {
            return Err(Error::invalid(format!(
                "{} merges for {} leaves",
                self.merges.len(),
                self.n_leaves
            )));
        }
        let mut live = vec![false; self.n_topics_total()];
        live[..self.n_leaves].iter_mut().for_each(|l| *l = true);
        for (k, m) in self.merges.iter().enumerate() {
            let ok = m.new_id == self.n_leaves + k
                && m.left_id != m.right_id
                && m.left_id < m.new_id
                && m.right_id < m.new_id
                && live[m.left_id]
                && live[m.right_id];
            if !ok {
                return Err(Error::invalid(format!("merge {k} joins non-live topics")));
            }
            live[m.left_id] = false;
            live[m.right_id] = false;
            live[m.new_id] = true;
        }
        Ok(())
    }
}

/// `Δh_n` for `n = |V| − 1` down to `1`, with the ratio `Δh_n / Δh_{n+1}`.
pub fn delta_h_series(dendrogram: &Dendrogram) -> Vec<SeriesRow> {
    let mut rows: Vec<SeriesRow> = Vec::with_capacity(dendrogram.merges.len());
    let mut prev: Option<f64> = None;
    for (k, m) in dendrogram.merges.iter().enumerate() {
        let ratio = prev.filter(|&p| p != 0.0).map(|p| m.delta_h / p);
        rows.push(SeriesRow {
            n: dendrogram.n_leaves - k - 1,
            delta_h: m.delta_h,
            ratio,
        });
        prev = Some(m.delta_h);
    }
    rows
}
