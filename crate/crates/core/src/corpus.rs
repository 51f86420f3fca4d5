//! Immutable sparse document-word count store.
//!
//! A [`Corpus`] holds a [`Vocabulary`], the documents as sorted sparse
//! `(word-id, count)` lists, the global word frequencies `f(w)` and an
//! inverted index `word-id -> [(doc-index, count)]`. Everything downstream
//! addresses words by dense id and documents by their position in the corpus.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type WordId = usize;

/// Bijective mapping between surface strings and dense word ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, WordId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::new();
        for w in words {
            let w = w.into();
            if w.is_empty() {
                return Err(Error::invalid("vocabulary contains an empty word"));
            }
            if vocab.index.contains_key(&w) {
                return Err(Error::invalid(format!("duplicate vocabulary word {w:?}")));
            }
            vocab.intern(&w);
        }
        Ok(vocab)
    }

    /// Returns the id of `word`, assigning the next free id on first encounter.
    pub fn intern(&mut self, word: &str) -> WordId {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len();
        self.words.push(word.to_owned());
        self.index.insert(word.to_owned(), id);
        id
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// A bag of words: sorted `(word-id, count)` pairs with every count ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: u64,
    counts: Vec<(WordId, u32)>,
    #[serde(skip)]
    len: u64,
}

impl Document {
    /// Builds a document from unsorted, possibly repeated entries. Zero counts
    /// are dropped.
    pub fn from_counts(id: u64, entries: impl IntoIterator<Item = (WordId, u32)>) -> Self {
        let mut counts: Vec<(WordId, u32)> = entries.into_iter().filter(|&(_, c)| c > 0).collect();
        counts.sort_unstable_by_key(|&(w, _)| w);
        counts.dedup_by(|next, prev| {
            if next.0 == prev.0 {
                prev.1 += next.1;
                true
            } else {
                false
            }
        });
        let len = counts.iter().map(|&(_, c)| c as u64).sum();
        Self { id, counts, len }
    }

    pub fn from_tokens(id: u64, tokens: impl IntoIterator<Item = WordId>) -> Self {
        Self::from_counts(id, tokens.into_iter().map(|w| (w, 1)))
    }

    pub fn counts(&self) -> &[(WordId, u32)] {
        &self.counts
    }

    /// `|d|`, the number of word occurrences.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count(&self, w: WordId) -> u32 {
        self.counts
            .binary_search_by_key(&w, |&(id, _)| id)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    /// Expands the bag into a token sequence in ascending word-id order.
    pub fn tokens(&self) -> Vec<WordId> {
        let mut out = Vec::with_capacity(self.len as usize);
        for &(w, c) in &self.counts {
            out.extend(std::iter::repeat_n(w, c as usize));
        }
        out
    }

    fn remap(&self, map: &[Option<WordId>]) -> Self {
        Self::from_counts(
            self.id,
            self.counts
                .iter()
                .filter_map(|&(w, c)| map.get(w).copied().flatten().map(|nw| (nw, c))),
        )
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    vocab: Vocabulary,
    docs: Vec<Document>,
    global_freq: Vec<u64>,
    inverted: Vec<Vec<(u32, u32)>>,
}

impl Corpus {
    /// Builds a corpus, dropping empty documents and compacting away words that
    /// never occur. Word ids keep their relative order.
    pub fn new(vocab: Vocabulary, docs: Vec<Document>) -> Result<Self> {
        let mut freq = vec![0u64; vocab.len()];
        for d in &docs {
            for &(w, c) in d.counts() {
                if w >= vocab.len() {
                    return Err(Error::invalid(format!(
                        "document {} references word id {w} outside vocabulary of size {}",
                        d.id,
                        vocab.len()
                    )));
                }
                freq[w] += c as u64;
            }
        }
        let mut map = vec![None; vocab.len()];
        let mut kept = Vec::new();
        for (w, &f) in freq.iter().enumerate() {
            if f > 0 {
                map[w] = Some(kept.len());
                kept.push(vocab.word(w).to_owned());
            }
        }
        let vocab = Vocabulary::from_words(kept)?;
        let docs = docs
            .iter()
            .map(|d| d.remap(&map))
            .filter(|d| !d.is_empty())
            .collect();
        Self::with_vocabulary(vocab, docs)
    }

    /// Builds a corpus over a fixed vocabulary without compaction. Words may
    /// have zero frequency; this is how test sets are expressed over a
    /// training vocabulary. Empty documents are still dropped.
    pub fn with_vocabulary(vocab: Vocabulary, docs: Vec<Document>) -> Result<Self> {
        let docs: Vec<Document> = docs.into_iter().filter(|d| !d.is_empty()).collect();
        if vocab.is_empty() || docs.is_empty() {
            return Err(Error::EmptyCorpus("no documents with in-vocabulary words".into()));
        }
        let mut global_freq = vec![0u64; vocab.len()];
        let mut inverted = vec![Vec::new(); vocab.len()];
        for (di, d) in docs.iter().enumerate() {
            for &(w, c) in d.counts() {
                if w >= vocab.len() {
                    return Err(Error::invalid(format!(
                        "document {} references word id {w} outside vocabulary of size {}",
                        d.id,
                        vocab.len()
                    )));
                }
                global_freq[w] += c as u64;
                inverted[w].push((di as u32, c));
            }
        }
        Ok(Self {
            vocab,
            docs,
            global_freq,
            inverted,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    /// `f(w)`.
    pub fn freq(&self, w: WordId) -> u64 {
        self.global_freq[w]
    }

    pub fn freqs(&self) -> &[u64] {
        &self.global_freq
    }

    /// Total number of word occurrences.
    pub fn total_tokens(&self) -> u64 {
        self.global_freq.iter().sum()
    }

    /// Documents containing `w`, as `(doc-index, f_d(w))` sorted by doc index.
    pub fn postings(&self, w: WordId) -> &[(u32, u32)] {
        &self.inverted[w]
    }

    /// Document frequency: number of documents containing `w`.
    pub fn doc_freq(&self, w: WordId) -> usize {
        self.inverted[w].len()
    }

    /// Re-expresses `docs` (over some other vocabulary `from`) over this
    /// corpus' vocabulary, dropping out-of-vocabulary occurrences and
    /// documents left empty.
    pub fn align(&self, from: &Vocabulary, docs: &[Document]) -> Vec<Document> {
        let map: Vec<Option<WordId>> = from.words().iter().map(|w| self.vocab.id(w)).collect();
        docs.iter()
            .map(|d| d.remap(&map))
            .filter(|d| !d.is_empty())
            .collect()
    }

    /// Partitions the documents into train and test sides. Exactly
    /// `round(test_ratio * |D|)` documents (at least one) go to the test side
    /// after a seeded shuffle. The train vocabulary keeps words with training
    /// frequency ≥ `min_train_freq`; test documents are re-expressed over it.
    pub fn split(&self, test_ratio: f64, seed: u64, min_train_freq: u64) -> Result<(Corpus, Corpus)> {
        if !(test_ratio > 0.0 && test_ratio < 1.0) {
            return Err(Error::invalid(format!("test ratio {test_ratio} outside (0, 1)")));
        }
        let mut order: Vec<usize> = (0..self.docs.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let n_test = ((test_ratio * self.docs.len() as f64).round() as usize).clamp(1, self.docs.len());
        let mut is_test = vec![false; self.docs.len()];
        order[..n_test].iter().for_each(|&i| is_test[i] = true);
        self.partition(&is_test, min_train_freq)
    }

    /// Splits by explicit document ids: documents whose id is in `test_ids`
    /// form the test side, the rest the train side. Vocabulary handling is the
    /// same as in [`Corpus::split`].
    pub fn split_by_ids(&self, test_ids: &HashSet<u64>, min_train_freq: u64) -> Result<(Corpus, Corpus)> {
        let is_test: Vec<bool> = self.docs.iter().map(|d| test_ids.contains(&d.id)).collect();
        self.partition(&is_test, min_train_freq)
    }

    fn partition(&self, is_test: &[bool], min_train_freq: u64) -> Result<(Corpus, Corpus)> {
        let (test_idx, train_idx): (Vec<usize>, Vec<usize>) = (0..self.docs.len()).partition(|&i| is_test[i]);

        let mut train_freq = vec![0u64; self.vocab.len()];
        for &i in &train_idx {
            for &(w, c) in self.docs[i].counts() {
                train_freq[w] += c as u64;
            }
        }
        let mut map = vec![None; self.vocab.len()];
        let mut kept = Vec::new();
        for (w, &f) in train_freq.iter().enumerate() {
            if f > 0 && f >= min_train_freq {
                map[w] = Some(kept.len());
                kept.push(self.vocab.word(w).to_owned());
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyCorpus(format!(
                "no training word reaches frequency {min_train_freq}"
            )));
        }
        let vocab = Vocabulary::from_words(kept)?;
        let train_docs = train_idx.iter().map(|&i| self.docs[i].remap(&map)).collect();
        let test_docs = test_idx.iter().map(|&i| self.docs[i].remap(&map)).collect();
        let train = Corpus::with_vocabulary(vocab.clone(), train_docs)
            .map_err(|_| Error::EmptyCorpus("training side is empty after filtering".into()))?;
        let test = Corpus::with_vocabulary(vocab, test_docs)
            .map_err(|_| Error::EmptyCorpus("test side is empty after filtering".into()))?;
        Ok((train, test))
    }

    /// Keeps only the documents at the given positions (in the given order).
    pub fn subset(&self, indices: &[usize]) -> Result<Corpus> {
        let docs = indices.iter().map(|&i| self.docs[i].clone()).collect();
        Corpus::new(self.vocab.clone(), docs)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_json(BufWriter::new(file), None)
    }

    /// Writes the versioned JSON cache, with optional provenance metadata.
    pub fn write_json<W: std::io::Write>(&self, out: W, meta: Option<serde_json::Value>) -> Result<()> {
        let data = CorpusFile {
            format: CORPUS_FORMAT.into(),
            version: CORPUS_VERSION,
            vocab: self.vocab.words().to_vec(),
            docs: self.docs.clone(),
            meta,
        };
        serde_json::to_writer(out, &data)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Corpus> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let data: CorpusFile = serde_json::from_reader(BufReader::new(file))?;
        if data.format != CORPUS_FORMAT {
            return Err(Error::format(path, 1, "not a corpus cache file"));
        }
        if data.version != CORPUS_VERSION {
            return Err(Error::Version(data.version));
        }
        let vocab = Vocabulary::from_words(data.vocab)?;
        let docs = data
            .docs
            .into_iter()
            .map(|d| Document::from_counts(d.id, d.counts))
            .collect();
        Corpus::with_vocabulary(vocab, docs)
    }
}

const CORPUS_FORMAT: &str = "topic-grouper-corpus";
const CORPUS_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CorpusFile {
    format: String,
    version: u32,
    vocab: Vec<String>,
    docs: Vec<Document>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// d1: a×2, b×1; d2: b×1, c×1
    pub(crate) fn abc() -> Corpus {
        let vocab = Vocabulary::from_words(["a", "b", "c"]).unwrap();
        let docs = vec![
            Document::from_counts(0, [(0, 2), (1, 1)]),
            Document::from_counts(1, [(1, 1), (2, 1)]),
        ];
        Corpus::new(vocab, docs).unwrap()
    }

    #[test]
    fn counts_and_index_agree() {
        let c = abc();
        assert_eq!(c.freqs(), &[2, 2, 1]);
        assert_eq!(c.docs()[0].len(), 3);
        assert_eq!(c.docs()[1].len(), 2);
        assert_eq!(c.postings(1), &[(0, 1), (1, 1)]);
        assert_eq!(c.total_tokens(), 5);
    }

    #[test]
    fn zero_frequency_words_are_compacted() {
        let vocab = Vocabulary::from_words(["x", "unused", "y"]).unwrap();
        let c = Corpus::new(vocab, vec![Document::from_counts(0, [(0, 1), (2, 4)])]).unwrap();
        assert_eq!(c.vocab().words(), &["x".to_string(), "y".to_string()]);
        assert_eq!(c.freqs(), &[1, 4]);
    }

    #[test]
    fn duplicate_entries_are_merged() {
        let d = Document::from_counts(0, [(3, 1), (1, 2), (3, 4), (5, 0)]);
        assert_eq!(d.counts(), &[(1, 2), (3, 5)]);
        assert_eq!(d.len(), 7);
        assert_eq!(d.tokens(), vec![1, 1, 3, 3, 3, 3, 3]);
    }

    #[test]
    fn vocabulary_rejects_empty_and_duplicates() {
        assert!(Vocabulary::from_words(["a", ""]).is_err());
        assert!(Vocabulary::from_words(["a", "a"]).is_err());
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let vocab = Vocabulary::from_words((0..5).map(|i| format!("w{i}"))).unwrap();
        let docs = (0..40)
            .map(|i| Document::from_counts(i, [((i % 5) as usize, 3), (((i + 1) % 5) as usize, 2)]))
            .collect();
        let c = Corpus::new(vocab, docs).unwrap();
        let (tr1, te1) = c.split(0.25, 9, 1).unwrap();
        let (tr2, te2) = c.split(0.25, 9, 1).unwrap();
        assert_eq!(tr1.docs(), tr2.docs());
        assert_eq!(te1.docs(), te2.docs());
        assert_eq!(te1.num_docs(), 10);
        let mut ids: Vec<u64> = tr1.docs().iter().chain(te1.docs()).map(|d| d.id).collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..40).collect::<Vec<_>>());
    }

    #[test]
    fn split_refilters_train_vocabulary() {
        let vocab = Vocabulary::from_words(["common", "rare"]).unwrap();
        let mut docs: Vec<Document> = (0..20).map(|i| Document::from_counts(i, [(0, 5)])).collect();
        docs.push(Document::from_counts(20, [(1, 1)]));
        let c = Corpus::new(vocab, docs).unwrap();
        let (train, test) = c.split(0.1, 3, 10).unwrap();
        assert!(train.freqs().iter().all(|&f| f >= 10));
        assert_eq!(train.vocab().words(), &["common".to_string()]);
        // the rare-only document, wherever it landed, has vanished
        assert!(train.docs().iter().chain(test.docs()).all(|d| d.id != 20));
    }

    #[test]
    fn split_rejects_bad_ratio() {
        let c = abc();
        assert!(c.split(0.0, 1, 1).is_err());
        assert!(c.split(1.0, 1, 1).is_err());
    }

    #[test]
    fn cache_round_trip() {
        let c = abc();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        c.save(&p).unwrap();
        let back = Corpus::load(&p).unwrap();
        assert_eq!(back.docs(), c.docs());
        assert_eq!(back.vocab(), c.vocab());
    }
}
