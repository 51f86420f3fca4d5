//! Multinomial Naive Bayes over reduced feature spaces.
//!
//! A [`Reducer`] turns a document's word counts into feature counts
//! `f_d(t)`: topic counts from a Topic Grouper cut, expected topic counts from
//! LDA fold-in, or the counts of a selected word subset. Training and
//! classification work the same for all of them.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, Document, WordId};
use crate::error::{Error, Result};
use crate::eval::TopicModel;
use crate::lda::{fold_in, FoldInConfig};
use crate::rng::derive_seed;
use crate::tg::FlatView;

/// A corpus with one class label per document.
#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    pub corpus: Corpus,
    /// Class id of each document, aligned with `corpus.docs()`.
    pub labels: Vec<usize>,
    /// Class names by id, sorted.
    pub classes: Vec<String>,
}

impl LabeledCorpus {
    /// Attaches labels by document id. Every document needs a label.
    pub fn new(corpus: Corpus, label_of: &HashMap<u64, String>) -> Result<Self> {
        let mut classes: Vec<String> = label_of.values().cloned().collect::<HashSet<_>>().into_iter().collect();
        classes.sort();
        Self::with_classes(corpus, label_of, classes)
    }

    fn with_classes(corpus: Corpus, label_of: &HashMap<u64, String>, classes: Vec<String>) -> Result<Self> {
        let index: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let labels = corpus
            .docs()
            .iter()
            .map(|d| {
                let name = label_of
                    .get(&d.id)
                    .ok_or_else(|| Error::invalid(format!("document {} has no label", d.id)))?;
                index
                    .get(name.as_str())
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("unknown class {name:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            corpus,
            labels,
            classes,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    fn label_map(&self) -> HashMap<u64, String> {
        self.corpus
            .docs()
            .iter()
            .zip(&self.labels)
            .map(|(d, &l)| (d.id, self.classes[l].clone()))
            .collect()
    }

    /// Seeded train/test split as in [`Corpus::split`]; both sides keep the
    /// full class list.
    pub fn split(&self, test_ratio: f64, seed: u64, min_train_freq: u64) -> Result<(Self, Self)> {
        let (train, test) = self.corpus.split(test_ratio, seed, min_train_freq)?;
        self.relabel(train, test)
    }

    /// Fixed split by test document ids.
    pub fn split_by_ids(&self, test_ids: &HashSet<u64>, min_train_freq: u64) -> Result<(Self, Self)> {
        let (train, test) = self.corpus.split_by_ids(test_ids, min_train_freq)?;
        self.relabel(train, test)
    }

    fn relabel(&self, train: Corpus, test: Corpus) -> Result<(Self, Self)> {
        let map = self.label_map();
        Ok((
            Self::with_classes(train, &map, self.classes.clone())?,
            Self::with_classes(test, &map, self.classes.clone())?,
        ))
    }
}

/// Reads a `doc_id,label` CSV with a header row.
pub fn load_labels(path: &Path) -> Result<HashMap<u64, String>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::format(path, 1, format!("missing column {name:?}")))
    };
    let (id_col, label_col) = (col("doc_id")?, col("label")?);
    let mut out = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let id: u64 = rec
            .get(id_col)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::format(path, line, "bad doc_id"))?;
        let label = rec.get(label_col).unwrap_or("").trim();
        if label.is_empty() {
            return Err(Error::format(path, line, "empty label"));
        }
        if out.insert(id, label.to_owned()).is_some() {
            return Err(Error::format(path, line, format!("document {id} labeled twice")));
        }
    }
    Ok(out)
}

/// Maps documents to feature counts.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Reducer {
    /// Topic counts `f_d(t) = Σ_{w∈t} f_d(w)` of a flat view.
    Tg { n: usize, assignment: Vec<usize> },
    /// `|d| · p(t|d)` by fold-in; seeds are derived per document id.
    Lda {
        #[serde(skip)]
        model: Box<TopicModel>,
        fold: FoldInConfig,
    },
    /// Counts of the selected words only; `index[w]` is the feature of `w`.
    Words {
        words: Vec<WordId>,
        #[serde(skip)]
        index: Vec<Option<usize>>,
    },
}

impl Reducer {
    pub fn tg(view: &FlatView) -> Self {
        Reducer::Tg {
            n: view.n,
            assignment: view.assignment.clone(),
        }
    }

    pub fn lda(model: TopicModel, fold: FoldInConfig) -> Self {
        Reducer::Lda {
            model: Box::new(model),
            fold,
        }
    }

    /// Keeps `words` out of a vocabulary of `vocab_size` words.
    pub fn words(words: Vec<WordId>, vocab_size: usize) -> Result<Self> {
        let mut index = vec![None; vocab_size];
        for (i, &w) in words.iter().enumerate() {
            if w >= vocab_size || index[w].replace(i).is_some() {
                return Err(Error::invalid(format!("bad or repeated selected word {w}")));
            }
        }
        Ok(Reducer::Words { words, index })
    }

    pub fn n_features(&self) -> usize {
        match self {
            Reducer::Tg { n, .. } => *n,
            Reducer::Lda { model, .. } => model.n_topics(),
            Reducer::Words { words, .. } => words.len(),
        }
    }

    fn vocab_size(&self) -> usize {
        match self {
            Reducer::Tg { assignment, .. } => assignment.len(),
            Reducer::Lda { model, .. } => model.vocab_size(),
            Reducer::Words { index, .. } => index.len(),
        }
    }

    /// Sparse `(feature, count)` pairs, features ascending.
    pub fn reduce(&self, doc: &Document) -> Result<Vec<(usize, f64)>> {
        match self {
            Reducer::Tg { assignment, .. } => Ok(reduce_tg_assignment(assignment, doc)),
            Reducer::Lda { model, fold } => Ok(reduce_lda(model, doc, fold)?.into_iter().enumerate().collect()),
            Reducer::Words { index, .. } => {
                let mut out: Vec<(usize, f64)> = doc
                    .counts()
                    .iter()
                    .filter_map(|&(w, c)| index[w].map(|i| (i, c as f64)))
                    .collect();
                out.sort_unstable_by_key(|&(i, _)| i);
                Ok(out)
            }
        }
    }
}

fn reduce_tg_assignment(assignment: &[usize], doc: &Document) -> Vec<(usize, f64)> {
    let mut acc: HashMap<usize, u64> = HashMap::with_capacity(doc.counts().len());
    for &(w, c) in doc.counts() {
        *acc.entry(assignment[w]).or_default() += c as u64;
    }
    let mut out: Vec<(usize, f64)> = acc.into_iter().map(|(t, c)| (t, c as f64)).collect();
    out.sort_unstable_by_key(|&(t, _)| t);
    out
}

/// `f_d(t)` for the topics of `view`, as `(topic index, count)` pairs.
pub fn reduce_tg(view: &FlatView, doc: &Document) -> Vec<(usize, f64)> {
    reduce_tg_assignment(&view.assignment, doc)
}

/// `|d| · p(t|d)` with `p(t|d)` from fold-in seeded by `(cfg.seed, doc.id)`.
pub fn reduce_lda(model: &TopicModel, doc: &Document, cfg: &FoldInConfig) -> Result<Vec<f64>> {
    let cfg = FoldInConfig {
        seed: derive_seed(cfg.seed, doc.id),
        ..*cfg
    };
    let len = doc.len() as f64;
    Ok(fold_in(model, doc, &cfg)?.into_iter().map(|p| len * p).collect())
}

fn entropy(counts: impl IntoIterator<Item = f64>) -> f64 {
    let counts: Vec<f64> = counts.into_iter().collect();
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.ln()
        })
        .sum()
}

/// Information gain (nats) of each word's document presence about the class.
pub fn information_gain(labeled: &LabeledCorpus) -> Vec<f64> {
    let k = labeled.n_classes();
    let n_docs = labeled.corpus.num_docs() as f64;
    let mut class_docs = vec![0.0; k];
    labeled.labels.iter().for_each(|&l| class_docs[l] += 1.0);
    let h_c = entropy(class_docs.iter().copied());
    (0..labeled.corpus.vocab_size())
        .map(|w| {
            let mut present = vec![0.0; k];
            for &(di, _) in labeled.corpus.postings(w) {
                present[labeled.labels[di as usize]] += 1.0;
            }
            let n_present: f64 = present.iter().sum();
            let absent = class_docs.iter().zip(&present).map(|(a, b)| a - b);
            let p = n_present / n_docs;
            h_c - p * entropy(present.iter().copied()) - (1.0 - p) * entropy(absent)
        })
        .collect()
}

fn top_k(scores: &[f64], k: usize) -> Result<Vec<WordId>> {
    if k == 0 || k > scores.len() {
        return Err(Error::invalid(format!("k = {k} outside 1..={}", scores.len())));
    }
    let mut ids: Vec<WordId> = (0..scores.len()).collect();
    ids.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    ids.truncate(k);
    Ok(ids)
}

/// Top `k` words by information gain, ties by word id.
pub fn select_ig(labeled: &LabeledCorpus, k: usize) -> Result<Vec<WordId>> {
    top_k(&information_gain(labeled), k)
}

/// Top `k` words by document frequency, ties by word id.
pub fn select_df(labeled: &LabeledCorpus, k: usize) -> Result<Vec<WordId>> {
    let df: Vec<f64> = (0..labeled.corpus.vocab_size())
        .map(|w| labeled.corpus.doc_freq(w) as f64)
        .collect();
    top_k(&df, k)
}

#[derive(Debug, Clone, Serialize)]
pub struct NBModel {
    pub classes: Vec<String>,
    pub log_prior: Vec<f64>,
    /// `log p(feature | class)`, one row per class.
    pub log_cond: Vec<Vec<f64>>,
    pub reducer: Reducer,
}

/// Multinomial NB with Lidstone smoothing:
/// `p(t|c) = (1 + Σ_{d∈D_c} f_d(t)) / (n_features + Σ_{d∈D_c} |d|_reduced)`.
pub fn nb_train(labeled: &LabeledCorpus, reducer: Reducer) -> Result<NBModel> {
    if reducer.vocab_size() != labeled.corpus.vocab_size() {
        return Err(Error::invalid("reducer and corpus vocabularies differ"));
    }
    let k = labeled.n_classes();
    let nf = reducer.n_features();
    let mut docs_per_class = vec![0usize; k];
    let mut counts = vec![vec![0.0; nf]; k];
    for (d, &c) in labeled.corpus.docs().iter().zip(&labeled.labels) {
        docs_per_class[c] += 1;
        for (t, x) in reducer.reduce(d)? {
            counts[c][t] += x;
        }
    }
    if let Some(c) = docs_per_class.iter().position(|&n| n == 0) {
        return Err(Error::invalid(format!("class {:?} has no training documents", labeled.classes[c])));
    }
    let n_docs = labeled.corpus.num_docs() as f64;
    let log_prior = docs_per_class.iter().map(|&n| (n as f64 / n_docs).ln()).collect();
    let log_cond = counts
        .iter()
        .map(|row| {
            let denom = (nf as f64 + row.iter().sum::<f64>()).ln();
            row.iter().map(|&x| (1.0 + x).ln() - denom).collect()
        })
        .collect();
    Ok(NBModel {
        classes: labeled.classes.clone(),
        log_prior,
        log_cond,
        reducer,
    })
}

impl NBModel {
    /// Class scores `log p(c) + Σ_t f_d(t) log p(t|c)`.
    pub fn scores(&self, doc: &Document) -> Result<Vec<f64>> {
        let features = self.reducer.reduce(doc)?;
        Ok(self
            .log_prior
            .iter()
            .zip(&self.log_cond)
            .map(|(&p, row)| p + features.iter().map(|&(t, x)| x * row[t]).sum::<f64>())
            .collect())
    }
}

/// Most probable class; ties go to the smaller class id.
pub fn nb_classify(model: &NBModel, doc: &Document) -> Result<usize> {
    let scores = model.scores(doc)?;
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = c;
        }
    }
    Ok(best)
}

/// Fraction of correctly classified test documents.
pub fn micro_accuracy(model: &NBModel, test: &LabeledCorpus) -> Result<f64> {
    if test.classes != model.classes {
        return Err(Error::invalid("test classes differ from the model's"));
    }
    if test.corpus.vocab_size() != model.reducer.vocab_size() {
        return Err(Error::invalid("test corpus vocabulary differs from the model's"));
    }
    let correct = test
        .corpus
        .docs()
        .par_iter()
        .zip(test.labels.par_iter())
        .map(|(d, &l)| nb_classify(model, d).map(|c| usize::from(c == l)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(correct as f64 / test.corpus.num_docs() as f64)
}

/// Writes `feature_count,micro_avg` rows.
pub fn write_accuracy_csv<W: Write>(out: W, rows: &[(usize, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature_count", "micro_avg"])?;
    for &(n, acc) in rows {
        w.write_record([n.to_string(), acc.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<accuracy csv>", e))?;
    Ok(())
}

pub fn save_accuracy_csv(path: &Path, rows: &[(usize, f64)]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_accuracy_csv(f, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::abc;
    use crate::corpus::Vocabulary;
    use crate::tg::train_ehac;

    fn labeled(corpus: Corpus, labels: &[&str]) -> LabeledCorpus {
        let map = corpus
            .docs()
            .iter()
            .zip(labels)
            .map(|(d, l)| (d.id, l.to_string()))
            .collect();
        LabeledCorpus::new(corpus, &map).unwrap()
    }

    #[test]
    fn tg_reduction_on_three_words() {
        let c = abc();
        let d = train_ehac(&c).unwrap();
        let view = d.flat_view(2).unwrap();
        // topics ordered by smallest word: {a} then {b, c}
        assert_eq!(reduce_tg(&view, &c.docs()[0]), vec![(0, 2.0), (1, 1.0)]);
        for n in 1..=3 {
            let view = d.flat_view(n).unwrap();
            for doc in c.docs() {
                let mass: f64 = reduce_tg(&view, doc).iter().map(|&(_, x)| x).sum();
                assert_eq!(mass, doc.len() as f64);
            }
        }
    }

    #[test]
    fn df_on_three_words() {
        let lc = labeled(abc(), &["x", "y"]);
        assert_eq!(select_df(&lc, 1).unwrap(), vec![1]);
        assert_eq!(select_df(&lc, 3).unwrap().len(), 3);
        assert!(select_df(&lc, 4).is_err());
    }

    #[test]
    fn ig_extremes() {
        // word 0 only in class A, word 1 everywhere, balanced classes
        let vocab = Vocabulary::from_words(["p", "q", "r"]).unwrap();
        let docs = vec![
            Document::from_counts(0, [(0, 1), (1, 1)]),
            Document::from_counts(1, [(0, 2), (1, 1), (2, 1)]),
            Document::from_counts(2, [(1, 1)]),
            Document::from_counts(3, [(1, 3), (2, 1)]),
        ];
        let lc = labeled(Corpus::with_vocabulary(vocab, docs).unwrap(), &["A", "A", "B", "B"]);
        let ig = information_gain(&lc);
        assert!((ig[0] - 2f64.ln()).abs() < 1e-12);
        assert!(ig[1].abs() < 1e-12);
        assert!(ig[2].abs() < 1e-12);
        assert_eq!(select_ig(&lc, 1).unwrap(), vec![0]);
    }

    #[test]
    fn conditionals_normalize() {
        let lc = labeled(abc(), &["x", "y"]);
        let d = train_ehac(&lc.corpus).unwrap();
        let m = nb_train(&lc, Reducer::tg(&d.flat_view(2).unwrap())).unwrap();
        for row in &m.log_cond {
            assert!((row.iter().map(|x| x.exp()).sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(micro_accuracy(&m, &lc).unwrap(), 1.0);
    }

    #[test]
    fn single_class_is_constant() {
        let lc = labeled(abc(), &["only", "only"]);
        let m = nb_train(&lc, Reducer::words(vec![0, 1, 2], 3).unwrap()).unwrap();
        assert_eq!(micro_accuracy(&m, &lc).unwrap(), 1.0);
    }

    #[test]
    fn empty_reduction_uses_priors() {
        let vocab = Vocabulary::from_words(["p", "q"]).unwrap();
        let docs = vec![
            Document::from_counts(0, [(0, 1)]),
            Document::from_counts(1, [(0, 1)]),
            Document::from_counts(2, [(1, 1)]),
        ];
        let lc = labeled(Corpus::with_vocabulary(vocab, docs).unwrap(), &["A", "B", "B"]);
        let m = nb_train(&lc, Reducer::words(vec![0], 2).unwrap()).unwrap();
        assert_eq!(nb_classify(&m, &Document::from_counts(9, [(1, 4)])).unwrap(), 1);
    }

    #[test]
    fn labels_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        std::fs::write(&p, "doc_id,label\n0,x\n1,y\n").unwrap();
        let map = load_labels(&p).unwrap();
        assert_eq!(map[&1], "y");
        std::fs::write(&p, "doc_id,label\n0,x\n0,y\n").unwrap();
        assert!(load_labels(&p).is_err());
        let lc = LabeledCorpus::new(abc(), &HashMap::from([(0, "x".to_string())]));
        assert!(lc.is_err());
    }
}
