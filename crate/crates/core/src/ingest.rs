//! Readers for the supported input formats: UCI bag-of-words, order/item
//! transaction CSV and plain text.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::corpus::{Corpus, Document, Vocabulary, WordId};
use crate::error::{Error, Result};

/// Reads a UCI bag-of-words file (`D`, `W`, `NNZ` header lines followed by
/// `docId wordId count` triplets, all 1-indexed). When `vocab_path` is given
/// its line `k` names word `k`; otherwise words are named by their id.
pub fn ingest_bow(path: &Path, vocab_path: Option<&Path>) -> Result<Corpus> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["D", "W", "NNZ"]) {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::format(path, 0, format!("missing {name} header line")))?;
        let line = line.map_err(|e| Error::io(path, e))?;
        *slot = line
            .trim()
            .parse()
            .map_err(|_| Error::format(path, ln + 1, format!("malformed {name} header {line:?}")))?;
    }
    let [n_docs, n_words, nnz] = header;

    let mut docs: BTreeMap<usize, Vec<(WordId, u32)>> = BTreeMap::new();
    let mut seen = 0usize;
    for (ln, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::format(path, ln + 1, "expected `docId wordId count`"));
        }
        let parse = |s: &str| -> Result<i64> {
            s.parse()
                .map_err(|_| Error::format(path, ln + 1, format!("not an integer: {s:?}")))
        };
        let (d, w, c) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
        if d < 1 || d as usize > n_docs {
            return Err(Error::format(path, ln + 1, format!("doc id {d} outside 1..={n_docs}")));
        }
        if w < 1 || w as usize > n_words {
            return Err(Error::format(path, ln + 1, format!("word id {w} outside 1..={n_words}")));
        }
        if c <= 0 {
            return Err(Error::format(path, ln + 1, format!("non-positive count {c}")));
        }
        let c = u32::try_from(c).map_err(|_| Error::format(path, ln + 1, "count overflows"))?;
        docs.entry(d as usize).or_default().push((w as usize - 1, c));
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::format(
            path,
            3,
            format!("header declares NNZ={nnz} but file holds {seen} triplets"),
        ));
    }

    let vocab = match vocab_path {
        Some(vp) => {
            let text = fs::read_to_string(vp).map_err(|e| Error::io(vp, e))?;
            let words: Vec<String> = text.lines().map(|l| l.trim().to_owned()).collect();
            if words.len() < n_words {
                return Err(Error::format(
                    vp,
                    words.len(),
                    format!("vocabulary lists {} words, header declares {n_words}", words.len()),
                ));
            }
            Vocabulary::from_words(words.into_iter().take(n_words))?
        }
        None => Vocabulary::from_words((1..=n_words).map(|i| i.to_string()))?,
    };
    let docs = docs
        .into_iter()
        .map(|(d, counts)| Document::from_counts(d as u64, counts))
        .collect();
    Corpus::new(vocab, docs)
}

/// Reads an `order_id,item_id,quantity` CSV. Each order becomes a document and
/// each item quantity a word frequency. Rows with quantity above
/// `quantity_cap` are skipped; orders left empty disappear.
pub fn ingest_transactions(path: &Path, quantity_cap: u32) -> Result<Corpus> {
    if quantity_cap < 1 {
        return Err(Error::invalid("quantity cap must be at least 1"));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::format(path, 1, format!("missing column {name:?}")))
    };
    let (c_order, c_item, c_qty) = (col("order_id")?, col("item_id")?, col("quantity")?);

    let mut vocab = Vocabulary::new();
    let mut order_ids: HashMap<String, usize> = HashMap::new();
    let mut orders: Vec<Vec<(WordId, u32)>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |c: usize| {
            rec.get(c)
                .ok_or_else(|| Error::format(path, line, "short row"))
        };
        let qty: i64 = field(c_qty)?
            .parse()
            .map_err(|_| Error::format(path, line, "quantity is not an integer"))?;
        if qty <= 0 {
            return Err(Error::format(path, line, format!("non-positive quantity {qty}")));
        }
        let order = field(c_order)?.to_owned();
        let item = field(c_item)?;
        if item.is_empty() || order.is_empty() {
            return Err(Error::format(path, line, "empty order or item id"));
        }
        let next = orders.len();
        let slot = *order_ids.entry(order).or_insert(next);
        if slot == next {
            orders.push(Vec::new());
        }
        if qty > quantity_cap as i64 {
            continue;
        }
        let w = vocab.intern(item);
        orders[slot].push((w, qty as u32));
    }
    let docs = orders
        .into_iter()
        .enumerate()
        .map(|(i, counts)| Document::from_counts(i as u64, counts))
        .collect();
    Corpus::new(vocab, docs)
}

#[derive(Debug, Clone)]
pub struct TextOptions {
    pub min_token_length: usize,
    pub alphabetic_only: bool,
    pub porter_stemming: bool,
    pub stopword_file: Option<PathBuf>,
    /// Minimum frequency over the whole ingested collection.
    pub min_corpus_freq: u64,
}

impl Default for TextOptions {
    fn default() -> Self {
        Self {
            min_token_length: 3,
            alphabetic_only: true,
            porter_stemming: false,
            stopword_file: None,
            min_corpus_freq: 5,
        }
    }
}

/// Turns raw text into normalized tokens.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    opts: TextOptions,
    stopwords: HashSet<String>,
}

impl Tokenizer {
    pub fn new(opts: TextOptions) -> Result<Self> {
        let stopwords = match &opts.stopword_file {
            Some(p) => fs::read_to_string(p)
                .map_err(|e| Error::io(p, e))?
                .split_whitespace()
                .map(str::to_lowercase)
                .collect(),
            None => HashSet::new(),
        };
        Ok(Self { opts, stopwords })
    }

    pub fn tokenize<'a>(&'a self, text: &'a str) -> impl Iterator<Item = String> + 'a {
        text.split_whitespace().filter_map(move |raw| {
            let tok = raw
                .trim_matches(|c: char| c.is_ascii_punctuation())
                .to_lowercase();
            if tok.chars().count() < self.opts.min_token_length {
                return None;
            }
            if self.opts.alphabetic_only && !tok.chars().all(char::is_alphabetic) {
                return None;
            }
            if self.stopwords.contains(&tok) {
                return None;
            }
            Some(if self.opts.porter_stemming {
                porter_stemmer::stem(&tok)
            } else {
                tok
            })
        })
    }
}

/// Reads either a directory of `.txt` files (one document each, in file name
/// order) or a single file holding one document per line.
pub fn ingest_text(path: &Path, opts: &TextOptions) -> Result<Corpus> {
    let tokenizer = Tokenizer::new(opts.clone())?;
    let texts: Vec<String> = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        files
            .iter()
            .map(|p| fs::read_to_string(p).map_err(|e| Error::io(p, e)))
            .collect::<Result<_>>()?
    } else {
        fs::read_to_string(path)
            .map_err(|e| Error::io(path, e))?
            .lines()
            .map(str::to_owned)
            .collect()
    };
    corpus_from_texts(texts.iter().map(String::as_str), &tokenizer, opts.min_corpus_freq)
}

/// Tokenizes in-memory texts; document ids are the positions in `texts`.
pub fn corpus_from_texts<'a>(
    texts: impl IntoIterator<Item = &'a str>,
    tokenizer: &Tokenizer,
    min_corpus_freq: u64,
) -> Result<Corpus> {
    let mut vocab = Vocabulary::new();
    let mut docs = Vec::new();
    for (i, text) in texts.into_iter().enumerate() {
        let toks: Vec<WordId> = tokenizer.tokenize(text).map(|t| vocab.intern(&t)).collect();
        docs.push(Document::from_tokens(i as u64, toks));
    }
    let mut freq = vec![0u64; vocab.len()];
    for d in &docs {
        for &(w, c) in d.counts() {
            freq[w] += c as u64;
        }
    }
    let docs = docs
        .into_iter()
        .map(|d| {
            Document::from_counts(
                d.id,
                d.counts().iter().copied().filter(|&(w, _)| freq[w] >= min_corpus_freq),
            )
        })
        .collect();
    Corpus::new(vocab, docs).map_err(|e| match e {
        Error::EmptyCorpus(_) => Error::EmptyCorpus("no tokens survive text filtering".into()),
        e => e,
    })
}
