//! Read-only views of a dendrogram for browsing and export: the flat topic
//! table, node and path lookups (the JSON shapes served over HTTP), DOT and
//! FreeMind renderings, and the `Δh_n` series as CSV.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::corpus::WordId;
use crate::error::{Error, Result};
use crate::tg::{delta_h_series, Dendrogram, TopicId};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub n_leaves: usize,
    pub vocab_size: usize,
    pub doc_count: usize,
    pub root: TopicId,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatRow {
    pub id: TopicId,
    pub f: u64,
    pub size: usize,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub id: TopicId,
    pub words: Vec<String>,
    pub size: usize,
    pub f: u64,
    pub h: f64,
    /// `Δh` of the join that created the node; absent for leaves.
    pub delta_h: Option<f64>,
    /// Number of topics of the flat view in which the node first appears.
    pub n: usize,
    pub children: Vec<TopicId>,
    pub parent: Option<TopicId>,
}

/// A dendrogram with its parent links, answering explorer queries.
#[derive(Debug, Clone)]
pub struct Explorer {
    dendrogram: Dendrogram,
    parents: Vec<Option<TopicId>>,
}

impl Explorer {
    pub fn new(dendrogram: Dendrogram) -> Self {
        let parents = dendrogram.parents();
        Self { dendrogram, parents }
    }

    pub fn dendrogram(&self) -> &Dendrogram {
        &self.dendrogram
    }

    pub fn meta(&self) -> Meta {
        let d = &self.dendrogram;
        Meta {
            n_leaves: d.n_leaves,
            vocab_size: d.vocab.len(),
            doc_count: d.n_docs,
            root: d.root(),
        }
    }

    fn check_id(&self, id: TopicId) -> Result<()> {
        if id >= self.dendrogram.n_topics_total() {
            return Err(Error::invalid(format!("no topic {id}")));
        }
        Ok(())
    }

    /// The `top` most frequent member words of a topic, ties by word id.
    pub fn top_words(&self, id: TopicId, top: usize) -> Vec<String> {
        top_words(&self.dendrogram, &self.dendrogram.words_of(id), top)
    }

    /// `T(n)` sorted by `f(t)` descending, ties by smallest member word.
    pub fn flat(&self, n: usize, top: usize) -> Result<Vec<FlatRow>> {
        let mut topics = self.dendrogram.flat_view(n)?.topics;
        // flat_view orders by smallest word; a stable sort keeps that as tie-break
        topics.sort_by_key(|t| std::cmp::Reverse(t.f));
        Ok(topics
            .into_iter()
            .map(|t| FlatRow {
                id: t.id,
                f: t.f,
                size: t.words.len(),
                words: top_words(&self.dendrogram, &t.words, top),
            })
            .collect())
    }

    pub fn node(&self, id: TopicId, top: usize) -> Result<Node> {
        self.check_id(id)?;
        let d = &self.dendrogram;
        let words = d.words_of(id);
        let merge = d.merge_of(id);
        Ok(Node {
            id,
            size: words.len(),
            words: top_words(d, &words, top),
            f: d.f(id),
            h: d.h(id),
            delta_h: merge.map(|m| m.delta_h),
            n: d.created_at(id),
            children: merge.map(|m| vec![m.left_id, m.right_id]).unwrap_or_default(),
            parent: self.parents[id],
        })
    }

    /// Topic ids from the root down to `id`.
    pub fn path(&self, id: TopicId) -> Result<Vec<TopicId>> {
        self.check_id(id)?;
        let mut out = vec![id];
        let mut cur = id;
        while let Some(p) = self.parents[cur] {
            out.push(p);
            cur = p;
        }
        out.reverse();
        Ok(out)
    }
}

fn top_words(d: &Dendrogram, words: &[WordId], top: usize) -> Vec<String> {
    let mut ws = words.to_vec();
    ws.sort_by(|&a, &b| d.leaf_f[b].cmp(&d.leaf_f[a]).then(a.cmp(&b)));
    ws.into_iter().take(top).map(|w| d.vocab[w].clone()).collect()
}

/// Plain-text table of `T(n)` sorted by topic frequency.
pub fn topics_table(explorer: &Explorer, n: usize, top: usize) -> Result<String> {
    let rows = explorer.flat(n, top)?;
    let mut out = String::new();
    writeln!(out, "{:>4}  {:>8}  {:>10}  {:>6}  words", "rank", "topic", "f", "size").unwrap();
    for (i, r) in rows.iter().enumerate() {
        writeln!(out, "{:>4}  {:>8}  {:>10}  {:>6}  {}", i + 1, r.id, r.f, r.size, r.words.join(" ")).unwrap();
    }
    Ok(out)
}

/// Writes `n,delta_h,ratio` rows, `n` descending; an undefined ratio is empty.
pub fn write_series_csv<W: Write>(out: W, dendrogram: &Dendrogram) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "delta_h", "ratio"])?;
    for row in delta_h_series(dendrogram) {
        w.write_record([
            row.n.to_string(),
            row.delta_h.to_string(),
            row.ratio.map(|r| r.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<series csv>", e))?;
    Ok(())
}

/// Color on a red (rare) to blue (frequent) scale. `rel` is clamped to [0, 1].
pub fn frequency_color(rel: f64) -> String {
    let rel = rel.clamp(0.0, 1.0);
    let r = (255.0 * (1.0 - rel)).round() as u8;
    let b = (255.0 * rel).round() as u8;
    format!("#{r:02x}60{b:02x}")
}

struct Shown {
    id: TopicId,
    depth: usize,
    text: String,
    color: String,
}

/// Nodes within `max_depth` of the root in pre-order (left before right),
/// colored by log frequency relative to the shown range.
fn shown_nodes(d: &Dendrogram, max_depth: usize, top: usize) -> Vec<Shown> {
    let mut order = Vec::new();
    let mut stack = vec![(d.root(), 0)];
    while let Some((id, depth)) = stack.pop() {
        order.push((id, depth));
        if depth < max_depth {
            if let Some(m) = d.merge_of(id) {
                stack.push((m.right_id, depth + 1));
                stack.push((m.left_id, depth + 1));
            }
        }
    }
    let logf = |id| (d.f(id).max(1) as f64).ln();
    let lo = order.iter().map(|&(id, _)| logf(id)).fold(f64::INFINITY, f64::min);
    let hi = order.iter().map(|&(id, _)| logf(id)).fold(f64::NEG_INFINITY, f64::max);
    order
        .into_iter()
        .map(|(id, depth)| {
            let rel = if hi > lo { (logf(id) - lo) / (hi - lo) } else { 1.0 };
            Shown {
                id,
                depth,
                text: top_words(d, &d.words_of(id), top).join(", "),
                color: frequency_color(rel),
            }
        })
        .collect()
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Top words shown per exported node.
pub const EXPORT_TOP_WORDS: usize = 5;

/// Graphviz digraph of the tree down to `max_depth` (root at depth 0).
pub fn export_dot(d: &Dendrogram, max_depth: usize) -> String {
    let nodes = shown_nodes(d, max_depth, EXPORT_TOP_WORDS);
    let mut out = String::from("digraph topics {\n  node [shape=box, style=filled, fontcolor=white];\n");
    for n in &nodes {
        writeln!(
            out,
            "  t{} [label=\"{}\", fillcolor=\"{}\"];",
            n.id,
            dot_escape(&n.text),
            n.color
        )
        .unwrap();
    }
    for n in &nodes {
        if n.depth < max_depth {
            if let Some(m) = d.merge_of(n.id) {
                writeln!(out, "  t{} -> t{};", n.id, m.left_id).unwrap();
                writeln!(out, "  t{} -> t{};", n.id, m.right_id).unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

/// FreeMind mind map (`.mm`) of the tree down to `max_depth`.
pub fn export_freemind(d: &Dendrogram, max_depth: usize) -> String {
    let nodes = shown_nodes(d, max_depth, EXPORT_TOP_WORDS);
    let mut out = String::from("<map version=\"1.0.1\">\n");
    let mut open: Vec<usize> = Vec::new();
    for (i, n) in nodes.iter().enumerate() {
        while open.last().is_some_and(|&depth| depth >= n.depth) {
            let depth = open.pop().unwrap();
            writeln!(out, "{}</node>", "  ".repeat(depth + 1)).unwrap();
        }
        let indent = "  ".repeat(n.depth + 1);
        let attrs = format!(
            "ID=\"t{}\" TEXT=\"{}\" BACKGROUND_COLOR=\"{}\"",
            n.id,
            xml_escape(&n.text),
            n.color
        );
        let has_children = nodes.get(i + 1).is_some_and(|next| next.depth > n.depth);
        if has_children {
            writeln!(out, "{indent}<node {attrs}>").unwrap();
            open.push(n.depth);
        } else {
            writeln!(out, "{indent}<node {attrs}/>").unwrap();
        }
    }
    while let Some(depth) = open.pop() {
        writeln!(out, "{}</node>", "  ".repeat(depth + 1)).unwrap();
    }
    out.push_str("</map>\n");
    out
}
