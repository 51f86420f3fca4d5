//! Walks a trained tree the way the explorer does: flat cuts, node details,
//! root paths and the Δh series, then prints a shallow Graphviz export.
//!
//! cargo run --release --example explore_tree

use topic_grouper::explore::{export_dot, topics_table, write_series_csv, Explorer};
use topic_grouper::{generate_synthetic, train_mehac, SyntheticSpec};

fn main() -> topic_grouper::Result<()> {
    let (corpus, _) = generate_synthetic(&SyntheticSpec::with_seed(2))?;
    let explorer = Explorer::new(train_mehac(&corpus)?);
    let meta = explorer.meta();
    println!("{} leaves, {} docs, root {}", meta.n_leaves, meta.doc_count, meta.root);

    print!("{}", topics_table(&explorer, 4, 6)?);

    let rare = explorer.flat(4, 3)?.last().unwrap().id;
    let node = explorer.node(rare, 3)?;
    println!("\ntopic {} (f = {}, {} words): {:?}", node.id, node.f, node.size, node.words);
    println!("path from root: {:?}", explorer.path(rare)?);

    let mut csv = Vec::new();
    write_series_csv(&mut csv, explorer.dendrogram())?;
    println!("\nlast merges:");
    for line in String::from_utf8_lossy(&csv).lines().rev().take(6) {
        println!("  {line}");
    }

    println!("\n{}", export_dot(explorer.dendrogram(), 2));
    Ok(())
}
