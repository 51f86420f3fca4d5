//! Tokenizes a handful of short texts, trains a tree and prints topics at a
//! few cuts.
//!
//! cargo run --release --example text_topics

use topic_grouper::explore::{topics_table, Explorer};
use topic_grouper::ingest::{corpus_from_texts, TextOptions, Tokenizer};
use topic_grouper::train_mehac;

const TEXTS: &[&str] = &[
    "The striker scored twice as the home team won the league match.",
    "A late goal from the striker gave the team a win in the cup match.",
    "The coach praised the team after the match; the goalkeeper saved a penalty.",
    "Fans cheered the goalkeeper and the striker after the league win.",
    "The central bank raised interest rates to fight rising inflation.",
    "Markets fell as investors expected the bank to raise rates again.",
    "Inflation slowed, and the bank signalled that interest rates may fall.",
    "Bond markets rallied when inflation data surprised investors.",
    "The new telescope captured images of a distant galaxy and its stars.",
    "Astronomers used the telescope to measure light from distant stars.",
    "A galaxy merger was observed by astronomers with the space telescope.",
    "Light from the stars in the galaxy reveals its age, astronomers said.",
];

fn main() -> topic_grouper::Result<()> {
    let opts = TextOptions {
        porter_stemming: true,
        min_corpus_freq: 2,
        ..TextOptions::default()
    };
    let tokenizer = Tokenizer::new(opts.clone())?;
    let corpus = corpus_from_texts(TEXTS.iter().copied(), &tokenizer, opts.min_corpus_freq)?;
    println!("{} texts, {} stems", corpus.num_docs(), corpus.vocab_size());

    let explorer = Explorer::new(train_mehac(&corpus)?);
    for n in [2, 4] {
        println!("\nn = {n}");
        print!("{}", topics_table(&explorer, n, 12)?);
    }
    Ok(())
}
