//! Generates a synthetic corpus with four disjoint true topics, trains a
//! Topic Grouper tree on it and compares the error rate of the four-topic cut
//! with the unigram and perfect models.
//!
//! cargo run --release --example synthetic_recovery -- [seed]

use std::time::Instant;

use topic_grouper::eval::{error_rate, perfect_model, tg_to_model, unigram_model_n};
use topic_grouper::{generate_synthetic, train_mehac, SyntheticSpec};

fn main() -> topic_grouper::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let (corpus, truth) = generate_synthetic(&SyntheticSpec::with_seed(seed))?;
    println!(
        "corpus: {} docs, {} words, {} tokens",
        corpus.num_docs(),
        corpus.vocab_size(),
        corpus.total_tokens()
    );

    let start = Instant::now();
    let tree = train_mehac(&corpus)?;
    println!("trained in {:.2?}", start.elapsed());

    let tg = error_rate(&tg_to_model(&tree, &corpus, 4)?, &truth)?;
    let uni = error_rate(&unigram_model_n(&corpus, 4)?, &truth)?;
    let perfect = error_rate(&perfect_model(&truth, &corpus)?, &truth)?;
    println!("error rate  tg(n=4) {tg:.4}  unigram {uni:.4}  perfect {perfect:.4}");
    Ok(())
}
