//! Held-out perplexity of Topic Grouper cuts against the unigram and perfect
//! baselines on a synthetic train/test split.
//!
//! cargo run --release --example held_out_perplexity -- [seed]

use topic_grouper::eval::{fit_alpha, perfect_model, perplexity, tg_to_model, unigram_model, AlphaSearch};
use topic_grouper::{generate_synthetic, train_mehac, SyntheticSpec};

fn main() -> topic_grouper::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let (full, truth) = generate_synthetic(&SyntheticSpec::with_seed(seed))?;
    let (train, test) = full.split(0.25, seed, 1)?;
    let tree = train_mehac(&train)?;

    // the concentration is fitted on a slice of the training documents
    let search = AlphaSearch {
        max_docs: Some(500),
        seed,
        ..AlphaSearch::default()
    };
    let particles = 20;

    println!("{:>10}  {:>8}  {:>10}", "model", "alpha", "perplexity");
    for n in [2, 3, 4, 6, 8, 16] {
        let (model, trace) = fit_alpha(&tg_to_model(&tree, &train, n)?, &train, &search)?;
        let p = perplexity(&model, &test, particles, seed)?;
        println!("{:>10}  {:>8.3}  {:>10.4}", format!("tg({n})"), trace.alpha, p.perplexity);
    }
    let (perfect, trace) = fit_alpha(&perfect_model(&truth, &train)?, &train, &search)?;
    let p = perplexity(&perfect, &test, particles, seed)?;
    println!("{:>10}  {:>8.3}  {:>10.4}", "perfect", trace.alpha, p.perplexity);
    let uni = perplexity(&unigram_model(&train).with_alpha(1.0), &test, particles, seed)?;
    println!("{:>10}  {:>8}  {:>10.4}", "unigram", "-", uni.perplexity);
    Ok(())
}
