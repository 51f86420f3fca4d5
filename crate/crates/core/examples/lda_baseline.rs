//! Collapsed Gibbs LDA on the synthetic corpus, with the error rate tracked
//! during sampling and compared to the Topic Grouper cut.
//!
//! cargo run --release --example lda_baseline -- [sweeps]

use topic_grouper::eval::{error_rate, tg_to_model, unigram_model_n};
use topic_grouper::lda::{gibbs_train_with, GibbsConfig};
use topic_grouper::{generate_synthetic, train_mehac, SyntheticSpec};

fn main() -> topic_grouper::Result<()> {
    let sweeps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let spec = SyntheticSpec::with_seed(0);
    let (corpus, truth) = generate_synthetic(&spec)?;

    let cfg = GibbsConfig {
        n_topics: 4,
        alpha_m: spec.alpha_m_tilde.clone(),
        beta: 0.1,
        iterations: sweeps,
        burn_in: sweeps / 2,
        seed: 1,
    };
    let model = gibbs_train_with(&corpus, &cfg, |state| {
        if (state.iteration + 1) % 100 == 0 {
            let snapshot = state.to_model(&corpus).unwrap();
            let err = error_rate(&snapshot, &truth).unwrap();
            println!("sweep {:>4}  error {err:.4}", state.iteration + 1);
        }
    })?;

    let tg = tg_to_model(&train_mehac(&corpus)?, &corpus, 4)?;
    println!("lda      {:.4}", error_rate(&model, &truth)?);
    println!("tg(4)    {:.4}", error_rate(&tg, &truth)?);
    println!("unigram  {:.4}", error_rate(&unigram_model_n(&corpus, 4)?, &truth)?);
    Ok(())
}
