//! Picks a topic count from the Δh_n series: a sharp drop of Δh_n relative to
//! Δh_{n+1} marks a join of two topics that should stay apart.
//!
//! cargo run --release --example model_selection -- [seed ...]

use topic_grouper::tg::delta_h_series;
use topic_grouper::{generate_synthetic, train_mehac, SyntheticSpec};

fn main() -> topic_grouper::Result<()> {
    let seeds: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let seeds = if seeds.is_empty() { vec![0] } else { seeds };
    for seed in seeds {
        let (corpus, _) = generate_synthetic(&SyntheticSpec::with_seed(seed))?;
        let tree = train_mehac(&corpus)?;
        let series = delta_h_series(&tree);
        let best = series
            .iter()
            .filter(|r| (2..=20).contains(&r.n))
            .filter_map(|r| r.ratio.map(|x| (r.n, x)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("series covers n = 2..=20");
        println!("seed {seed}: largest ratio {:.2} at n = {}", best.1, best.0);
        for r in series.iter().rev().take(8) {
            let ratio = r.ratio.map_or(String::from("-"), |x| format!("{x:.3}"));
            println!("  n = {:>2}  Δh = {:>12.2}  ratio = {ratio}", r.n, r.delta_h);
        }
    }
    Ok(())
}
