//! Naive Bayes accuracy over three reduced feature spaces: Topic Grouper
//! topics, information-gain words and document-frequency words. Documents are
//! labelled by their dominant non-background true topic.
//!
//! cargo run --release --example classification

use std::collections::HashMap;

use topic_grouper::classify::{micro_accuracy, nb_train, select_df, select_ig, LabeledCorpus, Reducer};
use topic_grouper::{generate_synthetic, train_mehac, SyntheticSpec};

fn main() -> topic_grouper::Result<()> {
    let spec = SyntheticSpec {
        n_docs: 2000,
        ..SyntheticSpec::with_seed(4)
    };
    let (corpus, truth) = generate_synthetic(&spec)?;
    let labels: HashMap<u64, String> = corpus
        .docs()
        .iter()
        .map(|d| {
            let mut mass = [0u32; 4];
            for &(w, x) in d.counts() {
                mass[truth.topic_of(corpus.vocab().word(w)).unwrap()] += x;
            }
            let best = (1..4).max_by_key(|&t| (mass[t], std::cmp::Reverse(t))).unwrap();
            (d.id, format!("topic{best}"))
        })
        .collect();
    let (train, test) = LabeledCorpus::new(corpus, &labels)?.split(0.3, 0, 1)?;
    let tree = train_mehac(&train.corpus)?;
    let v = train.corpus.vocab_size();

    println!("{:>6}  {:>8}  {:>8}  {:>8}", "k", "tg", "ig", "df");
    for k in [2, 4, 8, 16, 32, v] {
        let tg = nb_train(&train, Reducer::tg(&tree.flat_view(k)?))?;
        let ig = nb_train(&train, Reducer::words(select_ig(&train, k)?, v)?)?;
        let df = nb_train(&train, Reducer::words(select_df(&train, k)?, v)?)?;
        println!(
            "{k:>6}  {:>8.4}  {:>8.4}  {:>8.4}",
            micro_accuracy(&tg, &test)?,
            micro_accuracy(&ig, &test)?,
            micro_accuracy(&df, &test)?
        );
    }
    Ok(())
}
