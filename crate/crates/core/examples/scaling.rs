//! Training time of both trainers on text-like corpora of growing size.
//! With Heaps-law vocabulary growth the cost rises roughly with |D|².
//!
//! cargo run --release --example scaling -- [base_docs] [doublings] [doc_length] [exponent]

use std::time::Instant;

use topic_grouper::synth::{generate_zipf, ZipfSpec};
use topic_grouper::{train_ehac, train_mehac};

fn main() -> topic_grouper::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize| args.get(i).and_then(|s| s.parse::<f64>().ok());
    let base = arg(0).map_or(250, |x| x as usize);
    let doublings = arg(1).map_or(2, |x| x as usize);
    let defaults = ZipfSpec::default();
    let doc_length = arg(2).map_or(defaults.doc_length, |x| x as usize);
    let exponent = arg(3).unwrap_or(defaults.exponent);
    println!("{:>7} {:>7} {:>9} {:>10} {:>10}", "docs", "|V|", "tokens", "ehac s", "mehac s");
    let mut prev: Option<f64> = None;
    for k in 0..=doublings {
        let spec = ZipfSpec {
            n_docs: base << k,
            doc_length,
            exponent,
            ..defaults
        };
        let corpus = generate_zipf(&spec)?;
        let t = Instant::now();
        let a = train_ehac(&corpus)?;
        let ehac = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let b = train_mehac(&corpus)?;
        let mehac = t.elapsed().as_secs_f64();
        assert_eq!(a.merges.len(), b.merges.len());
        print!(
            "{:>7} {:>7} {:>9} {:>10.3} {:>10.3}",
            corpus.num_docs(),
            corpus.vocab_size(),
            corpus.total_tokens(),
            ehac,
            mehac
        );
        match prev {
            Some(p) => println!("   x{:.2}", ehac / p),
            None => println!(),
        }
        prev = Some(ehac);
    }
    Ok(())
}
