//! Groups products that are bought together. Orders are documents and item
//! quantities are word frequencies.
//!
//! cargo run --release --example market_basket

use std::fmt::Write as _;

use rand::Rng;
use topic_grouper::explore::{topics_table, Explorer};
use topic_grouper::ingest::ingest_transactions;
use topic_grouper::rng::rng;
use topic_grouper::train_mehac;

const AISLES: [&[&str]; 4] = [
    &["flour", "sugar", "butter", "eggs", "yeast", "vanilla"],
    &["nappies", "wipes", "formula", "baby_food", "rash_cream"],
    &["charcoal", "sausages", "buns", "ketchup", "mustard", "lighter"],
    &["shampoo", "toothpaste", "soap", "razor", "deodorant"],
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut r = rng(11);
    let mut csv = String::from("order_id,item_id,quantity\n");
    for order in 0..600 {
        // mostly one shopping mission per order, with the odd stray item
        let mission = AISLES[r.random_range(0..AISLES.len())];
        for _ in 0..r.random_range(2..6) {
            let item = if r.random_bool(0.9) {
                mission[r.random_range(0..mission.len())]
            } else {
                let other = AISLES[r.random_range(0..AISLES.len())];
                other[r.random_range(0..other.len())]
            };
            writeln!(csv, "{order},{item},{}", r.random_range(1..4)).unwrap();
        }
    }
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("orders.csv");
    std::fs::write(&path, csv)?;

    let corpus = ingest_transactions(&path, 100)?;
    println!("{} orders, {} products", corpus.num_docs(), corpus.vocab_size());
    let explorer = Explorer::new(train_mehac(&corpus)?);
    print!("{}", topics_table(&explorer, 4, 8)?);
    Ok(())
}
