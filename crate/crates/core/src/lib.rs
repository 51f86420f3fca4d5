//! Topic models built by agglomerative clustering of vocabulary words.
//!
//! The crate covers the whole pipeline: corpus ingestion and synthesis
//! ([`corpus`], [`ingest`], [`synth`]), training of the merge tree ([`tg`]),
//! held-out evaluation and error rates ([`eval`]), an LDA Gibbs baseline
//! ([`lda`]), Naive-Bayes classification over reduced feature spaces
//! ([`classify`]) and read-only views for exploration and export
//! ([`explore`]).

pub mod classify;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod explore;
pub mod ingest;
pub mod lda;
pub mod rng;
pub mod synth;
pub mod tg;

pub use corpus::{Corpus, Document, Vocabulary, WordId};
pub use error::{Error, Result};
pub use eval::TopicModel;
pub use synth::{generate_synthetic, SyntheticSpec, TrueModel};
pub use tg::{train_ehac, train_mehac, Dendrogram, FlatView};
