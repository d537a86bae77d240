//! Keyword detection for social-media posts with engagement-weighted,
//! IDF-filtered LDA.
//!
//! The pipeline runs in this order:
//!
//! 1. [`corpus`]: ingest posts and build the vocabulary with document
//!    frequencies.
//! 2. [`filter`]: drop terms whose IDF falls outside `[idf_min, idf_max]`,
//!    keep the most popular posts, and turn each post's likes, comments and
//!    retweets into a replication count.
//! 3. [`lda`]: fit LDA by collapsed Gibbs sampling on the replicated corpus.
//! 4. [`eval`]: take the top words of each topic as keywords and score them
//!    against labeled keywords.
//!
//! [`pipeline`] strings the stages together and writes run artifacts.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod filter;
pub mod lda;
pub mod pipeline;
mod table;

pub use corpus::{build_vocabulary, ingest, term_frequency, EncodedDoc, InputFormat, Post, Tokenization, Vocabulary};
pub use error::{Error, Result};
pub use eval::{
    compare_models, detected_keywords, generate_synthetic, score, ComparisonTable, EvalReport, LabelSet,
    PopularityModel, SyntheticSpec, TopicSelection,
};
pub use filter::{
    build_weighted_corpus, compute_idf, compute_weight, filter_vocabulary, popularity, select_top_popular, IdfTable,
    WeightedCorpus, WeightedDoc,
};
pub use lda::{fit, log_joint, top_words, topic_rank, GibbsSampler, LdaConfig, LdaModel, SamplerState};
