//! Backoff n-gram language models with Modified Kneser-Ney and
//! Witten-Bell smoothing.
//!
//! The crate covers the full pipeline from raw text to evaluated models:
//!
//! - [`prep`]: cleaning, sentence splitting, punctuation stripping,
//!   deduplication, seeded shuffling, and train/test splitting
//! - [`vocab`] and [`counts`]: vocabulary construction and exact n-gram
//!   statistics (counts, count-of-counts, follower and continuation
//!   statistics)
//! - [`smoothing`]: discount estimation and the per-order smoothed
//!   distributions
//! - [`model`]: backoff model assembly, scoring, and perplexity
//! - [`arpa`]: the plain-text model interchange format
//! - [`experiment`]: the training-size × order × method evaluation grid
//! - [`textgen`]: a seeded synthetic-corpus generator for repeatable
//!   demonstrations and trend tests
//!
//! See the `examples/` directory for a runnable tour of each capability,
//! and the `ngram-lm` binary for the command-line interface.

pub mod arpa;
pub mod cli;
pub mod counts;
pub mod experiment;
pub mod model;
pub mod numfmt;
pub mod prep;
pub mod smoothing;
pub mod textgen;
pub mod vocab;

pub use arpa::{load_arpa, read_arpa, save_arpa, write_arpa, ArpaError};
pub use counts::{count_ngrams, oov_count, CountHistogram, FollowerStats, NGramCountTable};
pub use experiment::{run_grid, ComparisonReport, ExperimentGrid};
pub use model::{
    build_backoff_model, build_with_options, compare_models, train_model, BackoffModel,
    BuildOptions, PerplexityReport, Score,
};
pub use prep::{prepare, PrepConfig, Sentence};
pub use smoothing::{estimate_discounts, Discounts, Method, SmoothedOrder};
pub use vocab::{Vocabulary, WordId};
