//! Tweet datasets: schema, CSV ingestion, JSON-lines persistence, splits,
//! summary statistics and id-based fetching.

mod fetch;
mod io;
mod record;
mod split;
mod stats;

pub use fetch::{
    fetch_tweets_by_id, Clock, FetchOutcome, FetchPolicy, InMemoryTransport, ManualClock,
    SystemClock, TransportError, TweetTransport,
};
pub use io::{load_csv, load_csv_as, load_jsonl, read_csv, read_jsonl, save_csv, save_jsonl, write_csv, write_jsonl, LoadedCsv};
pub use record::{
    AugmentationMethod, AugmentationProvenance, Dataset, Dialect, Label, LabelVector, Language,
    Replacement, Source, TweetRecord,
};
pub use split::{split_train_val, SplitSpec, Stratify};
pub use stats::{dataset_stats, round1, StatsSummary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV parse error at row {row}: {message}")]
    Parse { row: u64, message: String },
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("unknown dialect `{0}`")]
    UnknownDialect(String),
    #[error("row {row}: {message}")]
    InvalidRow { row: u64, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("JSON-lines error at line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("invalid split: {0}")]
    Split(String),
    #[error("ingestion failed for {} id(s) after retries: {}", unfetched.len(), unfetched.join(", "))]
    Ingestion {
        unfetched: Vec<String>,
        partial: Box<Dataset>,
    },
}
