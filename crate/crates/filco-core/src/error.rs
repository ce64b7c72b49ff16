//! Crate-wide error type.

/// Errors produced by dataset parsing, configuration, scoring, and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A JSONL line that failed to parse; `line` is 1-based.
    #[error("line {line}: invalid record: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    /// A line that parsed but violates a schema invariant.
    #[error("line {line}: {message}")]
    InvalidRecord { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A scorer failure, tagged with the span that was being scored.
    #[error("scoring span (passage {passage_rank}, sentence {sentence_index}) failed: {source}")]
    SpanScoring {
        passage_rank: u32,
        sentence_index: u32,
        #[source]
        source: Box<Error>,
    },

    /// Remote scoring request that kept failing after all retry attempts.
    /// `index` is the position of the first item of the failing batch.
    #[error("remote scoring request at item {index} failed after {attempts} attempts: {message}")]
    Remote {
        index: usize,
        attempts: u32,
        message: String,
    },

    /// A remote scorer response that does not follow the scoring protocol.
    #[error("malformed scorer response: {0}")]
    Protocol(String),

    #[error("evaluation error: {0}")]
    Eval(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid_record(line: usize, message: impl Into<String>) -> Self {
        Error::InvalidRecord {
            line,
            message: message.into(),
        }
    }
}
