//! Sequence scorers: the generator stand-ins that CXMI measures
//! probabilities against. Two backends: a deterministic additive-smoothed
//! n-gram model (desk-scale, hand-verifiable) and a remote HTTP client for
//! real generator models served elsewhere.

mod ngram;
mod remote;

pub use ngram::NGramModel;
pub use remote::{
    remote_score, RemoteScorer, RemoteScorerConfig, ScoreRequest, ScoreRequestItem, ScoreResponse,
    ScoreResponseItem, SCORER_URL_ENV,
};

use crate::error::Result;

/// Scores the log-probability of `target` as a continuation of `prefix`.
///
/// Implementations must be deterministic (same inputs, same output), return
/// finite sums of token log-probabilities, and be safe to call from
/// multiple threads.
pub trait SequenceScorer: Send + Sync {
    fn score(&self, prefix: &str, target: &str) -> Result<f64>;

    /// Batch scoring; the default maps `score` over the items. Results are
    /// aligned to request order.
    fn score_batch(&self, items: &[(String, String)]) -> Result<Vec<f64>> {
        items.iter().map(|(p, t)| self.score(p, t)).collect()
    }
}
