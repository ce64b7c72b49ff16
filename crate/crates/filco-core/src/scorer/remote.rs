//! HTTP client for a remote scoring service.
//!
//! Protocol (field names are part of the contract):
//!   POST <endpoint>  {"items":[{"prefix": str, "target": str}, ...]}
//!   200              {"items":[{"logprob": float}, ...]}
//!
//! Responses are aligned to request order. Items are sent in batches with
//! bounded in-flight concurrency; each batch is retried with exponential
//! backoff up to the configured attempt count.

use std::sync::Arc;
use std::time::Duration;

use futures::stream::{self, StreamExt, TryStreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use crate::error::{Error, Result};

use super::SequenceScorer;

/// Environment variable consulted for the scorer endpoint when no explicit
/// URL is given.
pub const SCORER_URL_ENV: &str = "FILCO_SCORER_URL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequestItem {
    pub prefix: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub items: Vec<ScoreRequestItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponseItem {
    pub logprob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub items: Vec<ScoreResponseItem>,
}

#[derive(Debug, Clone)]
pub struct RemoteScorerConfig {
    /// Maximum concurrent HTTP requests per client instance.
    pub max_in_flight: usize,
    /// Items per HTTP request.
    pub batch_size: usize,
    /// Total attempts per request (first try included).
    pub attempts: u32,
    /// Backoff before the first retry; doubles per subsequent retry.
    pub initial_backoff: Duration,
    pub request_timeout: Duration,
}

impl Default for RemoteScorerConfig {
    fn default() -> Self {
        RemoteScorerConfig {
            max_in_flight: 8,
            batch_size: 16,
            attempts: 3,
            initial_backoff: Duration::from_millis(100),
            request_timeout: Duration::from_secs(60),
        }
    }
}

/// Blocking client for the scoring protocol. Owns its async runtime, so it
/// must be constructed and used outside of any tokio context.
pub struct RemoteScorer {
    endpoint: String,
    config: RemoteScorerConfig,
    client: reqwest::Client,
    limiter: Arc<Semaphore>,
    runtime: tokio::runtime::Runtime,
}

impl RemoteScorer {
    pub fn new(endpoint: impl Into<String>) -> Result<Self> {
        Self::with_config(endpoint, RemoteScorerConfig::default())
    }

    pub fn with_config(endpoint: impl Into<String>, config: RemoteScorerConfig) -> Result<Self> {
        if config.batch_size == 0 || config.max_in_flight == 0 || config.attempts == 0 {
            return Err(Error::Config(
                "remote scorer batch_size, max_in_flight, and attempts must be >= 1".into(),
            ));
        }
        let client = reqwest::Client::builder()
            .timeout(config.request_timeout)
            .build()
            .map_err(|e| Error::Config(format!("failed to build HTTP client: {e}")))?;
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        Ok(RemoteScorer {
            endpoint: endpoint.into(),
            limiter: Arc::new(Semaphore::new(config.max_in_flight)),
            config,
            client,
            runtime,
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// Scores all items, preserving order. Batches run concurrently up to
    /// the in-flight cap shared by all callers of this instance.
    pub fn score_many(&self, items: &[(String, String)]) -> Result<Vec<f64>> {
        if items.is_empty() {
            return Ok(Vec::new());
        }
        let batches: Vec<(usize, ScoreRequest)> = items
            .chunks(self.config.batch_size)
            .enumerate()
            .map(|(i, chunk)| {
                let request = ScoreRequest {
                    items: chunk
                        .iter()
                        .map(|(prefix, target)| ScoreRequestItem {
                            prefix: prefix.clone(),
                            target: target.clone(),
                        })
                        .collect(),
                };
                (i * self.config.batch_size, request)
            })
            .collect();

        let results: Vec<Vec<f64>> = self.runtime.block_on(
            stream::iter(batches.into_iter().map(|(first_index, request)| {
                let limiter = Arc::clone(&self.limiter);
                async move {
                    let _permit = limiter
                        .acquire()
                        .await
                        .expect("scorer semaphore closed");
                    self.send_with_retry(first_index, request).await
                }
            }))
            .buffered(self.config.max_in_flight)
            .try_collect(),
        )?;
        Ok(results.into_iter().flatten().collect())
    }

    async fn send_with_retry(&self, first_index: usize, request: ScoreRequest) -> Result<Vec<f64>> {
        let expected = request.items.len();
        let mut backoff = self.config.initial_backoff;
        let mut last_error = String::new();
        for attempt in 1..=self.config.attempts {
            if attempt > 1 {
                tokio::time::sleep(backoff).await;
                backoff *= 2;
            }
            match self.client.post(&self.endpoint).json(&request).send().await {
                Err(e) => last_error = format!("transport error: {e}"),
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        let body: ScoreResponse = response
                            .json()
                            .await
                            .map_err(|e| Error::Protocol(format!("bad response body: {e}")))?;
                        if body.items.len() != expected {
                            return Err(Error::Protocol(format!(
                                "response has {} items, request had {expected}",
                                body.items.len()
                            )));
                        }
                        return Ok(body.items.into_iter().map(|i| i.logprob).collect());
                    }
                    last_error = format!("HTTP status {status}");
                }
            }
        }
        Err(Error::Remote {
            index: first_index,
            attempts: self.config.attempts,
            message: last_error,
        })
    }
}

impl SequenceScorer for RemoteScorer {
    fn score(&self, prefix: &str, target: &str) -> Result<f64> {
        let scores = self.score_many(&[(prefix.to_string(), target.to_string())])?;
        Ok(scores[0])
    }

    fn score_batch(&self, items: &[(String, String)]) -> Result<Vec<f64>> {
        self.score_many(items)
    }
}

/// One-shot convenience: scores `requests` against `endpoint` with default
/// client settings.
pub fn remote_score(endpoint: &str, requests: &[(String, String)]) -> Result<Vec<f64>> {
    RemoteScorer::new(endpoint)?.score_many(requests)
}
