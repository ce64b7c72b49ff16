//! Additive-smoothed n-gram language model. This exists to make CXMI
//! testable with hand-computable probabilities, not to be a good LM.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::text::tokenize;

use super::SequenceScorer;

/// Sentinel id padding the left edge of every sequence. Never predicted and
/// not part of the vocabulary.
const BEGIN: u32 = 0;
/// End-of-sequence sentinel; part of the vocabulary.
const END: u32 = 1;
const FIRST_WORD_ID: u32 = 2;
/// Id assigned to tokens never seen in training. Not in the vocabulary, so
/// any context containing it is unseen and any count lookup for it is zero.
const OOV: u32 = u32::MAX;

#[derive(Debug, Default)]
struct ContextCounts {
    total: u64,
    per_token: HashMap<u32, u64>,
}

/// Order-n model with additive smoothing:
/// P(tok | ctx) = (count(ctx, tok) + α) / (count(ctx) + α·|V|),
/// where V is the set of training tokens plus the end sentinel.
#[derive(Debug)]
pub struct NGramModel {
    order: usize,
    alpha: f64,
    token_ids: HashMap<String, u32>,
    contexts: HashMap<Vec<u32>, ContextCounts>,
}

impl NGramModel {
    /// Trains on one sequence per corpus line. Lines are tokenized, padded
    /// with n−1 begin sentinels, and closed with the end sentinel.
    pub fn train<I, S>(corpus: I, order: usize, alpha: f64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if order < 1 {
            return Err(Error::Config("n-gram order must be >= 1".into()));
        }
        if alpha <= 0.0 {
            return Err(Error::Config("smoothing constant alpha must be > 0".into()));
        }
        let mut model = NGramModel {
            order,
            alpha,
            token_ids: HashMap::new(),
            contexts: HashMap::new(),
        };
        let mut saw_line = false;
        for line in corpus {
            saw_line = true;
            let mut ids: Vec<u32> = vec![BEGIN; order - 1];
            for tok in tokenize(line.as_ref()) {
                let next_id = FIRST_WORD_ID + model.token_ids.len() as u32;
                let id = *model.token_ids.entry(tok).or_insert(next_id);
                ids.push(id);
            }
            ids.push(END);
            for i in (order - 1)..ids.len() {
                let ctx = ids[i + 1 - order..i].to_vec();
                let entry = model.contexts.entry(ctx).or_default();
                entry.total += 1;
                *entry.per_token.entry(ids[i]).or_insert(0) += 1;
            }
        }
        if !saw_line {
            return Err(Error::Config("n-gram training corpus is empty".into()));
        }
        Ok(model)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// |V|: distinct training tokens plus the end sentinel.
    pub fn vocab_size(&self) -> usize {
        self.token_ids.len() + 1
    }

    fn id_of(&self, token: &str) -> u32 {
        self.token_ids.get(token).copied().unwrap_or(OOV)
    }

    /// log P(token | context window), additive-smoothed. Unseen contexts
    /// are uniform over V; unseen tokens get the smoothing floor.
    fn log_prob(&self, window: &[u32], token_id: u32) -> f64 {
        let denom_v = self.alpha * self.vocab_size() as f64;
        match self.contexts.get(window) {
            None => (1.0 / self.vocab_size() as f64).ln(),
            Some(cc) => {
                let count = cc.per_token.get(&token_id).copied().unwrap_or(0);
                ((count as f64 + self.alpha) / (cc.total as f64 + denom_v)).ln()
            }
        }
    }

    /// Chain-rule sum of log P over target token ids, conditioning each on
    /// the last n−1 ids of prefix ⧺ target-so-far.
    fn score_ids(&self, prefix_ids: &[u32], target_ids: &[u32]) -> f64 {
        let mut window: Vec<u32> = vec![BEGIN; self.order - 1];
        for &id in prefix_ids {
            window.push(id);
        }
        let mut sum = 0.0;
        for &id in target_ids {
            let start = window.len() - (self.order - 1);
            sum += self.log_prob(&window[start..], id);
            window.push(id);
        }
        sum
    }
}

impl SequenceScorer for NGramModel {
    fn score(&self, prefix: &str, target: &str) -> Result<f64> {
        let prefix_ids: Vec<u32> = tokenize(prefix).iter().map(|t| self.id_of(t)).collect();
        let target_ids: Vec<u32> = tokenize(target).iter().map(|t| self.id_of(t)).collect();
        Ok(self.score_ids(&prefix_ids, &target_ids))
    }
}
