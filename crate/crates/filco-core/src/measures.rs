//! The three span-utility measures: string inclusion (binary), lexical
//! unigram-F1 overlap (unit interval), and CXMI, the ratio of the
//! generator's output probability with vs. without the span in context.

use std::collections::HashMap;

use crate::data::{Example, Span, TaskKind};
use crate::error::{Error, Result};
use crate::scorer::SequenceScorer;
use crate::silver::gen_prompt;
use crate::text::tokenize;

/// Scale a measure value lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// {0, 1}
    Binary,
    /// [0, 1]
    UnitInterval,
    /// [0, ∞)
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureScore {
    pub value: f64,
    pub scale: Scale,
}

impl MeasureScore {
    pub fn in_bounds(&self) -> bool {
        match self.scale {
            Scale::Binary => self.value == 0.0 || self.value == 1.0,
            Scale::UnitInterval => (0.0..=1.0).contains(&self.value),
            Scale::Ratio => self.value >= 0.0,
        }
    }
}

/// 1 iff the span contains any output as a contiguous, case-insensitive
/// substring. Raw substring matching: "cat" matches inside "concatenate".
pub fn str_inc(span_text: &str, outputs: &[String]) -> MeasureScore {
    let haystack = span_text.to_lowercase();
    let hit = outputs
        .iter()
        .filter(|o| !o.is_empty())
        .any(|o| haystack.contains(&o.to_lowercase()));
    MeasureScore {
        value: if hit { 1.0 } else { 0.0 },
        scale: Scale::Binary,
    }
}

fn counts(tokens: &[String]) -> HashMap<&str, usize> {
    let mut map = HashMap::new();
    for t in tokens {
        *map.entry(t.as_str()).or_insert(0) += 1;
    }
    map
}

/// Multiset unigram F1 between two texts. 0 when either side has no tokens
/// or nothing overlaps.
pub fn unigram_f1(candidate: &str, reference: &str) -> MeasureScore {
    let cand = tokenize(candidate);
    let reference = tokenize(reference);
    let value = unigram_f1_tokens(&cand, &reference);
    MeasureScore {
        value,
        scale: Scale::UnitInterval,
    }
}

fn unigram_f1_tokens(cand: &[String], reference: &[String]) -> f64 {
    if cand.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let ref_counts = counts(reference);
    let cand_counts = counts(cand);
    let overlap: usize = cand_counts
        .iter()
        .map(|(tok, &c)| c.min(*ref_counts.get(tok).unwrap_or(&0)))
        .sum();
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / cand.len() as f64;
    let recall = overlap as f64 / reference.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Multiset unigram precision: the fraction of `candidate`'s tokens present
/// in `reference`'s token multiset.
pub fn unigram_precision(candidate: &str, reference: &str) -> f64 {
    let cand = tokenize(candidate);
    if cand.is_empty() {
        return 0.0;
    }
    let reference = tokenize(reference);
    let ref_counts = counts(&reference);
    let cand_counts = counts(&cand);
    let overlap: usize = cand_counts
        .iter()
        .map(|(tok, &c)| c.min(*ref_counts.get(tok).unwrap_or(&0)))
        .sum();
    overlap as f64 / cand.len() as f64
}

/// The example side the lexical measure compares spans against: the query
/// for fact verification (the output is a one-word label), the annotated
/// outputs otherwise.
pub fn lexical_target(example: &Example) -> String {
    if example.task_kind == TaskKind::FactVerification {
        example.query.clone()
    } else {
        example.outputs.join(" ")
    }
}

/// Lexical span score: F1 against the query for fact verification, the max
/// F1 over annotated outputs otherwise.
pub fn lexical_score(example: &Example, span_text: &str) -> f64 {
    if example.task_kind == TaskKind::FactVerification {
        unigram_f1(span_text, &example.query).value
    } else {
        example
            .outputs
            .iter()
            .map(|o| unigram_f1(span_text, o).value)
            .fold(0.0, f64::max)
    }
}

/// CXMI for one output string: exp(logP(output | span ⊕ query) −
/// logP(output | query)), with both prompts assembled through the
/// generation template. > 1 means the span raises the output probability.
pub fn cxmi(
    scorer: &dyn SequenceScorer,
    span: &Span,
    query: &str,
    output: &str,
    task_kind: TaskKind,
) -> Result<MeasureScore> {
    let with_span = gen_prompt(&span.text, query, task_kind);
    let without = gen_prompt("", query, task_kind);
    let attach = |e: Error| Error::SpanScoring {
        passage_rank: span.passage_rank,
        sentence_index: span.sentence_index,
        source: Box::new(e),
    };
    let lp_with = scorer.score(&with_span, output).map_err(attach)?;
    let lp_without = scorer.score(&without, output).map_err(attach)?;
    Ok(MeasureScore {
        value: (lp_with - lp_without).exp(),
        scale: Scale::Ratio,
    })
}

/// CXMI span score for an example: max ratio over annotated outputs.
pub fn cxmi_score(scorer: &dyn SequenceScorer, span: &Span, example: &Example) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for output in &example.outputs {
        let score = cxmi(scorer, span, &example.query, output, example.task_kind)?;
        best = best.max(score.value);
    }
    Ok(best)
}
