//! Candidate span enumeration over top-K passages, silver span selection
//! per measure, the PSG passage-wise baseline, and context assembly for
//! the FULL / PSG / FilCo modes.

use serde::{Deserialize, Serialize};

use crate::data::{
    Example, Fallback, FilterConfig, Granularity, Measure, Passage, Selection, Span,
};
use crate::error::{Error, Result};
use crate::measures::{cxmi_score, lexical_score, str_inc};
use crate::scorer::SequenceScorer;
use crate::silver::passage_line;
use crate::text::{split_sentences, token_count};

/// How the generation context is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextMode {
    /// All top-k passages, unfiltered.
    Full,
    /// Whole passages kept by passage-wise filtering.
    Psg,
    /// Selected sentence spans.
    Filco,
}

impl ContextMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ContextMode::Full => "full",
            ContextMode::Psg => "psg",
            ContextMode::Filco => "filco",
        }
    }
}

impl std::fmt::Display for ContextMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where an assembled context came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ContextSource {
    /// The selection behind a filco context.
    Spans(Selection),
    /// Ranks of the passages behind a full or psg context.
    Passages(Vec<u32>),
}

/// A ready-to-prompt context string with its provenance and token count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextAssembly {
    pub mode: ContextMode,
    pub text: String,
    pub source: ContextSource,
    pub token_count: usize,
}

/// Sentence spans of all passages ranked <= k, in (rank, sentence) order.
/// k beyond the passage list simply uses every passage.
pub fn enumerate_spans(passages: &[Passage], k: usize) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut ranked: Vec<&Passage> = passages.iter().filter(|p| (p.rank as usize) <= k).collect();
    ranked.sort_by_key(|p| p.rank);
    for passage in ranked {
        for frag in split_sentences(&passage.text) {
            spans.push(Span {
                passage_rank: passage.rank,
                sentence_index: frag.index as u32,
                text: passage.text[frag.start..frag.end].to_string(),
                char_start: frag.start,
                char_end: frag.end,
            });
        }
    }
    spans
}

/// One span covering a whole passage.
fn whole_passage_span(passage: &Passage) -> Span {
    Span {
        passage_rank: passage.rank,
        sentence_index: 0,
        text: passage.text.clone(),
        char_start: 0,
        char_end: passage.text.len(),
    }
}

fn candidate_spans(passages: &[Passage], k: usize, granularity: Granularity) -> Vec<Span> {
    match granularity {
        Granularity::Sentence => enumerate_spans(passages, k),
        Granularity::Passage | Granularity::Full => {
            let mut ranked: Vec<&Passage> =
                passages.iter().filter(|p| (p.rank as usize) <= k).collect();
            ranked.sort_by_key(|p| p.rank);
            ranked.into_iter().map(whole_passage_span).collect()
        }
    }
}

fn score_span(
    example: &Example,
    span: &Span,
    measure: Measure,
    scorer: Option<&dyn SequenceScorer>,
) -> Result<f64> {
    match measure {
        Measure::StrInc => Ok(str_inc(&span.text, &example.outputs).value),
        Measure::Lexical => Ok(lexical_score(example, &span.text)),
        Measure::Cxmi => {
            let scorer = scorer.ok_or_else(|| {
                Error::Config("the cxmi measure requires a sequence scorer".into())
            })?;
            cxmi_score(scorer, span, example)
        }
    }
}

/// Indices of the spans a measure admits, given all span scores:
/// the first hits for str_inc, everything strictly above the threshold for
/// lexical and cxmi ranked by score with document-order tie-break. At most
/// `max_spans` indices, returned in document order.
fn admitted_indices(measure: Measure, scores: &[f64], threshold: f64, max_spans: usize) -> Vec<usize> {
    let mut picked: Vec<usize> = match measure {
        Measure::StrInc => scores
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1.0)
            .map(|(i, _)| i)
            .take(max_spans)
            .collect(),
        Measure::Lexical | Measure::Cxmi => {
            let mut passing: Vec<usize> = (0..scores.len())
                .filter(|&i| scores[i] > threshold)
                .collect();
            // stable sort keeps document order among equal scores
            passing.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
            passing.truncate(max_spans);
            passing
        }
    };
    picked.sort_unstable();
    picked
}

/// Selects silver spans for one example under `config`.
///
/// str_inc takes the first span(s) containing an output; lexical and cxmi
/// take the argmax among spans scoring strictly above the threshold, ties
/// broken toward the smallest (rank, sentence). When nothing passes, the
/// fallback policy decides what, if anything, is selected.
pub fn select_silver(
    example: &Example,
    passages: &[Passage],
    config: &FilterConfig,
    scorer: Option<&dyn SequenceScorer>,
) -> Result<Selection> {
    config.validate()?;
    if config.measure == Measure::Cxmi && scorer.is_none() {
        return Err(Error::Config("the cxmi measure requires a sequence scorer".into()));
    }
    let candidates = candidate_spans(passages, config.top_k, config.granularity);
    let mut scores = Vec::with_capacity(candidates.len());
    for span in &candidates {
        scores.push(score_span(example, span, config.measure, scorer)?);
    }

    let picked = admitted_indices(config.measure, &scores, config.threshold, config.max_spans);
    if !picked.is_empty() {
        return Ok(Selection {
            spans: picked.iter().map(|&i| candidates[i].clone()).collect(),
            scores: picked.iter().map(|&i| scores[i]).collect(),
            measure_used: config.measure,
        });
    }

    match config.fallback {
        Fallback::Empty => Ok(Selection::empty(config.measure)),
        Fallback::TopSentence => match candidates.into_iter().next() {
            None => Ok(Selection::empty(config.measure)),
            Some(first) => {
                let score = scores[0];
                Ok(Selection {
                    spans: vec![first],
                    scores: vec![score],
                    measure_used: config.measure,
                })
            }
        },
        Fallback::FullPassage => {
            let top = passages.iter().find(|p| p.rank == 1);
            match top {
                None => Ok(Selection::empty(config.measure)),
                Some(p) => {
                    let span = whole_passage_span(p);
                    let score = score_span(example, &span, config.measure, scorer)?;
                    Ok(Selection {
                        spans: vec![span],
                        scores: vec![score],
                        measure_used: config.measure,
                    })
                }
            }
        }
    }
}

/// Passage-wise filtering baseline: each whole passage is scored as a single
/// span and kept iff it passes the measure's inclusion rule. Zero or more
/// passages may be kept; rank order is preserved.
pub fn select_passages_psg(
    example: &Example,
    passages: &[Passage],
    config: &FilterConfig,
    scorer: Option<&dyn SequenceScorer>,
) -> Result<Vec<Passage>> {
    config.validate()?;
    if config.measure == Measure::Cxmi && scorer.is_none() {
        return Err(Error::Config("the cxmi measure requires a sequence scorer".into()));
    }
    let mut ranked: Vec<&Passage> = passages
        .iter()
        .filter(|p| (p.rank as usize) <= config.top_k)
        .collect();
    ranked.sort_by_key(|p| p.rank);
    let mut kept = Vec::new();
    for passage in ranked {
        let span = whole_passage_span(passage);
        let score = score_span(example, &span, config.measure, scorer)?;
        let passes = match config.measure {
            Measure::StrInc => score == 1.0,
            Measure::Lexical | Measure::Cxmi => score > config.threshold,
        };
        if passes {
            kept.push(passage.clone());
        }
    }
    Ok(kept)
}

/// Assembles the generation context for a mode. `selection` is required
/// for filco; full joins the top-k passages, psg joins the passages given
/// in `passages` (the caller passes the kept ones).
pub fn assemble_context(
    mode: ContextMode,
    passages: &[Passage],
    selection: Option<&Selection>,
    k: usize,
) -> ContextAssembly {
    match mode {
        ContextMode::Filco => {
            let selection = selection.cloned().unwrap_or_else(|| Selection::empty(Measure::StrInc));
            let text = selection.joined_text();
            ContextAssembly {
                mode,
                token_count: token_count(&text),
                text,
                source: ContextSource::Spans(selection),
            }
        }
        ContextMode::Full | ContextMode::Psg => {
            let mut ranked: Vec<&Passage> = match mode {
                ContextMode::Full => passages.iter().filter(|p| (p.rank as usize) <= k).collect(),
                _ => passages.iter().collect(),
            };
            ranked.sort_by_key(|p| p.rank);
            let text = ranked
                .iter()
                .map(|p| passage_line(p))
                .collect::<Vec<_>>()
                .join(" ");
            ContextAssembly {
                mode,
                token_count: token_count(&text),
                text,
                source: ContextSource::Passages(ranked.iter().map(|p| p.rank).collect()),
            }
        }
    }
}
