//! Dataset data model: examples, retrieved passages, sentence spans, and
//! the filtering configuration shared by every pipeline stage.

mod dataset;
mod jsonl;

pub use dataset::{read_examples, read_records, validate_record, DatasetRecord, RecordIter};
pub use jsonl::{read_jsonl, write_jsonl, write_jsonl_line, JsonlIter};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The task family an example belongs to; drives target selection for the
/// lexical measure, prompt field labels, and metric defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    ExtractiveQa,
    MultihopQa,
    LongformQa,
    FactVerification,
    Dialog,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::ExtractiveQa => "extractive_qa",
            TaskKind::MultihopQa => "multihop_qa",
            TaskKind::LongformQa => "longform_qa",
            TaskKind::FactVerification => "fact_verification",
            TaskKind::Dialog => "dialog",
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One task instance: query plus its annotated output set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub query: String,
    /// Annotated answers/responses; metrics take the max over these.
    pub outputs: Vec<String>,
    #[serde(rename = "task")]
    pub task_kind: TaskKind,
    /// Ids of the annotated provenance articles, when the dataset has them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Vec<String>>,
}

/// A ranked retrieved text unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    /// 1-based position in the retrieved list; rank 1 is the top hit.
    pub rank: u32,
    #[serde(default)]
    pub title: String,
    pub text: String,
    #[serde(rename = "score", default, skip_serializing_if = "Option::is_none")]
    pub retrieval_score: Option<f64>,
    /// Source article id, when the dataset has provenance annotations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    /// Unknown fields, preserved verbatim across read/write.
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl Passage {
    pub fn new(rank: u32, title: impl Into<String>, text: impl Into<String>) -> Self {
        Passage {
            rank,
            title: title.into(),
            text: text.into(),
            retrieval_score: None,
            provenance: None,
            extra: serde_json::Map::new(),
        }
    }
}

/// A sentence-level fragment of a passage, with provenance back into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Span {
    /// Rank of the passage this span came from.
    pub passage_rank: u32,
    /// 0-based sentence order within that passage.
    pub sentence_index: u32,
    pub text: String,
    /// Byte offset of the span in the passage text.
    pub char_start: usize,
    /// Byte offset one past the span end.
    pub char_end: usize,
}

impl Span {
    pub fn key(&self) -> (u32, u32) {
        (self.passage_rank, self.sentence_index)
    }
}

/// The three span-utility measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    StrInc,
    Lexical,
    Cxmi,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::StrInc => "str_inc",
            Measure::Lexical => "lexical",
            Measure::Cxmi => "cxmi",
        }
    }

    pub const ALL: [Measure; 3] = [Measure::StrInc, Measure::Lexical, Measure::Cxmi];
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unit of text the filter scores: sentences, whole passages, or the
/// unfiltered concatenation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Sentence,
    Passage,
    Full,
}

/// What to select when no span passes the measure's inclusion rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// Select nothing; the context is empty.
    Empty,
    /// Select the first sentence of the top-ranked passage.
    TopSentence,
    /// Select the entire top-ranked passage as one span.
    FullPassage,
}

/// Full configuration of one filtering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub measure: Measure,
    /// Inclusion threshold (strictly greater-than). Unit interval for
    /// lexical, ratio scale for cxmi, ignored by str_inc.
    pub threshold: f64,
    pub granularity: Granularity,
    /// Number of top-ranked passages considered.
    pub top_k: usize,
    pub fallback: Fallback,
    /// Maximum number of spans to select.
    pub max_spans: usize,
}

impl FilterConfig {
    pub const DEFAULT_LEXICAL_THRESHOLD: f64 = 0.5;
    pub const DEFAULT_CXMI_THRESHOLD: f64 = 1.0;

    /// Configuration with the default threshold for `measure`, k = 1,
    /// sentence granularity, empty fallback, single best span.
    pub fn for_measure(measure: Measure) -> Self {
        let threshold = match measure {
            Measure::Lexical | Measure::StrInc => Self::DEFAULT_LEXICAL_THRESHOLD,
            Measure::Cxmi => Self::DEFAULT_CXMI_THRESHOLD,
        };
        FilterConfig {
            measure,
            threshold,
            granularity: Granularity::Sentence,
            top_k: 1,
            fallback: Fallback::Empty,
            max_spans: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.top_k < 1 {
            return Err(Error::Config("top_k must be >= 1".into()));
        }
        if self.max_spans < 1 {
            return Err(Error::Config("max_spans must be >= 1".into()));
        }
        match self.measure {
            Measure::Lexical => {
                if !(0.0..=1.0).contains(&self.threshold) {
                    return Err(Error::Config(format!(
                        "lexical threshold must lie in [0, 1], got {}",
                        self.threshold
                    )));
                }
            }
            Measure::Cxmi => {
                if self.threshold <= 0.0 {
                    return Err(Error::Config(format!(
                        "cxmi threshold is a probability ratio and must be > 0, got {}",
                        self.threshold
                    )));
                }
            }
            Measure::StrInc => {}
        }
        Ok(())
    }
}

/// The spans chosen for one example, with their scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Selected spans in (passage_rank, sentence_index) order. May be empty.
    pub spans: Vec<Span>,
    /// Measure scores aligned with `spans`.
    pub scores: Vec<f64>,
    pub measure_used: Measure,
}

impl Selection {
    pub fn empty(measure: Measure) -> Self {
        Selection {
            spans: Vec::new(),
            scores: Vec::new(),
            measure_used: measure,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Span texts joined by single spaces in document order; the t_silver
    /// string used as filter-training target and filtered context.
    pub fn joined_text(&self) -> String {
        self.spans
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}
