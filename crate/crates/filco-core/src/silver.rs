//! Silver training/inference records for the context filter and the
//! generator, plus the prompt templates both share.
//!
//! Output line schema:
//! `{"id", "role", "input", "target", "meta": {"measure", "mode",
//! "input_tokens", "context_tokens"}}`.

use serde::{Deserialize, Serialize};

use crate::data::{Example, Measure, Passage, TaskKind};
use crate::select::ContextAssembly;
use crate::text::token_count;

/// What a silver record trains or feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SilverRole {
    /// Filter training: query + passages in, selected span text out.
    CtxTrain,
    /// Generator training: context + query in, canonical output out.
    GenTrain,
    /// Generator inference: context + query in, empty target.
    GenInfer,
}

impl SilverRole {
    pub fn as_str(self) -> &'static str {
        match self {
            SilverRole::CtxTrain => "ctx_train",
            SilverRole::GenTrain => "gen_train",
            SilverRole::GenInfer => "gen_infer",
        }
    }
}

impl std::fmt::Display for SilverRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    /// Measure that produced the context ("none" when unfiltered).
    pub measure: String,
    /// Context assembly mode: "full", "psg", or "filco".
    pub mode: String,
    /// Token count of the whole input string, template labels included.
    pub input_tokens: usize,
    /// Token count of the bare context portion, labels excluded.
    pub context_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilverRecord {
    pub id: String,
    pub role: SilverRole,
    pub input: String,
    /// Empty for `gen_infer`.
    pub target: String,
    pub meta: RecordMeta,
}

/// Label used for the query line of a generation prompt.
fn query_label(task_kind: TaskKind) -> &'static str {
    match task_kind {
        TaskKind::Dialog => "dialog history",
        TaskKind::FactVerification => "claim",
        _ => "question",
    }
}

/// Label used for the output line of a generation prompt.
fn answer_label(task_kind: TaskKind) -> &'static str {
    match task_kind {
        TaskKind::FactVerification => "judgment",
        _ => "answer",
    }
}

/// Renders one passage for a context line: "{title}: {text}", or just the
/// text when the title is empty.
pub fn passage_line(passage: &Passage) -> String {
    if passage.title.is_empty() {
        passage.text.clone()
    } else {
        format!("{}: {}", passage.title, passage.text)
    }
}

/// Filter-model input: the query followed by one "context:" line per
/// top-k passage, ending with the "filtered:" cue.
pub fn ctx_prompt(query: &str, passages: &[Passage], k: usize) -> String {
    let mut out = format!("question: {query}");
    for p in passages.iter().filter(|p| (p.rank as usize) <= k) {
        out.push_str("\ncontext: ");
        out.push_str(&passage_line(p));
    }
    out.push_str("\nfiltered:");
    out
}

/// Generator input: context line, query line, output cue. The CXMI
/// numerator uses this with the candidate span as context and the
/// denominator with an empty context.
pub fn gen_prompt(context: &str, query: &str, task_kind: TaskKind) -> String {
    format!(
        "context: {context}\n{}: {query}\n{}:",
        query_label(task_kind),
        answer_label(task_kind)
    )
}

/// Builds the filter-training record for one example. The target is the
/// selected span text (t_silver), empty when the selection is empty.
pub fn build_ctx_record(
    example: &Example,
    passages: &[Passage],
    selection: &crate::data::Selection,
    k: usize,
) -> SilverRecord {
    let input = ctx_prompt(&example.query, passages, k);
    let target = selection.joined_text();
    let input_tokens = token_count(&input);
    let context_tokens = passages
        .iter()
        .filter(|p| (p.rank as usize) <= k)
        .map(|p| token_count(&passage_line(p)))
        .sum();
    SilverRecord {
        id: example.id.clone(),
        role: SilverRole::CtxTrain,
        input,
        target,
        meta: RecordMeta {
            measure: selection.measure_used.as_str().to_string(),
            mode: "filco".to_string(),
            input_tokens,
            context_tokens,
        },
    }
}

/// Builds a generator record from an assembled context. `measure` is the
/// measure that produced the context, if any.
pub fn build_gen_record(
    example: &Example,
    context: &ContextAssembly,
    with_target: bool,
    measure: Option<Measure>,
) -> SilverRecord {
    let input = gen_prompt(&context.text, &example.query, example.task_kind);
    let target = if with_target {
        example.outputs.first().cloned().unwrap_or_default()
    } else {
        String::new()
    };
    let role = if with_target {
        SilverRole::GenTrain
    } else {
        SilverRole::GenInfer
    };
    let input_tokens = token_count(&input);
    SilverRecord {
        id: example.id.clone(),
        role,
        input,
        target,
        meta: RecordMeta {
            measure: measure.map(Measure::as_str).unwrap_or("none").to_string(),
            mode: context.mode.to_string(),
            input_tokens,
            context_tokens: context.token_count,
        },
    }
}
