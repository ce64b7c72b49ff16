//! End-task and context-quality metrics: exact match, unigram F1, context
//! precision, retrieval recall, and length-reduction reporting.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::data::{DatasetRecord, TaskKind};
use crate::error::{Error, Result};
use crate::measures::{unigram_f1, unigram_precision};
use crate::silver::SilverRecord;
use crate::text::normalize_answer;

/// 1 iff the normalized prediction equals any normalized answer.
pub fn exact_match(prediction: &str, answers: &[String]) -> bool {
    let pred = normalize_answer(prediction);
    answers.iter().any(|a| normalize_answer(a) == pred)
}

/// Max unigram F1 between the normalized prediction and each normalized
/// answer.
pub fn f1_metric(prediction: &str, answers: &[String]) -> f64 {
    let pred = normalize_answer(prediction);
    answers
        .iter()
        .map(|a| unigram_f1(&pred, &normalize_answer(a)).value)
        .fold(0.0, f64::max)
}

/// Unigram precision of output tokens found in the context token multiset,
/// max over annotated outputs. Empty context scores 0.
pub fn context_precision(outputs: &[String], context: &str) -> f64 {
    outputs
        .iter()
        .map(|o| unigram_precision(o, context))
        .fold(0.0, f64::max)
}

/// How a passage counts as "hitting" an example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecallMode {
    /// The passage text contains an answer string (case-insensitive).
    AnswerString,
    /// The passage's provenance id is among the example's annotated ids.
    Provenance,
}

fn passage_hits(record: &DatasetRecord, rank_limit: usize, mode: RecallMode) -> Result<bool> {
    let passages = record
        .passages
        .iter()
        .filter(|p| (p.rank as usize) <= rank_limit);
    match mode {
        RecallMode::AnswerString => {
            let needles: Vec<String> = record
                .example
                .outputs
                .iter()
                .map(|o| o.to_lowercase())
                .collect();
            for p in passages {
                let hay = p.text.to_lowercase();
                if needles.iter().any(|n| !n.is_empty() && hay.contains(n)) {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        RecallMode::Provenance => {
            let annotated = record.example.provenance.as_ref().ok_or_else(|| {
                Error::Eval(format!(
                    "example {:?} has no provenance field; provenance recall needs it",
                    record.example.id
                ))
            })?;
            for p in passages {
                let pid = p.provenance.as_ref().ok_or_else(|| {
                    Error::Eval(format!(
                        "passage rank {} of example {:?} has no provenance id",
                        p.rank, record.example.id
                    ))
                })?;
                if annotated.contains(pid) {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Percentage of examples whose top-k passages hit, per `mode`.
pub fn retrieval_recall(dataset: &[DatasetRecord], k: usize, mode: RecallMode) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Eval("recall is undefined on an empty dataset".into()));
    }
    let mut hits = 0usize;
    for record in dataset {
        if passage_hits(record, k, mode)? {
            hits += 1;
        }
    }
    Ok(100.0 * hits as f64 / dataset.len() as f64)
}

/// Mean token counts of one context-assembly mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeLengths {
    pub mode: String,
    pub count: usize,
    pub mean_input_tokens: f64,
    pub mean_context_tokens: f64,
}

/// Length reduction of one mode relative to "full".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub mode: String,
    /// 100·(1 − mean input tokens / full's mean input tokens).
    pub input_reduction_pct: Option<f64>,
    /// Same, over the bare context portion.
    pub context_reduction_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub modes: Vec<ModeLengths>,
    /// Present for every non-full mode when a "full" group exists.
    pub reductions: Vec<ReductionRow>,
}

/// Groups records by meta.mode and reports mean input/context tokens plus
/// the reduction of each mode against the "full" group.
pub fn length_report(records: &[SilverRecord]) -> LengthReport {
    let mut groups: BTreeMap<&str, (usize, u64, u64)> = BTreeMap::new();
    for r in records {
        let g = groups.entry(r.meta.mode.as_str()).or_insert((0, 0, 0));
        g.0 += 1;
        g.1 += r.meta.input_tokens as u64;
        g.2 += r.meta.context_tokens as u64;
    }
    let modes: Vec<ModeLengths> = groups
        .iter()
        .map(|(mode, &(n, input, context))| ModeLengths {
            mode: mode.to_string(),
            count: n,
            mean_input_tokens: input as f64 / n as f64,
            mean_context_tokens: context as f64 / n as f64,
        })
        .collect();
    let full = modes.iter().find(|m| m.mode == "full").cloned();
    let reductions = match full {
        None => Vec::new(),
        Some(full) => modes
            .iter()
            .filter(|m| m.mode != "full")
            .map(|m| ReductionRow {
                mode: m.mode.clone(),
                input_reduction_pct: (full.mean_input_tokens > 0.0)
                    .then(|| 100.0 * (1.0 - m.mean_input_tokens / full.mean_input_tokens)),
                context_reduction_pct: (full.mean_context_tokens > 0.0)
                    .then(|| 100.0 * (1.0 - m.mean_context_tokens / full.mean_context_tokens)),
            })
            .collect(),
    };
    LengthReport { modes, reductions }
}

/// Which end-task metric to score with. FEVER accuracy is exact match over
/// the normalized labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    ExactMatch,
    UnigramF1,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::ExactMatch => "exact_match",
            MetricKind::UnigramF1 => "unigram_f1",
        }
    }

    pub fn score(self, prediction: &str, answers: &[String]) -> f64 {
        match self {
            MetricKind::ExactMatch => exact_match(prediction, answers) as u8 as f64,
            MetricKind::UnigramF1 => f1_metric(prediction, answers),
        }
    }
}

/// One line of a predictions file: `{"id": str, "prediction": str}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub prediction: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleScore {
    pub id: String,
    pub score: f64,
}

/// Means over the positive/negative top-1 passage split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveSplit {
    pub positive_mean: f64,
    pub positive_support: usize,
    pub negative_mean: f64,
    pub negative_support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub metric: String,
    /// Number of scored examples.
    pub support: usize,
    /// Mean per-example score × 100, paper-style points.
    pub mean: f64,
    pub per_example: Vec<ExampleScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<PositiveSplit>,
}

/// Whether the example's top-1 passage supports its output: answer-string
/// containment for extractive QA, provenance match for everything else.
pub fn is_positive_example(record: &DatasetRecord) -> Result<bool> {
    let mode = if record.example.task_kind == TaskKind::ExtractiveQa {
        RecallMode::AnswerString
    } else {
        RecallMode::Provenance
    };
    passage_hits(record, 1, mode)
}

/// Scores predictions against the dataset. Predictions are matched by id;
/// any example without a prediction is an error listing the missing ids.
pub fn evaluate(
    predictions: &HashMap<String, String>,
    dataset: &[DatasetRecord],
    metric: MetricKind,
    split_by_positive: bool,
) -> Result<EvalSummary> {
    if dataset.is_empty() {
        return Err(Error::Eval("cannot evaluate an empty dataset".into()));
    }
    let missing: Vec<&str> = dataset
        .iter()
        .filter(|r| !predictions.contains_key(&r.example.id))
        .map(|r| r.example.id.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Eval(format!(
            "missing predictions for {} example(s): {}",
            missing.len(),
            missing.join(", ")
        )));
    }

    let mut per_example = Vec::with_capacity(dataset.len());
    let mut total = 0.0;
    let mut pos = (0.0, 0usize);
    let mut neg = (0.0, 0usize);
    for record in dataset {
        let prediction = &predictions[&record.example.id];
        let score = metric.score(prediction, &record.example.outputs);
        total += score;
        if split_by_positive {
            if is_positive_example(record)? {
                pos.0 += score;
                pos.1 += 1;
            } else {
                neg.0 += score;
                neg.1 += 1;
            }
        }
        per_example.push(ExampleScore {
            id: record.example.id.clone(),
            score,
        });
    }

    let split = split_by_positive.then(|| PositiveSplit {
        positive_mean: if pos.1 > 0 { 100.0 * pos.0 / pos.1 as f64 } else { 0.0 },
        positive_support: pos.1,
        negative_mean: if neg.1 > 0 { 100.0 * neg.0 / neg.1 as f64 } else { 0.0 },
        negative_support: neg.1,
    });
    Ok(EvalSummary {
        metric: metric.as_str().to_string(),
        support: dataset.len(),
        mean: 100.0 * total / dataset.len() as f64,
        per_example,
        split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Example, Passage};
    use approx::assert_abs_diff_eq;

    fn answers(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn record(id: &str, task: TaskKind, outputs: &[&str], passages: Vec<Passage>) -> DatasetRecord {
        DatasetRecord::new(
            Example {
                id: id.into(),
                query: "q".into(),
                outputs: answers(outputs),
                task_kind: task,
                provenance: None,
            },
            passages,
        )
    }

    #[test]
    fn exact_match_normalizes() {
        assert!(exact_match("The Beatles", &answers(&["beatles"])));
        assert!(!exact_match("beetles", &answers(&["beatles"])));
        assert!(exact_match("b", &answers(&["a", "b"])));
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1_metric("exact answer", &answers(&["exact answer"])), 1.0);
        assert_eq!(f1_metric("wholly different", &answers(&["no overlap here"])), 0.0);
        assert_abs_diff_eq!(f1_metric("a b c", &answers(&["b c d"])), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn em_implies_f1_one() {
        for (p, a) in [("The Beatles!", "beatles"), ("An Apple", "apple")] {
            let ans = answers(&[a]);
            assert!(exact_match(p, &ans));
            assert_eq!(f1_metric(p, &ans), 1.0);
        }
    }

    #[test]
    fn context_precision_examples() {
        assert_eq!(context_precision(&answers(&["x y"]), "x y z"), 1.0);
        assert_eq!(context_precision(&answers(&["x y"]), "x a"), 0.5);
        assert_eq!(context_precision(&answers(&["x y"]), ""), 0.0);
        // max over outputs
        assert_eq!(context_precision(&answers(&["zz qq", "x"]), "x y"), 1.0);
    }

    #[test]
    fn recall_answer_string_fixture() {
        // 6 of 10 examples contain the answer in the top-1 passage
        let mut dataset = Vec::new();
        for i in 0..10 {
            let text = if i < 6 { "holds token77 here." } else { "holds nothing." };
            dataset.push(record(
                &format!("e{i}"),
                TaskKind::ExtractiveQa,
                &["token77"],
                vec![Passage::new(1, "", text)],
            ));
        }
        let r = retrieval_recall(&dataset, 1, RecallMode::AnswerString).unwrap();
        assert_eq!(r, 60.0);
    }

    #[test]
    fn recall_monotone_in_k() {
        let dataset = vec![
            record(
                "a",
                TaskKind::ExtractiveQa,
                &["needle"],
                vec![
                    Passage::new(1, "", "nothing"),
                    Passage::new(2, "", "the needle is here"),
                ],
            ),
            record("b", TaskKind::ExtractiveQa, &["needle"], vec![Passage::new(1, "", "no")]),
        ];
        let r1 = retrieval_recall(&dataset, 1, RecallMode::AnswerString).unwrap();
        let r2 = retrieval_recall(&dataset, 2, RecallMode::AnswerString).unwrap();
        assert!(r2 >= r1);
        assert_eq!(r1, 0.0);
        assert_eq!(r2, 50.0);
    }

    #[test]
    fn recall_empty_dataset_errors() {
        assert!(retrieval_recall(&[], 1, RecallMode::AnswerString).is_err());
    }

    #[test]
    fn recall_provenance_mode() {
        let mut rec = record("a", TaskKind::Dialog, &["resp"], vec![Passage::new(1, "", "text")]);
        rec.example.provenance = Some(vec!["wiki:42".into()]);
        rec.passages[0].provenance = Some("wiki:42".into());
        assert_eq!(retrieval_recall(&[rec.clone()], 1, RecallMode::Provenance).unwrap(), 100.0);
        rec.passages[0].provenance = Some("wiki:7".into());
        assert_eq!(retrieval_recall(&[rec.clone()], 1, RecallMode::Provenance).unwrap(), 0.0);
        rec.passages[0].provenance = None;
        assert!(retrieval_recall(&[rec.clone()], 1, RecallMode::Provenance).is_err());
        rec.example.provenance = None;
        assert!(retrieval_recall(&[rec], 1, RecallMode::Provenance).is_err());
    }

    fn silver(mode: &str, input_tokens: usize, context_tokens: usize) -> SilverRecord {
        use crate::silver::{RecordMeta, SilverRole};
        SilverRecord {
            id: "x".into(),
            role: SilverRole::GenTrain,
            input: String::new(),
            target: String::new(),
            meta: RecordMeta {
                measure: "none".into(),
                mode: mode.into(),
                input_tokens,
                context_tokens,
            },
        }
    }

    #[test]
    fn length_report_reduction_arithmetic() {
        let records = vec![silver("full", 100, 90), silver("filco", 40, 30)];
        let report = length_report(&records);
        let row = report.reductions.iter().find(|r| r.mode == "filco").unwrap();
        assert_abs_diff_eq!(row.input_reduction_pct.unwrap(), 60.0, epsilon = 1e-12);
        assert_abs_diff_eq!(row.context_reduction_pct.unwrap(), 100.0 * (1.0 - 30.0 / 90.0), epsilon = 1e-12);
    }

    #[test]
    fn length_report_identical_contexts_zero_reduction() {
        let records = vec![silver("full", 80, 70), silver("filco", 80, 70)];
        let report = length_report(&records);
        let row = &report.reductions[0];
        assert_eq!(row.input_reduction_pct.unwrap(), 0.0);
        assert_eq!(row.context_reduction_pct.unwrap(), 0.0);
    }

    #[test]
    fn length_report_without_full_group() {
        let report = length_report(&[silver("filco", 10, 5)]);
        assert!(report.reductions.is_empty());
        assert_eq!(report.modes.len(), 1);
    }

    fn preds(pairs: &[(&str, &str)]) -> HashMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn evaluate_all_correct_is_100() {
        let dataset = vec![
            record("a", TaskKind::ExtractiveQa, &["x"], vec![Passage::new(1, "", "x here")]),
            record("b", TaskKind::ExtractiveQa, &["y"], vec![Passage::new(1, "", "y here")]),
        ];
        let s = evaluate(&preds(&[("a", "x"), ("b", "y")]), &dataset, MetricKind::ExactMatch, false).unwrap();
        assert_eq!(s.mean, 100.0);
        assert_eq!(s.support, 2);
        assert!(s.split.is_none());
    }

    #[test]
    fn evaluate_half_correct_is_50() {
        let dataset = vec![
            record("a", TaskKind::ExtractiveQa, &["x"], vec![]),
            record("b", TaskKind::ExtractiveQa, &["y"], vec![]),
            record("c", TaskKind::ExtractiveQa, &["z"], vec![]),
            record("d", TaskKind::ExtractiveQa, &["w"], vec![]),
        ];
        let s = evaluate(
            &preds(&[("a", "x"), ("b", "y"), ("c", "wrong"), ("d", "also wrong")]),
            &dataset,
            MetricKind::ExactMatch,
            false,
        )
        .unwrap();
        assert_eq!(s.mean, 50.0);
    }

    #[test]
    fn evaluate_missing_ids_are_listed() {
        let dataset = vec![
            record("a", TaskKind::ExtractiveQa, &["x"], vec![]),
            record("b", TaskKind::ExtractiveQa, &["y"], vec![]),
        ];
        let err = evaluate(&preds(&[("a", "x")]), &dataset, MetricKind::ExactMatch, false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('b'), "{msg}");
    }

    #[test]
    fn evaluate_split_by_positive() {
        // 2 positive (answer in top-1), 2 negative; positives both correct,
        // negatives one correct → pos mean 100, neg mean 50
        let dataset = vec![
            record("p1", TaskKind::ExtractiveQa, &["x"], vec![Passage::new(1, "", "x lives here")]),
            record("p2", TaskKind::ExtractiveQa, &["y"], vec![Passage::new(1, "", "y lives here")]),
            record("n1", TaskKind::ExtractiveQa, &["z"], vec![Passage::new(1, "", "unrelated")]),
            record("n2", TaskKind::ExtractiveQa, &["w"], vec![Passage::new(1, "", "unrelated")]),
        ];
        let s = evaluate(
            &preds(&[("p1", "x"), ("p2", "y"), ("n1", "z"), ("n2", "nope")]),
            &dataset,
            MetricKind::ExactMatch,
            true,
        )
        .unwrap();
        let split = s.split.unwrap();
        assert_eq!((split.positive_support, split.negative_support), (2, 2));
        assert_eq!(split.positive_mean, 100.0);
        assert_eq!(split.negative_mean, 50.0);
        // split means recombine to the overall mean, weighted by support
        let recombined = (split.positive_mean * split.positive_support as f64
            + split.negative_mean * split.negative_support as f64)
            / s.support as f64;
        assert_abs_diff_eq!(recombined, s.mean, epsilon = 1e-12);
    }
}
