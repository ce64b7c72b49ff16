//! The input dataset record: one example with its retrieved passages per
//! line, schema
//! `{"id", "query", "outputs": [..], "task", "passages": [{"rank", "title",
//! "text", "score"?}, ..]}`. Unknown fields are kept and re-emitted.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{Example, Passage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    #[serde(flatten)]
    pub example: Example,
    pub passages: Vec<Passage>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl DatasetRecord {
    pub fn new(example: Example, passages: Vec<Passage>) -> Self {
        DatasetRecord {
            example,
            passages,
            extra: serde_json::Map::new(),
        }
    }
}

/// Checks record invariants and sorts passages into rank order.
/// `line` is used for error reporting only.
pub fn validate_record(record: &mut DatasetRecord, line: usize) -> Result<()> {
    let ex = &record.example;
    if ex.outputs.is_empty() {
        return Err(Error::invalid_record(line, format!("example {:?} has no outputs", ex.id)));
    }
    if let Some(bad) = ex.outputs.iter().find(|o| o.trim().is_empty()) {
        return Err(Error::invalid_record(
            line,
            format!("example {:?} has a blank output {bad:?}", ex.id),
        ));
    }
    if ex.task_kind == super::TaskKind::FactVerification {
        if let Some(bad) = ex
            .outputs
            .iter()
            .find(|o| o.as_str() != "SUPPORTS" && o.as_str() != "REFUTES")
        {
            return Err(Error::invalid_record(
                line,
                format!(
                    "fact_verification output must be SUPPORTS or REFUTES, got {bad:?} in example {:?}",
                    ex.id
                ),
            ));
        }
    }
    for p in &record.passages {
        if p.text.is_empty() {
            return Err(Error::invalid_record(
                line,
                format!("passage rank {} in example {:?} has empty text", p.rank, ex.id),
            ));
        }
    }
    let mut ranks: Vec<u32> = record.passages.iter().map(|p| p.rank).collect();
    ranks.sort_unstable();
    for pair in ranks.windows(2) {
        if pair[0] == pair[1] {
            return Err(Error::invalid_record(
                line,
                format!("duplicate passage rank {} in example {:?}", pair[0], ex.id),
            ));
        }
    }
    if let (Some(&first), Some(&last)) = (ranks.first(), ranks.last()) {
        if first != 1 || last as usize != ranks.len() {
            return Err(Error::invalid_record(
                line,
                format!(
                    "passage ranks must be contiguous from 1, got {ranks:?} in example {:?}",
                    ex.id
                ),
            ));
        }
    }
    record.passages.sort_by_key(|p| p.rank);
    Ok(())
}

/// Streaming iterator over validated dataset records in file order.
pub struct RecordIter<R> {
    inner: super::JsonlIter<DatasetRecord, R>,
}

impl<R: BufRead> Iterator for RecordIter<R> {
    type Item = Result<DatasetRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let item = self.inner.next()?;
        Some(item.and_then(|(line, mut record)| {
            validate_record(&mut record, line)?;
            Ok(record)
        }))
    }
}

pub fn read_records<R: BufRead>(reader: R) -> RecordIter<R> {
    RecordIter {
        inner: super::read_jsonl(reader),
    }
}

/// Reads and validates a whole dataset into memory, in file order.
pub fn read_examples<R: BufRead>(reader: R) -> Result<Vec<DatasetRecord>> {
    read_records(reader).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TaskKind;
    use std::io::BufReader;

    fn parse(data: &str) -> Result<Vec<DatasetRecord>> {
        read_examples(BufReader::new(data.as_bytes()))
    }

    #[test]
    fn single_line_two_passages() {
        let data = r#"{"id":"e1","query":"who?","outputs":["x"],"task":"extractive_qa","passages":[{"rank":1,"title":"t1","text":"a."},{"rank":2,"title":"t2","text":"b.","score":0.7}]}"#;
        let recs = parse(data).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].passages.len(), 2);
        assert_eq!(recs[0].example.task_kind, TaskKind::ExtractiveQa);
        assert_eq!(recs[0].passages[1].retrieval_score, Some(0.7));
    }

    #[test]
    fn empty_stream() {
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn duplicate_rank_is_an_error_with_line_number() {
        let data = r#"{"id":"e1","query":"q","outputs":["x"],"task":"extractive_qa","passages":[{"rank":1,"title":"","text":"a."},{"rank":1,"title":"","text":"b."}]}"#;
        match parse(data) {
            Err(Error::InvalidRecord { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("duplicate"), "{message}");
            }
            other => panic!("expected duplicate-rank error, got {other:?}"),
        }
    }

    #[test]
    fn non_contiguous_ranks_rejected() {
        let data = r#"{"id":"e1","query":"q","outputs":["x"],"task":"extractive_qa","passages":[{"rank":2,"title":"","text":"a."}]}"#;
        assert!(matches!(parse(data), Err(Error::InvalidRecord { .. })));
    }

    #[test]
    fn passages_sorted_by_rank_after_read() {
        let data = r#"{"id":"e1","query":"q","outputs":["x"],"task":"dialog","passages":[{"rank":2,"title":"","text":"b."},{"rank":1,"title":"","text":"a."}]}"#;
        let recs = parse(data).unwrap();
        let ranks: Vec<u32> = recs[0].passages.iter().map(|p| p.rank).collect();
        assert_eq!(ranks, [1, 2]);
    }

    #[test]
    fn empty_outputs_rejected() {
        let data = r#"{"id":"e1","query":"q","outputs":[],"task":"dialog","passages":[]}"#;
        assert!(matches!(parse(data), Err(Error::InvalidRecord { .. })));
        let data = r#"{"id":"e1","query":"q","outputs":["  "],"task":"dialog","passages":[]}"#;
        assert!(matches!(parse(data), Err(Error::InvalidRecord { .. })));
    }

    #[test]
    fn fever_labels_enforced() {
        let data = r#"{"id":"e1","query":"claim","outputs":["SUPPORTS"],"task":"fact_verification","passages":[]}"#;
        assert!(parse(data).is_ok());
        let data = r#"{"id":"e1","query":"claim","outputs":["MAYBE"],"task":"fact_verification","passages":[]}"#;
        assert!(matches!(parse(data), Err(Error::InvalidRecord { .. })));
    }

    #[test]
    fn unknown_fields_survive_roundtrip() {
        let data = r#"{"id":"e1","query":"q","outputs":["x"],"task":"extractive_qa","custom_flag":true,"passages":[{"rank":1,"title":"","text":"a.","wiki_par_id":"12_3"}]}"#;
        let recs = parse(data).unwrap();
        assert_eq!(recs[0].extra["custom_flag"], serde_json::json!(true));
        assert_eq!(recs[0].passages[0].extra["wiki_par_id"], serde_json::json!("12_3"));
        let mut out = Vec::new();
        crate::data::write_jsonl(&mut out, &recs).unwrap();
        let back = parse(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let good = r#"{"id":"e1","query":"q","outputs":["x"],"task":"dialog","passages":[]}"#;
        let data = format!("{good}\n{{broken\n");
        match parse(&data) {
            Err(Error::Json { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected Json error, got {other:?}"),
        }
    }
}
