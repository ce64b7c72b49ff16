//! Context filtering for retrieval-augmented generation.
//!
//! Retrieved passages rarely support the expected output wall-to-wall;
//! this crate scores their sentences with three measures — string
//! inclusion, lexical unigram overlap, and CXMI (the generator's output
//! probability ratio with vs. without the sentence) — selects the silver
//! spans worth keeping, emits filter/generator training records, and
//! evaluates both the filtered contexts and end-task predictions.
//!
//! Modules follow the pipeline: [`data`] (records in), [`text`]
//! (tokenize/split), [`measures`] + [`scorer`] (span utility), [`select`]
//! (span selection and context assembly), [`silver`] (records out),
//! [`eval`] (metrics and reports).

pub mod data;
pub mod error;
pub mod eval;
pub mod measures;
pub mod scorer;
pub mod select;
pub mod silver;
pub mod text;

pub use error::{Error, Result};
