//! Line-delimited JSON reading and writing with 1-based line numbers in
//! every parse error.

use std::io::{BufRead, Write};
use std::marker::PhantomData;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Streaming reader over one JSON record per line. Blank lines are skipped.
pub struct JsonlIter<T, R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    _marker: PhantomData<T>,
}

impl<T: DeserializeOwned, R: BufRead> Iterator for JsonlIter<T, R> {
    /// The 1-based line number paired with the parsed record.
    type Item = Result<(usize, T)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line_no += 1;
            match self.lines.next()? {
                Err(e) => return Some(Err(Error::Io(e))),
                Ok(line) => {
                    if line.trim().is_empty() {
                        continue;
                    }
                    return Some(
                        serde_json::from_str::<T>(&line)
                            .map(|v| (self.line_no, v))
                            .map_err(|e| Error::Json {
                                line: self.line_no,
                                source: e,
                            }),
                    );
                }
            }
        }
    }
}

pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R) -> JsonlIter<T, R> {
    JsonlIter {
        lines: reader.lines(),
        line_no: 0,
        _marker: PhantomData,
    }
}

/// Writes one record as a single JSON line.
pub fn write_jsonl_line<T: Serialize, W: Write>(writer: &mut W, record: &T) -> Result<()> {
    serde_json::to_writer(&mut *writer, record).map_err(|e| Error::Protocol(e.to_string()))?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Writes records in order, one JSON line each. Parsing the output with
/// [`read_jsonl`] yields the input records field-for-field.
pub fn write_jsonl<'a, T, W, I>(writer: &mut W, records: I) -> Result<()>
where
    T: Serialize + 'a,
    W: Write,
    I: IntoIterator<Item = &'a T>,
{
    for record in records {
        write_jsonl_line(writer, record)?;
    }
    Ok(())
}
