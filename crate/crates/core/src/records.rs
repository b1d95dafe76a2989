//! Tab-separated record files shared by the CLI, the evaluator and the
//! annotation store.
//!
//! Predictions: `doc_id  sentence_id  start  end  head  text`
//! Gold:        `doc_id  sentence_id  start  end`
//!
//! Token indices are 1-based and inclusive. Blank lines and lines starting
//! with `#` are ignored. A prediction file is also a valid gold file.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conllu::Sentence;
use crate::error::{Error, Result};
use crate::eval::Span;
use crate::extract::NounPhrase;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub doc_id: String,
    pub sentence_id: String,
    pub start: usize,
    pub end: usize,
    pub head: usize,
    pub text: String,
}

impl PredictionRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.doc_id, self.sentence_id, self.start, self.end, self.head, self.text
        )
    }
}

/// Attach surface text to phrases. Phrases of unknown sentences get empty text.
pub fn prediction_records(phrases: &[NounPhrase], sentences: &[Sentence]) -> Vec<PredictionRecord> {
    let lookup: HashMap<(&str, &str), &Sentence> = sentences
        .iter()
        .map(|s| ((s.doc_id.as_str(), s.sent_id.as_str()), s))
        .collect();
    phrases
        .iter()
        .map(|p| PredictionRecord {
            doc_id: p.doc_id.clone(),
            sentence_id: p.sentence_id.clone(),
            start: p.start,
            end: p.end,
            head: p.head,
            text: lookup
                .get(&(p.doc_id.as_str(), p.sentence_id.as_str()))
                .map(|s| s.surface(p.start, p.end))
                .unwrap_or_default(),
        })
        .collect()
}

pub fn write_predictions<W: Write>(mut out: W, records: &[PredictionRecord]) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_line())?;
    }
    Ok(())
}

pub fn write_gold<W: Write>(mut out: W, spans: &[Span]) -> io::Result<()> {
    for s in spans {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            s.doc_id, s.sentence_id, s.start, s.end
        )?;
    }
    Ok(())
}

/// Read gold spans; any columns after the fourth are ignored.
pub fn parse_gold<R: BufRead>(input: R, source_name: &str) -> Result<Vec<Span>> {
    let mut spans = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::record(source_name, line_no, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 {
            return Err(Error::record(
                source_name,
                line_no,
                format!("expected at least 4 fields, found {}", fields.len()),
            ));
        }
        let index = |s: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(Error::record(
                    source_name,
                    line_no,
                    format!("'{s}' is not a positive token index"),
                )),
            }
        };
        let (start, end) = (index(fields[2])?, index(fields[3])?);
        if start > end {
            return Err(Error::record(
                source_name,
                line_no,
                format!("start {start} is after end {end}"),
            ));
        }
        spans.push(Span::new(fields[0], fields[1], start, end));
    }
    Ok(spans)
}

pub fn read_gold_file(path: impl AsRef<Path>) -> Result<Vec<Span>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_gold(BufReader::new(file), &path.display().to_string())
}
