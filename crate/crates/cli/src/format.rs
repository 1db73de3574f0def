//! Sequence files: b-file (`n a_n` per line), CSV (`n,a_n` per line) and
//! the full-fidelity JSON document.

use std::path::Path;

use bhg_core::verify::strong_bound_check;
use bhg_core::{Algorithm, Params, SequenceRecord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const JSON_FORMAT_TAG: &str = "bhg-sequence/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Bfile,
}

impl Format {
    /// Guess from the file extension, then from the first non-blank byte.
    pub fn detect(path: Option<&Path>, text: &str) -> Format {
        match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => return Format::Json,
            Some("csv") => return Format::Csv,
            Some("txt") | Some("bfile") => return Format::Bfile,
            _ => {}
        }
        let body = text.trim_start();
        if body.starts_with('{') {
            Format::Json
        } else if body
            .lines()
            .find(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .is_some_and(|l| l.contains(','))
        {
            Format::Csv
        } else {
            Format::Bfile
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn whole(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub n: usize,
    pub term: u64,
    pub scan_length: u64,
    pub bound_value: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    /// Growth bound checked: `2g n^(h+(h-1)/g)`.
    pub bound: String,
    pub passed: bool,
    pub first_failure: Option<usize>,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_us: u64,
    pub per_step_us: Vec<u64>,
}

/// JSON form of a [`SequenceRecord`]. Timing is only present on request so
/// that repeated runs produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDocument {
    pub format: String,
    pub params: Params,
    pub algorithm: Algorithm,
    pub terms: Vec<u64>,
    pub sorted: bool,
    pub steps: Vec<StepEntry>,
    pub bound_check: BoundSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl SequenceDocument {
    pub fn from_record(rec: &SequenceRecord, with_timing: bool) -> Self {
        let report = strong_bound_check(rec);
        let timing = with_timing.then(|| {
            let per_step_us: Vec<u64> = rec
                .per_step
                .iter()
                .map(|s| s.elapsed.as_micros() as u64)
                .collect();
            Timing {
                total_us: per_step_us.iter().sum(),
                per_step_us,
            }
        });
        Self {
            format: JSON_FORMAT_TAG.into(),
            params: rec.params,
            algorithm: rec.algorithm,
            terms: rec.terms.clone(),
            sorted: rec.is_sorted(),
            steps: rec
                .per_step
                .iter()
                .map(|s| StepEntry {
                    n: s.n,
                    term: s.term,
                    scan_length: s.scan_length,
                    bound_value: s.bound_value,
                })
                .collect(),
            bound_check: BoundSummary {
                bound: "2g*n^(h+(h-1)/g)".into(),
                passed: report.passed,
                first_failure: report.first_failure,
                max_ratio: report.max_ratio,
            },
            timing,
        }
    }
}

/// A parsed sequence file.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceInput {
    pub format: Format,
    pub terms: Vec<u64>,
    /// Only JSON carries the full document.
    pub document: Option<SequenceDocument>,
}

pub fn render_terms(terms: &[u64], format: Format) -> String {
    let sep = match format {
        Format::Csv => ',',
        Format::Bfile => ' ',
        Format::Json => unreachable!("JSON output needs a full document"),
    };
    terms
        .iter()
        .enumerate()
        .map(|(i, t)| format!("{}{sep}{t}\n", i + 1))
        .collect()
}

pub fn render_document(doc: &SequenceDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("sequence documents always serialize");
    s.push('\n');
    s
}

pub fn render(rec: &SequenceRecord, format: Format, with_timing: bool) -> String {
    match format {
        Format::Json => render_document(&SequenceDocument::from_record(rec, with_timing)),
        other => render_terms(&rec.terms, other),
    }
}

/// Writes the input back out in its own format.
pub fn rerender(input: &SequenceInput) -> String {
    match (&input.document, input.format) {
        (Some(doc), Format::Json) => render_document(doc),
        (_, f) => render_terms(&input.terms, f),
    }
}

pub fn parse(text: &str, format: Format) -> Result<SequenceInput, ParseError> {
    let (terms, document) = match format {
        Format::Json => {
            let doc: SequenceDocument =
                serde_json::from_str(text).map_err(|e| ParseError::at(e.line(), e.to_string()))?;
            if doc.format != JSON_FORMAT_TAG {
                return Err(ParseError::whole(format!(
                    "unsupported document format {:?}",
                    doc.format
                )));
            }
            (doc.terms.clone(), Some(doc))
        }
        Format::Csv => (parse_pairs(text, ',')?, None),
        Format::Bfile => (parse_pairs(text, ' ')?, None),
    };
    if terms.is_empty() {
        return Err(ParseError::whole("no terms found"));
    }
    Ok(SequenceInput {
        format,
        terms,
        document,
    })
}

/// `index<sep>value` lines with indices `1, 2, 3, ...`. Blank lines and
/// `#` comments are skipped; a CSV header `n,a_n` is allowed.
fn parse_pairs(text: &str, sep: char) -> Result<Vec<u64>, ParseError> {
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if sep == ',' && terms.is_empty() && line.replace(' ', "") == "n,a_n" {
            continue;
        }
        let fields: Vec<&str> = if sep == ' ' {
            line.split_whitespace().collect()
        } else {
            line.split(',').map(str::trim).collect()
        };
        let [index, value] = fields[..] else {
            return Err(ParseError::at(
                line_no,
                format!("expected two fields, found {}", fields.len()),
            ));
        };
        let index: usize = index
            .parse()
            .map_err(|_| ParseError::at(line_no, format!("invalid index {index:?}")))?;
        let value: u64 = value
            .parse()
            .map_err(|_| ParseError::at(line_no, format!("invalid term {value:?}")))?;
        if index != terms.len() + 1 {
            return Err(ParseError::at(
                line_no,
                format!("expected index {}, found {index}", terms.len() + 1),
            ));
        }
        if value == 0 {
            return Err(ParseError::at(line_no, "terms must be positive"));
        }
        terms.push(value);
    }
    Ok(terms)
}
