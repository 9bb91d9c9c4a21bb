use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::corpus::{Corpus, ItemId};
use crate::error::{Error, Result};

pub const PERFORMANCE_HEADER: [&str; 4] = ["learner_id", "item_id", "time_seconds", "success"];

/// One learner's result on one item.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerformanceRecord {
    pub learner_id: String,
    pub item_id: ItemId,
    pub time_seconds: f64,
    pub success: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PerformanceLog {
    /// File order, first occurrence of each (learner, item) pair.
    pub records: Vec<PerformanceRecord>,
    pub duplicates_dropped: usize,
}

fn bad_row(line: usize, message: impl Into<String>) -> Error {
    Error::Performance {
        line,
        message: message.into(),
    }
}

/// Parse performance CSV text. When `corpus` is given, item ids are checked
/// against it. Repeated (learner, item) rows keep the first occurrence.
pub fn parse_performance(text: &str, corpus: Option<&Corpus>) -> Result<PerformanceLog> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != PERFORMANCE_HEADER {
        let missing: Vec<_> = PERFORMANCE_HEADER
            .iter()
            .filter(|c| !header.iter().any(|h| h == **c))
            .collect();
        let message = if missing.is_empty() {
            format!("header must be exactly {:?}", PERFORMANCE_HEADER.join(","))
        } else {
            format!("missing column(s) {missing:?}")
        };
        return Err(bad_row(1, message));
    }

    let mut log = PerformanceLog::default();
    let mut seen: HashSet<(String, ItemId)> = HashSet::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| bad_row(line, e.to_string()))?;
        if row.len() != 4 {
            return Err(bad_row(line, format!("expected 4 fields, found {}", row.len())));
        }
        let learner_id = row[0].to_string();
        if learner_id.is_empty() {
            return Err(bad_row(line, "empty learner_id"));
        }
        let item_id = ItemId::new(&row[1]).map_err(|e| bad_row(line, e.to_string()))?;
        if let Some(corpus) = corpus {
            if corpus.get(&item_id).is_none() {
                return Err(bad_row(line, format!("unknown item_id {item_id}")));
            }
        }
        let time_seconds: f64 = row[2]
            .trim()
            .parse()
            .map_err(|_| bad_row(line, format!("time_seconds {:?} is not a number", &row[2])))?;
        if !(time_seconds.is_finite() && time_seconds > 0.0) {
            return Err(bad_row(line, format!("time_seconds must be positive, found {time_seconds}")));
        }
        let success = match row[3].trim() {
            "1" => true,
            "0" => false,
            other => return Err(bad_row(line, format!("success must be 0 or 1, found {other:?}"))),
        };
        if !seen.insert((learner_id.clone(), item_id.clone())) {
            log.duplicates_dropped += 1;
            continue;
        }
        log.records.push(PerformanceRecord {
            learner_id,
            item_id,
            time_seconds,
            success,
        });
    }
    if log.duplicates_dropped > 0 {
        log::info!("dropped {} duplicate (learner, item) rows", log.duplicates_dropped);
    }
    Ok(log)
}

pub fn load_performance(path: impl AsRef<Path>, corpus: Option<&Corpus>) -> Result<PerformanceLog> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_performance(&text, corpus).map_err(|e| e.in_file(path))
}

pub fn write_performance(records: &[PerformanceRecord], mut out: impl Write) -> Result<()> {
    writeln!(out, "{}", PERFORMANCE_HEADER.join(","))?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{}",
            r.learner_id,
            r.item_id,
            r.time_seconds,
            u8::from(r.success)
        )?;
    }
    Ok(())
}
