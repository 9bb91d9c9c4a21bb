//! Number formatting and square-matrix CSV helpers shared by the writers.

use crate::error::{Error, Result};

/// Format with 9 significant digits, like C's `%.9g`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A square labelled matrix read back from CSV; empty fields are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelledMatrix {
    pub corner: String,
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

/// Render a square labelled matrix; `None` becomes an empty field.
pub fn write_square_csv(corner: &str, labels: &[String], get: impl Fn(usize, usize) -> Option<f64>) -> String {
    let mut out = String::new();
    out.push_str(corner);
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (i, l) in labels.iter().enumerate() {
        out.push_str(l);
        for j in 0..labels.len() {
            out.push(',');
            if let Some(v) = get(i, j) {
                out.push_str(&format_value(v));
            }
        }
        out.push('\n');
    }
    out
}

/// Parse a square matrix CSV whose row labels repeat the header labels.
pub fn parse_square_csv(text: &str) -> Result<LabelledMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();
    let header = rows
        .next()
        .ok_or_else(|| Error::InvalidInput("empty matrix CSV".into()))??;
    let corner = header.get(0).unwrap_or_default().to_string();
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut values = Vec::with_capacity(labels.len());
    for (i, row) in rows.enumerate() {
        let row = row?;
        if row.len() != labels.len() + 1 {
            return Err(Error::ShapeMismatch(format!(
                "row {} has {} values, expected {}",
                i + 1,
                row.len().saturating_sub(1),
                labels.len()
            )));
        }
        if labels.get(i).map(String::as_str) != row.get(0) {
            return Err(Error::ShapeMismatch(format!(
                "row {} label {:?} does not match column label {:?}",
                i + 1,
                row.get(0).unwrap_or_default(),
                labels.get(i).map(String::as_str).unwrap_or("<none>")
            )));
        }
        let parsed = row
            .iter()
            .skip(1)
            .map(|f| {
                if f.trim().is_empty() {
                    Ok(None)
                } else {
                    f.trim()
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::InvalidInput(format!("not a number: {f:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        values.push(parsed);
    }
    if values.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "matrix has {} rows and {} columns",
            values.len(),
            labels.len()
        )));
    }
    Ok(LabelledMatrix {
        corner,
        labels,
        values,
    })
}
