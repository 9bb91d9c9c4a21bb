use std::fmt::Write;

use crate::analysis::hierarchical_order_dense;
use crate::error::{Error, Result};
use crate::table::{format_value, LabelledMatrix};

const CELL: usize = 12;
const MARGIN: usize = 120;
const LOW: [u8; 3] = [0xf7, 0xfb, 0xff];
const HIGH: [u8; 3] = [0x08, 0x30, 0x6b];
const MISSING: &str = "#bfbfbf";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Ordering {
    #[default]
    None,
    Hierarchical,
}

impl Ordering {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Ordering::None),
            "hierarchical" => Some(Ordering::Hierarchical),
            _ => None,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn fill(t: f64) -> String {
    let c: Vec<u8> = LOW
        .iter()
        .zip(HIGH)
        .map(|(&lo, hi)| (f64::from(lo) + t * (f64::from(hi) - f64::from(lo))).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Row (and column) order of the heatmap.
pub fn heatmap_order(m: &LabelledMatrix, ordering: Ordering) -> Result<Vec<usize>> {
    let n = m.labels.len();
    match ordering {
        Ordering::None => Ok((0..n).collect()),
        Ordering::Hierarchical => {
            let rows = m
                .values
                .iter()
                .map(|r| r.iter().copied().collect::<Option<Vec<f64>>>())
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::MissingEntries("hierarchical ordering needs a complete matrix".into()))?;
            Ok(hierarchical_order_dense(&rows))
        }
    }
}

/// SVG with one rect per cell, coloured on a linear ramp between the matrix
/// minimum and maximum; missing cells are grey.
pub fn emit_heatmap(m: &LabelledMatrix, ordering: Ordering) -> Result<String> {
    let order = heatmap_order(m, ordering)?;
    let n = order.len();
    let defined = m.values.iter().flatten().flatten().copied();
    let (lo, hi) = defined.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let size = MARGIN + n * CELL;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="9">"#
    );
    for (pos, &i) in order.iter().enumerate() {
        let label = escape(&m.labels[i]);
        let y = MARGIN + pos * CELL + CELL - 3;
        let _ = writeln!(out, r#"<text class="row" x="{}" y="{y}" text-anchor="end">{label}</text>"#, MARGIN - 4);
        let x = MARGIN + pos * CELL + CELL - 3;
        let _ = writeln!(
            out,
            r#"<text class="col" x="{x}" y="{}" transform="rotate(-90 {x} {})">{label}</text>"#,
            MARGIN - 4,
            MARGIN - 4
        );
    }
    for (r, &i) in order.iter().enumerate() {
        for (c, &j) in order.iter().enumerate() {
            let (color, title) = match m.values[i][j] {
                Some(v) => {
                    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
                    (fill(t), format_value(v))
                }
                None => (MISSING.to_string(), "missing".to_string()),
            };
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{color}"><title>{} / {}: {title}</title></rect>"#,
                MARGIN + c * CELL,
                MARGIN + r * CELL,
                escape(&m.labels[i]),
                escape(&m.labels[j]),
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
