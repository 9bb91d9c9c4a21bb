use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{ItemId, PerformanceRecord};
use crate::similarity::SimilarityMatrix;
use crate::stats;

pub const DEFAULT_MIN_OVERLAP: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerformanceMeasure {
    /// Natural log of solving time.
    #[default]
    LogTime,
    /// 1 for success, 0 otherwise.
    Success,
}

impl PerformanceMeasure {
    pub fn as_str(self) -> &'static str {
        match self {
            PerformanceMeasure::LogTime => "log_time",
            PerformanceMeasure::Success => "success",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "log_time" => Some(PerformanceMeasure::LogTime),
            "success" => Some(PerformanceMeasure::Success),
            _ => None,
        }
    }

    fn value(self, r: &PerformanceRecord) -> f64 {
        match self {
            PerformanceMeasure::LogTime => r.time_seconds.ln(),
            PerformanceMeasure::Success => f64::from(u8::from(r.success)),
        }
    }
}

/// Item similarity as the correlation of learners' performance on both items.
///
/// Items are those present in `records`, sorted by id. A pair with fewer than
/// `min_overlap` common learners (or zero variance) is missing. The diagonal
/// is 1.
pub fn performance_similarity(
    records: &[PerformanceRecord],
    measure: PerformanceMeasure,
    min_overlap: usize,
    measure_name: impl Into<String>,
) -> SimilarityMatrix {
    let mut learners: HashMap<&str, usize> = HashMap::new();
    let mut by_item: BTreeMap<&ItemId, HashMap<usize, f64>> = BTreeMap::new();
    for r in records {
        let next = learners.len();
        let learner = *learners.entry(r.learner_id.as_str()).or_insert(next);
        by_item
            .entry(&r.item_id)
            .or_default()
            .entry(learner)
            .or_insert_with(|| measure.value(r));
    }
    let ids: Vec<ItemId> = by_item.keys().map(|id| (*id).clone()).collect();
    let columns: Vec<&HashMap<usize, f64>> = by_item.values().collect();
    let min_overlap = min_overlap.max(2);

    SimilarityMatrix::from_pairs(ids, measure_name, |i, j| {
        if i == j {
            return Some(1.0);
        }
        let (small, large) = if columns[i].len() <= columns[j].len() {
            (columns[i], columns[j])
        } else {
            (columns[j], columns[i])
        };
        let mut pairs: Vec<(usize, f64, f64)> = small
            .iter()
            .filter_map(|(l, a)| large.get(l).map(|b| (*l, *a, *b)))
            .collect();
        if pairs.len() < min_overlap {
            return None;
        }
        // Fixed summation order independent of hash iteration.
        pairs.sort_unstable_by_key(|p| p.0);
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().map(|p| (p.1, p.2)).unzip();
        if columns[i].len() <= columns[j].len() {
            stats::pearson(&xs, &ys)
        } else {
            stats::pearson(&ys, &xs)
        }
    })
}
