//! Agreement between similarity measures, agreement between agreement
//! methods, split-half stability, and clustering evaluation.

mod cluster;

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use cluster::{cluster_eval, hierarchical_order, hierarchical_order_dense, kmeans, rand_index, KMeans, Partition};

use crate::corpus::{ItemId, PerformanceRecord};
use crate::error::{Error, Result};
use crate::similarity::{performance_similarity, PerformanceMeasure, SimilarityMatrix};
use crate::stats;
use crate::table::write_square_csv;

/// Strict upper triangle `(i, j, value)` with `i < j`, row-major, skipping
/// missing entries.
pub fn flatten_pairs(s: &SimilarityMatrix) -> Vec<((usize, usize), f64)> {
    let n = s.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            if let Some(v) = s.get(i, j) {
                out.push(((i, j), v));
            }
        }
    }
    out
}

/// Put `s2` in the item order of `s1`; fails unless both cover the same items.
fn aligned(s1: &SimilarityMatrix, s2: &SimilarityMatrix) -> Result<SimilarityMatrix> {
    if s1.item_ids() == s2.item_ids() {
        return Ok(s2.clone());
    }
    let a: BTreeSet<&ItemId> = s1.item_ids().iter().collect();
    let b: BTreeSet<&ItemId> = s2.item_ids().iter().collect();
    if a != b {
        return Err(Error::ShapeMismatch(format!(
            "{} and {} cover different items",
            s1.measure_name(),
            s2.measure_name()
        )));
    }
    s2.select(s1.item_ids())
}

/// Pearson correlation over the item pairs defined in both matrices.
pub fn agreement_correlation(s1: &SimilarityMatrix, s2: &SimilarityMatrix) -> Result<f64> {
    let s2 = aligned(s1, s2)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = flatten_pairs(s1)
        .into_iter()
        .filter_map(|((i, j), x)| s2.get(i, j).map(|y| (x, y)))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} and {} share {} defined pairs",
            s1.measure_name(),
            s2.measure_name(),
            xs.len()
        )));
    }
    stats::pearson(&xs, &ys).ok_or_else(|| {
        Error::InsufficientData(format!(
            "zero variance in {} or {}",
            s1.measure_name(),
            s2.measure_name()
        ))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopNAgreement {
    pub value: f64,
    /// Items with fewer than `n` defined neighbours in either matrix.
    pub skipped: Vec<ItemId>,
}

/// The `n` most similar other items, ties broken by ascending id.
fn top_neighbours(s: &SimilarityMatrix, i: usize, n: usize) -> Option<Vec<usize>> {
    let ids = s.item_ids();
    let mut cands: Vec<(usize, f64)> = (0..s.len())
        .filter(|&j| j != i)
        .filter_map(|j| s.get(i, j).map(|v| (j, v)))
        .collect();
    if cands.len() < n {
        return None;
    }
    cands.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| ids[a.0].cmp(&ids[b.0])));
    Some(cands.into_iter().take(n).map(|(j, _)| j).collect())
}

/// Mean fraction of shared top-`n` neighbours per item.
pub fn agreement_topn(s1: &SimilarityMatrix, s2: &SimilarityMatrix, n: usize) -> Result<TopNAgreement> {
    if n == 0 {
        return Err(Error::InvalidInput("top-n agreement needs n >= 1".into()));
    }
    let s2 = aligned(s1, s2)?;
    let mut total = 0.0;
    let mut counted = 0usize;
    let mut skipped = Vec::new();
    for i in 0..s1.len() {
        match (top_neighbours(s1, i, n), top_neighbours(&s2, i, n)) {
            (Some(a), Some(b)) => {
                let shared = a.iter().filter(|j| b.contains(j)).count();
                total += shared as f64 / n as f64;
                counted += 1;
            }
            _ => skipped.push(s1.item_ids()[i].clone()),
        }
    }
    if counted == 0 {
        return Err(Error::InsufficientData(format!(
            "no item has {n} defined neighbours in both {} and {}",
            s1.measure_name(),
            s2.measure_name()
        )));
    }
    if !skipped.is_empty() {
        log::info!("top-{n} agreement skipped {} item(s)", skipped.len());
    }
    Ok(TopNAgreement {
        value: total / counted as f64,
        skipped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgreementMethod {
    Correlation,
    TopN(usize),
}

impl AgreementMethod {
    /// `corr` or `top:<N>`.
    pub fn parse(s: &str) -> Option<Self> {
        if s == "corr" || s == "correlation" {
            return Some(AgreementMethod::Correlation);
        }
        let n: usize = s.strip_prefix("top:")?.parse().ok()?;
        (n > 0).then_some(AgreementMethod::TopN(n))
    }

    pub fn between(self, s1: &SimilarityMatrix, s2: &SimilarityMatrix) -> Result<f64> {
        match self {
            AgreementMethod::Correlation => agreement_correlation(s1, s2),
            AgreementMethod::TopN(n) => agreement_topn(s1, s2, n).map(|a| a.value),
        }
    }
}

impl fmt::Display for AgreementMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgreementMethod::Correlation => f.write_str("corr"),
            AgreementMethod::TopN(n) => write!(f, "top:{n}"),
        }
    }
}

/// Pairwise agreement between named similarity measures.
#[derive(Clone, Debug, PartialEq)]
pub struct AgreementMatrix {
    pub measure_names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub method: AgreementMethod,
}

impl AgreementMatrix {
    pub fn len(&self) -> usize {
        self.measure_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure_names.is_empty()
    }

    pub fn to_csv(&self) -> String {
        write_square_csv("measure", &self.measure_names, |i, j| Some(self.values[i][j]))
    }

    fn upper_triangle(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.values[i][j])
            .collect()
    }
}

pub fn agreement_matrix(measures: &[SimilarityMatrix], method: AgreementMethod) -> Result<AgreementMatrix> {
    if measures.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "agreement needs at least 2 measures, got {}",
            measures.len()
        )));
    }
    let first = &measures[0];
    let aligned_measures = measures
        .iter()
        .map(|m| aligned(first, m))
        .collect::<Result<Vec<_>>>()?;
    let k = measures.len();
    let mut values = vec![vec![1.0; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            let v = method.between(&aligned_measures[a], &aligned_measures[b])?;
            values[a][b] = v;
            values[b][a] = v;
        }
    }
    Ok(AgreementMatrix {
        measure_names: measures.iter().map(|m| m.measure_name().to_string()).collect(),
        values,
        method,
    })
}

/// Pearson correlation between the off-diagonal entries of two agreement
/// matrices over the same measures.
pub fn meta_agreement(a1: &AgreementMatrix, a2: &AgreementMatrix) -> Result<f64> {
    if a1.measure_names != a2.measure_names {
        return Err(Error::ShapeMismatch("agreement matrices cover different measures".into()));
    }
    let (x, y) = (a1.upper_triangle(), a2.upper_triangle());
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "meta-agreement needs at least 2 off-diagonal entries, got {}",
            x.len()
        )));
    }
    stats::pearson(&x, &y)
        .ok_or_else(|| Error::InsufficientData("agreement values have zero variance".into()))
}

/// Agreement between the performance similarity computed on two random
/// halves of the learners.
pub fn split_half_stability(
    records: &[PerformanceRecord],
    measure: PerformanceMeasure,
    min_overlap: usize,
    seed: u64,
) -> Result<f64> {
    let mut learners: Vec<&str> = records
        .iter()
        .map(|r| r.learner_id.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if learners.len() < 2 {
        return Err(Error::InsufficientData("split-half stability needs at least 2 learners".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    learners.shuffle(&mut rng);
    let first: BTreeSet<&str> = learners[..learners.len().div_ceil(2)].iter().copied().collect();
    let (a, b): (Vec<PerformanceRecord>, Vec<PerformanceRecord>) = records
        .iter()
        .cloned()
        .partition(|r| first.contains(r.learner_id.as_str()));
    let sa = performance_similarity(&a, measure, min_overlap, "half_a");
    let sb = performance_similarity(&b, measure, min_overlap, "half_b");
    let common: Vec<ItemId> = sa
        .item_ids()
        .iter()
        .filter(|id| sb.item_ids().contains(id))
        .cloned()
        .collect();
    agreement_correlation(&sa.select(&common)?, &sb.select(&common)?)
}
