//! Item similarity matrices from features, solution edit distances, and
//! learner performance.

mod edit;
mod performance;

use serde::{Deserialize, Serialize};

pub use edit::{
    edit_similarity, levenshtein, needleman_wunsch, tree_edit_distance, EditAggregation, EditKind,
    EditOptions, NwScoring,
};
pub use performance::{performance_similarity, PerformanceMeasure, DEFAULT_MIN_OVERLAP};

use crate::corpus::ItemId;
use crate::error::{Error, Result};
use crate::features::{combine_values, combine_weights, CombineMethod, FeatureMatrix};
use crate::stats;
use crate::table::write_square_csv;

/// Square symmetric item × item matrix; `None` marks a missing entry.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    item_ids: Vec<ItemId>,
    values: Vec<Option<f64>>,
    measure_name: String,
}

impl SimilarityMatrix {
    /// Build from a function evaluated once per unordered pair `i <= j`,
    /// mirrored so the result is exactly symmetric.
    pub fn from_pairs(
        item_ids: Vec<ItemId>,
        measure_name: impl Into<String>,
        mut f: impl FnMut(usize, usize) -> Option<f64>,
    ) -> Self {
        let n = item_ids.len();
        let mut values = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        SimilarityMatrix {
            item_ids,
            values,
            measure_name: measure_name.into(),
        }
    }

    /// Build from a full row-major grid; fails if it is not symmetric.
    pub fn from_rows(
        item_ids: Vec<ItemId>,
        measure_name: impl Into<String>,
        rows: &[Vec<Option<f64>>],
    ) -> Result<Self> {
        let n = item_ids.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(format!("similarity matrix over {n} items must be {n}×{n}")));
        }
        for i in 0..n {
            for j in 0..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({}, {})",
                        item_ids[i], item_ids[j]
                    )));
                }
                if rows[i][j].is_some_and(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput("similarity values must be finite".into()));
                }
            }
        }
        Ok(SimilarityMatrix {
            item_ids,
            values: rows.iter().flatten().copied().collect(),
            measure_name: measure_name.into(),
        })
    }

    pub fn item_ids(&self) -> &[ItemId] {
        &self.item_ids
    }

    pub fn measure_name(&self) -> &str {
        &self.measure_name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.measure_name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.item_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.item_ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.len() + j]
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(Option::is_none)
    }

    /// Dense rows; fails on missing entries.
    pub fn dense_rows(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        self.get(i, j).ok_or_else(|| {
                            Error::MissingEntries(format!(
                                "{} has no value for ({}, {})",
                                self.measure_name, self.item_ids[i], self.item_ids[j]
                            ))
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Apply `f` to every defined entry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SimilarityMatrix {
        SimilarityMatrix {
            item_ids: self.item_ids.clone(),
            values: self.values.iter().map(|v| v.map(&f)).collect(),
            measure_name: self.measure_name.clone(),
        }
    }

    /// Reorder (or restrict) to the given items.
    pub fn select(&self, ids: &[ItemId]) -> Result<SimilarityMatrix> {
        let idx = ids
            .iter()
            .map(|id| {
                self.item_ids
                    .iter()
                    .position(|x| x == id)
                    .ok_or_else(|| Error::UnknownItem(id.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SimilarityMatrix::from_pairs(ids.to_vec(), self.measure_name.clone(), |i, j| {
            self.get(idx[i], idx[j])
        }))
    }

    /// CSV with header `item_id,<id>,...`; missing entries are empty fields.
    pub fn to_csv(&self) -> String {
        let labels: Vec<String> = self.item_ids.iter().map(ToString::to_string).collect();
        write_square_csv("item_id", &labels, |i, j| self.get(i, j))
    }

    pub fn from_csv(text: &str, measure_name: impl Into<String>) -> Result<SimilarityMatrix> {
        let m = crate::table::parse_square_csv(text)?;
        let ids = m
            .labels
            .iter()
            .map(|l| ItemId::new(l.as_str()))
            .collect::<Result<Vec<_>>>()?;
        SimilarityMatrix::from_rows(ids, measure_name, &m.values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMetric {
    /// Pearson correlation of item rows.
    #[serde(alias = "correlation")]
    Pearson,
    Cosine,
    /// Negated Euclidean distance.
    Euclidean,
}

/// Similarity of item rows of a feature matrix.
///
/// Pearson needs at least two features; rows with zero variance (Pearson) or
/// zero norm (cosine) get missing entries against every other item. The
/// diagonal is 1 for Pearson and cosine and 0 for Euclidean.
pub fn similarity_from_features(
    m: &FeatureMatrix,
    metric: FeatureMetric,
    measure_name: impl Into<String>,
) -> Result<SimilarityMatrix> {
    if m.n_items() == 0 || m.n_features() == 0 {
        return Err(Error::InvalidInput("empty feature matrix".into()));
    }
    if metric == FeatureMetric::Pearson && m.n_features() < 2 {
        return Err(Error::InvalidInput("Pearson similarity needs at least two features".into()));
    }
    let rows: Vec<Vec<f64>> = (0..m.n_items()).map(|i| m.row(i)).collect();
    Ok(SimilarityMatrix::from_pairs(m.item_ids().to_vec(), measure_name, |i, j| {
        match metric {
            FeatureMetric::Pearson if i == j => Some(1.0),
            FeatureMetric::Cosine if i == j => Some(1.0),
            FeatureMetric::Pearson => stats::pearson(&rows[i], &rows[j]),
            FeatureMetric::Cosine => stats::cosine(&rows[i], &rows[j]),
            FeatureMetric::Euclidean if i == j => Some(0.0),
            FeatureMetric::Euclidean => Some(-stats::euclidean(&rows[i], &rows[j])),
        }
    }))
}

/// Elementwise combination of similarity matrices over the same items;
/// entries missing in any input stay missing.
pub fn combine_similarities(
    ms: &[SimilarityMatrix],
    method: CombineMethod,
    weights: Option<&[f64]>,
    measure_name: impl Into<String>,
) -> Result<SimilarityMatrix> {
    let first = ms
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to combine".into()))?;
    if ms.iter().any(|m| m.item_ids != first.item_ids) {
        return Err(Error::ShapeMismatch("similarity matrices cover different items".into()));
    }
    let w = combine_weights(ms.len(), method, weights)?;
    let mut buf = vec![None; ms.len()];
    Ok(SimilarityMatrix::from_pairs(first.item_ids.clone(), measure_name, |i, j| {
        for (slot, m) in buf.iter_mut().zip(ms) {
            *slot = m.get(i, j);
        }
        combine_values(&buf, method, &w)
    }))
}

#[cfg(test)]
pub(crate) fn test_ids(n: usize) -> Vec<ItemId> {
    (0..n).map(|i| ItemId::new(format!("i{i:02}")).unwrap()).collect()
}
