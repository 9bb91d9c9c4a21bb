use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformSpec {
    /// `v -> 1` if `v > 0`, else 0.
    Binarize,
    /// `v -> ln(1 + v)`.
    Log,
    /// Divide each feature by its maximum; all-zero features are left alone.
    MaxNormalize,
    /// Multiply each feature by `ln(N / df)`, `df` = items with a positive value.
    Idf,
    /// Multiply every feature of one group by a positive factor.
    Scale { group: FeatureGroup, factor: f64 },
}

impl TransformSpec {
    fn requires_non_negative(self) -> bool {
        matches!(self, TransformSpec::Binarize | TransformSpec::Log | TransformSpec::Idf)
    }
}

pub fn apply_transform(m: &FeatureMatrix, t: TransformSpec) -> Result<FeatureMatrix> {
    let values = m.values();
    if t.requires_non_negative() && values.iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidInput(format!("{t:?} requires non-negative features")));
    }
    let (n, p) = values.shape();
    let out = match t {
        TransformSpec::Binarize => values.map(|v| if v > 0.0 { 1.0 } else { 0.0 }),
        TransformSpec::Log => values.map(f64::ln_1p),
        TransformSpec::MaxNormalize => {
            let mut out = values.clone();
            for mut col in out.column_iter_mut() {
                let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if max > 0.0 {
                    col.apply(|v| *v /= max);
                }
            }
            out
        }
        TransformSpec::Idf => {
            let mut out = values.clone();
            for mut col in out.column_iter_mut() {
                let df = col.iter().filter(|v| **v > 0.0).count();
                if df > 0 {
                    let idf = (n as f64 / df as f64).ln();
                    col.apply(|v| *v *= idf);
                }
            }
            out
        }
        TransformSpec::Scale { group, factor } => {
            if !(factor.is_finite() && factor > 0.0) {
                return Err(Error::InvalidInput(format!("scale factor must be positive, got {factor}")));
            }
            let mut out = values.clone();
            for j in (0..p).filter(|&j| m.features()[j].group == group) {
                out.column_mut(j).apply(|v| *v *= factor);
            }
            out
        }
    };
    Ok(m.with_values(out))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineMethod {
    /// Additive influence of sources.
    #[default]
    Average,
    /// Conjunctive.
    Min,
    /// Disjunctive.
    Max,
}

fn normalized_weights(n: usize, method: CombineMethod, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    match weights {
        None => Ok(vec![1.0 / n as f64; n]),
        Some(_) if method != CombineMethod::Average => Err(Error::InvalidInput(
            "weights are only meaningful with average combination".into(),
        )),
        Some(w) if w.len() != n => Err(Error::ShapeMismatch(format!(
            "{} weights for {n} matrices",
            w.len()
        ))),
        Some(w) if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) => {
            Err(Error::InvalidInput("weights must be positive".into()))
        }
        Some(w) => {
            let total: f64 = w.iter().sum();
            Ok(w.iter().map(|x| x / total).collect())
        }
    }
}

/// Combine one entry across matrices. A missing value in any input makes
/// the result missing.
pub fn combine_values(values: &[Option<f64>], method: CombineMethod, weights: &[f64]) -> Option<f64> {
    let vals: Option<Vec<f64>> = values.iter().copied().collect();
    let vals = vals?;
    Some(match method {
        CombineMethod::Average => {
            // Summed in sorted order so the result does not depend on argument order.
            let mut terms: Vec<f64> = vals.iter().zip(weights).map(|(v, w)| v * w).collect();
            terms.sort_by(f64::total_cmp);
            terms.iter().sum()
        }
        CombineMethod::Min => vals.iter().copied().fold(f64::INFINITY, f64::min),
        CombineMethod::Max => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Elementwise combination of equally shaped matrices.
pub fn combine_matrices(
    ms: &[DMatrix<f64>],
    method: CombineMethod,
    weights: Option<&[f64]>,
) -> Result<DMatrix<f64>> {
    let first = ms
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to combine".into()))?;
    if let Some(m) = ms.iter().find(|m| m.shape() != first.shape()) {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            first.shape(),
            m.shape()
        )));
    }
    let w = normalized_weights(ms.len(), method, weights)?;
    let mut buf = vec![None; ms.len()];
    Ok(DMatrix::from_fn(first.nrows(), first.ncols(), |i, j| {
        for (slot, m) in buf.iter_mut().zip(ms) {
            *slot = Some(m[(i, j)]);
        }
        combine_values(&buf, method, &w).expect("no missing values")
    }))
}

pub(crate) fn combine_weights(n: usize, method: CombineMethod, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    normalized_weights(n, method, weights)
}

/// Elementwise combination of feature matrices with identical items and
/// features.
pub fn combine_features(
    ms: &[FeatureMatrix],
    method: CombineMethod,
    weights: Option<&[f64]>,
) -> Result<FeatureMatrix> {
    let first = ms
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to combine".into()))?;
    if ms
        .iter()
        .any(|m| m.item_ids() != first.item_ids() || m.features() != first.features())
    {
        return Err(Error::ShapeMismatch("feature matrices have different labels".into()));
    }
    let values: Vec<DMatrix<f64>> = ms.iter().map(|m| m.values().clone()).collect();
    Ok(first.with_values(combine_matrices(&values, method, weights)?))
}
