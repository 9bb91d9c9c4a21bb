//! Feature matrices (items × named features) and their construction.

mod extract;
mod transform;

use std::collections::HashSet;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use extract::{
    performance_features, solution_keyword_features, statement_bow, structural_features, tokenize,
    world_features, Extracted,
};
pub(crate) use transform::combine_weights;
pub use transform::{apply_transform, combine_features, combine_matrices, combine_values, CombineMethod, TransformSpec};

use crate::corpus::ItemId;
use crate::error::{Error, Result};
use crate::table::format_value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Statement,
    Solution,
    Structural,
    World,
    Performance,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::Statement,
        FeatureGroup::Solution,
        FeatureGroup::Structural,
        FeatureGroup::World,
        FeatureGroup::Performance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::Statement => "statement",
            FeatureGroup::Solution => "solution",
            FeatureGroup::Structural => "structural",
            FeatureGroup::World => "world",
            FeatureGroup::Performance => "performance",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.as_str() == s)
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Feature {
    pub group: FeatureGroup,
    pub name: String,
}

impl Feature {
    pub fn new(group: FeatureGroup, name: impl Into<String>) -> Self {
        Feature {
            group,
            name: name.into(),
        }
    }

    /// `group:name`, unique within a matrix.
    pub fn qualified(&self) -> String {
        format!("{}:{}", self.group, self.name)
    }
}

/// Dense items × features matrix; rows follow corpus item order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    item_ids: Vec<ItemId>,
    features: Vec<Feature>,
    values: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn new(item_ids: Vec<ItemId>, features: Vec<Feature>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != item_ids.len() || values.ncols() != features.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} items × {} features but values are {}×{}",
                item_ids.len(),
                features.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        let mut seen = HashSet::new();
        for f in &features {
            if f.name.is_empty() {
                return Err(Error::InvalidInput("empty feature name".into()));
            }
            if !seen.insert((f.group, f.name.as_str())) {
                return Err(Error::InvalidInput(format!("duplicate feature {}", f.qualified())));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("feature values must be finite".into()));
        }
        Ok(FeatureMatrix {
            item_ids,
            features,
            values,
        })
    }

    pub fn from_rows(item_ids: Vec<ItemId>, features: Vec<Feature>, rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = features.len();
        if let Some(r) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::ShapeMismatch(format!(
                "row of length {} for {ncols} features",
                r.len()
            )));
        }
        let values = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
        Self::new(item_ids, features, values)
    }

    pub fn item_ids(&self) -> &[ItemId] {
        &self.item_ids
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    pub fn column_index(&self, group: FeatureGroup, name: &str) -> Option<usize> {
        self.features
            .iter()
            .position(|f| f.group == group && f.name == name)
    }

    pub(crate) fn with_values(&self, values: DMatrix<f64>) -> FeatureMatrix {
        debug_assert_eq!(values.shape(), self.values.shape());
        FeatureMatrix {
            item_ids: self.item_ids.clone(),
            features: self.features.clone(),
            values,
        }
    }

    /// Keep only the listed items, in the given order.
    pub fn select_items(&self, ids: &[ItemId]) -> Result<FeatureMatrix> {
        let idx = ids
            .iter()
            .map(|id| {
                self.item_ids
                    .iter()
                    .position(|x| x == id)
                    .ok_or_else(|| Error::UnknownItem(id.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let values = DMatrix::from_fn(idx.len(), self.n_features(), |i, j| self.values[(idx[i], j)]);
        Ok(FeatureMatrix {
            item_ids: ids.to_vec(),
            features: self.features.clone(),
            values,
        })
    }

    /// CSV with header `item_id,<group:name>,...` and `%.9g` values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("item_id");
        for f in &self.features {
            out.push(',');
            out.push_str(&f.qualified());
        }
        out.push('\n');
        for (i, id) in self.item_ids.iter().enumerate() {
            out.push_str(id.as_str());
            for j in 0..self.n_features() {
                out.push(',');
                out.push_str(&format_value(self.values[(i, j)]));
            }
            out.push('\n');
        }
        out
    }
}

/// Horizontal concatenation of matrices over the same items.
pub fn concat_features(ms: &[FeatureMatrix]) -> Result<FeatureMatrix> {
    let first = ms
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to concatenate".into()))?;
    if let Some(m) = ms.iter().find(|m| m.item_ids != first.item_ids) {
        return Err(Error::ShapeMismatch(format!(
            "item sets differ ({} vs {} items)",
            first.n_items(),
            m.n_items()
        )));
    }
    let features: Vec<Feature> = ms.iter().flat_map(|m| m.features.iter().cloned()).collect();
    let ncols = features.len();
    let mut values = DMatrix::zeros(first.n_items(), ncols);
    let mut offset = 0;
    for m in ms {
        values
            .view_mut((0, offset), (m.n_items(), m.n_features()))
            .copy_from(&m.values);
        offset += m.n_features();
    }
    FeatureMatrix::new(first.item_ids.clone(), features, values)
}

#[cfg(test)]
pub(crate) fn ids(names: &[&str]) -> Vec<ItemId> {
    names.iter().map(|n| ItemId::new(*n).unwrap()).collect()
}
