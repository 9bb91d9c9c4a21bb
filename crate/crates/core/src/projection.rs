//! Low-dimensional embeddings: PCA of feature matrices and classical MDS of
//! similarity matrices. Both are closed-form and deterministic.
//!
//! Eigen- and singular vectors are only defined up to sign; every direction
//! is flipped so that its largest-magnitude component is positive.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::corpus::ItemId;
use crate::error::{Error, Result};
use crate::features::{Feature, FeatureGroup, FeatureMatrix};
use crate::similarity::SimilarityMatrix;
use crate::table::format_value;

#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub item_ids: Vec<ItemId>,
    /// items × dims.
    pub coordinates: DMatrix<f64>,
    /// Variance along each dimension (PCA only), non-increasing.
    pub explained_variance: Option<Vec<f64>>,
    /// Share of total variance per dimension (PCA only).
    pub explained_variance_ratio: Option<Vec<f64>>,
    /// Negative eigenvalues clamped to zero (MDS only).
    pub clamped_eigenvalues: Vec<f64>,
}

impl Embedding {
    pub fn dims(&self) -> usize {
        self.coordinates.ncols()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (self.coordinates.row(i) - self.coordinates.row(j)).norm()
    }

    /// CSV `item_id,x1,...,xd`, preceded by `# explained_variance,...` when
    /// available.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(ev) = &self.explained_variance {
            out.push_str("# explained_variance");
            for v in ev {
                out.push(',');
                out.push_str(&format_value(*v));
            }
            out.push('\n');
        }
        out.push_str("item_id");
        for d in 1..=self.dims() {
            out.push_str(&format!(",x{d}"));
        }
        out.push('\n');
        for (i, id) in self.item_ids.iter().enumerate() {
            out.push_str(id.as_str());
            for d in 0..self.dims() {
                out.push(',');
                out.push_str(&format_value(self.coordinates[(i, d)]));
            }
            out.push('\n');
        }
        out
    }
}

/// Flip `v` so its largest-magnitude entry (first on near ties) is positive.
fn orient(v: &mut DVector<f64>) {
    let top = v.amax();
    if let Some(k) = v.iter().position(|x| x.abs() >= top - 1e-12 * top.max(1.0)) {
        if v[k] < 0.0 {
            v.neg_mut();
        }
    }
}

fn centered(m: &FeatureMatrix) -> DMatrix<f64> {
    let mut x = m.values().clone();
    for mut col in x.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    x
}

struct Pca {
    /// Principal directions as columns, strongest first.
    directions: Vec<DVector<f64>>,
    singular_values: Vec<f64>,
    centered: DMatrix<f64>,
}

fn pca(m: &FeatureMatrix) -> Result<Pca> {
    if m.n_items() < 2 {
        return Err(Error::InsufficientData(format!(
            "PCA needs at least 2 items, got {}",
            m.n_items()
        )));
    }
    let x = centered(m);
    if m.n_features() == 0 {
        return Ok(Pca {
            directions: Vec::new(),
            singular_values: Vec::new(),
            centered: x,
        });
    }
    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let directions = order
        .iter()
        .map(|&k| {
            let mut v = v_t.row(k).transpose();
            orient(&mut v);
            v
        })
        .collect();
    Ok(Pca {
        directions,
        singular_values: order.iter().map(|&k| svd.singular_values[k]).collect(),
        centered: x,
    })
}

impl Pca {
    fn scores(&self, dims: usize) -> DMatrix<f64> {
        let n = self.centered.nrows();
        let mut out = DMatrix::zeros(n, dims);
        for (d, v) in self.directions.iter().take(dims).enumerate() {
            out.set_column(d, &(&self.centered * v));
        }
        out
    }

    /// Number of singular values above the numerical rank threshold.
    fn rank(&self) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        let (n, p) = self.centered.shape();
        let tol = n.max(p) as f64 * f64::EPSILON * top;
        self.singular_values.iter().filter(|s| **s > tol).count()
    }
}

/// Projection onto the top `dims` principal directions of the centered
/// feature matrix.
pub fn pca_project(m: &FeatureMatrix, dims: usize) -> Result<Embedding> {
    let limit = m.n_items().min(m.n_features());
    if dims == 0 || dims > limit {
        return Err(Error::InvalidInput(format!(
            "PCA dims must be in 1..={limit} for {} items × {} features",
            m.n_items(),
            m.n_features()
        )));
    }
    let p = pca(m)?;
    let n = m.n_items() as f64;
    let variance: Vec<f64> = p.singular_values.iter().map(|s| s * s / (n - 1.0)).collect();
    let total: f64 = variance.iter().sum();
    let ratio = variance
        .iter()
        .take(dims)
        .map(|v| if total > 0.0 { v / total } else { 0.0 })
        .collect();
    Ok(Embedding {
        item_ids: m.item_ids().to_vec(),
        coordinates: p.scores(dims),
        explained_variance: Some(variance[..dims].to_vec()),
        explained_variance_ratio: Some(ratio),
        clamped_eigenvalues: Vec::new(),
    })
}

/// Principal-component scores of every numerically non-zero component, as
/// features `pc1..pck`.
pub fn pca_decorrelate(m: &FeatureMatrix) -> Result<FeatureMatrix> {
    let p = pca(m)?;
    let k = p.rank();
    let features = (1..=k)
        .map(|i| Feature::new(FeatureGroup::Structural, format!("pc{i}")))
        .collect();
    FeatureMatrix::new(m.item_ids().to_vec(), features, p.scores(k))
}

/// Classical (Torgerson) MDS on the dissimilarity `max(S) - S`.
pub fn mds_project(s: &SimilarityMatrix, dims: usize) -> Result<Embedding> {
    let rows = s.dense_rows()?;
    let n = rows.len();
    if dims == 0 || dims + 1 > n {
        return Err(Error::InvalidInput(format!(
            "MDS dims must be in 1..={} for {n} items",
            n.saturating_sub(1)
        )));
    }
    let top = rows.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let d2 = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { (top - rows[i][j]).powi(2) });
    // B = -1/2 J D² J with J = I - 11ᵀ/n.
    let row_means: Vec<f64> = (0..n).map(|i| d2.row(i).mean()).collect();
    let grand = d2.mean();
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (d2[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&c)));

    let scale = eig.eigenvalues.amax().max(1.0);
    let clamped: Vec<f64> = order
        .iter()
        .map(|&k| eig.eigenvalues[k])
        .filter(|l| *l < -1e-9 * scale)
        .collect();
    if !clamped.is_empty() {
        log::warn!("MDS clamped {} negative eigenvalue(s) to zero", clamped.len());
    }
    let mut coordinates = DMatrix::zeros(n, dims);
    for (d, &k) in order.iter().take(dims).enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        orient(&mut v);
        coordinates.set_column(d, &(v * eig.eigenvalues[k].max(0.0).sqrt()));
    }
    Ok(Embedding {
        item_ids: s.item_ids().to_vec(),
        coordinates,
        explained_variance: None,
        explained_variance_ratio: None,
        clamped_eigenvalues: clamped,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::similarity::{similarity_from_features, test_ids, FeatureMetric};
    use crate::stats;

    fn matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
        let p = rows[0].len();
        let features = (0..p).map(|j| Feature::new(FeatureGroup::World, format!("f{j}"))).collect();
        FeatureMatrix::from_rows(test_ids(rows.len()), features, rows).unwrap()
    }

    fn random_rows(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..p).map(|_| rng.random_range(-5.0..5.0)).collect()).collect()
    }

    #[test]
    fn collinear_points_have_one_component() {
        let m = matrix(&[vec![0.0, 0.0], vec![1.0, 2.0], vec![2.0, 4.0], vec![-3.0, -6.0]]);
        let e = pca_project(&m, 2).unwrap();
        let ratio = e.explained_variance_ratio.unwrap();
        assert!((ratio[0] - 1.0).abs() < 1e-9);
        assert!(ratio[1].abs() < 1e-9);
    }

    #[test]
    fn full_pca_preserves_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows = random_rows(&mut rng, 8, 3);
        let e = pca_project(&matrix(&rows), 3).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let d = stats::euclidean(&rows[i], &rows[j]);
                assert!((e.distance(i, j) - d).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn explained_variance_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = pca_project(&matrix(&random_rows(&mut rng, 20, 5)), 5).unwrap();
        let ev = e.explained_variance.unwrap();
        assert!(ev.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn pca_sign_convention_and_errors() {
        let m = matrix(&[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 0.5], vec![0.0, -0.5]]);
        let e = pca_project(&m, 1).unwrap();
        // First direction is +x, so item 0 projects to +1.
        assert!((e.coordinates[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(pca_project(&m, 3).is_err());
        assert!(pca_project(&m, 0).is_err());
        assert!(pca_project(&matrix(&[vec![1.0, 2.0]]), 1).is_err());
    }

    #[test]
    fn decorrelated_columns_are_uncorrelated() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rows = random_rows(&mut rng, 15, 4);
        for r in &mut rows {
            r.push(r[0] + 2.0 * r[1]);
        }
        let m = matrix(&rows);
        let d = pca_decorrelate(&m).unwrap();
        assert_eq!(d.n_features(), 4);
        assert_eq!(d.features()[0].qualified(), "structural:pc1");
        for a in 0..d.n_features() {
            for b in a + 1..d.n_features() {
                let ca: Vec<f64> = d.values().column(a).iter().copied().collect();
                let cb: Vec<f64> = d.values().column(b).iter().copied().collect();
                assert!(stats::pearson(&ca, &cb).unwrap().abs() < 1e-9);
            }
        }
        let s1 = similarity_from_features(&d, FeatureMetric::Euclidean, "a").unwrap();
        let s2 = similarity_from_features(&m, FeatureMetric::Euclidean, "b").unwrap();
        for i in 0..15 {
            for j in 0..15 {
                assert!((s1.get(i, j).unwrap() - s2.get(i, j).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn two_items_have_rank_one() {
        let d = pca_decorrelate(&matrix(&[vec![1.0, 2.0, 3.0], vec![0.0, 5.0, -1.0]])).unwrap();
        assert!(d.n_features() <= 1);
    }

    fn euclidean_sim(points: &[Vec<f64>]) -> SimilarityMatrix {
        SimilarityMatrix::from_pairs(test_ids(points.len()), "e", |i, j| {
            Some(-stats::euclidean(&points[i], &points[j]))
        })
    }

    #[test]
    fn mds_recovers_planar_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let points = random_rows(&mut rng, 10, 2);
        let e = mds_project(&euclidean_sim(&points), 2).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                assert!((e.distance(i, j) - stats::euclidean(&points[i], &points[j])).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn mds_small_cases() {
        let e = mds_project(&euclidean_sim(&[vec![0.0, 0.0], vec![3.0, 4.0]]), 1).unwrap();
        assert!((e.distance(0, 1) - 5.0).abs() < 1e-9);
        assert!(mds_project(&euclidean_sim(&[vec![0.0], vec![1.0]]), 2).is_err());

        let flat = SimilarityMatrix::from_pairs(test_ids(5), "c", |i, j| Some(if i == j { 1.0 } else { 0.3 }));
        let e = mds_project(&flat, 4).unwrap();
        let d0 = e.distance(0, 1);
        for i in 0..5 {
            for j in i + 1..5 {
                assert!((e.distance(i, j) - d0).abs() < 1e-6);
            }
        }
        let missing = SimilarityMatrix::from_pairs(test_ids(3), "m", |i, j| (i == j).then_some(1.0));
        assert!(matches!(mds_project(&missing, 1), Err(Error::MissingEntries(_))));
    }

    #[test]
    fn embedding_csv() {
        let m = matrix(&[vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let csv = pca_project(&m, 1).unwrap().to_csv();
        assert_eq!(csv, "# explained_variance,2\nitem_id,x1\ni00,1\ni01,-1\n");
    }
}
