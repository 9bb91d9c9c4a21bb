use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, ItemId};
use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;
use crate::stats::squared_distance;

const MAX_ITERATIONS: usize = 300;
const SHIFT_TOLERANCE: f64 = 1e-9;

/// Cluster label per item. Labels are `0..n_clusters`, numbered by first
/// appearance in item order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    item_ids: Vec<ItemId>,
    labels: Vec<usize>,
}

impl Partition {
    pub fn new(item_ids: Vec<ItemId>, labels: Vec<usize>) -> Result<Self> {
        if item_ids.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} items but {} labels",
                item_ids.len(),
                labels.len()
            )));
        }
        Ok(Partition {
            item_ids,
            labels: canonical_labels(&labels),
        })
    }

    /// One cluster per difficulty level; fails if any item lacks a level.
    pub fn from_levels(corpus: &Corpus) -> Result<Self> {
        let levels = corpus
            .levels()
            .ok_or_else(|| Error::Corpus("every item needs a level for a manual partition".into()))?;
        Partition::new(corpus.ids(), levels.into_iter().map(|l| l as usize).collect())
    }

    pub fn item_ids(&self) -> &[ItemId] {
        &self.item_ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Labels in the order of `ids`.
    pub fn select(&self, ids: &[ItemId]) -> Result<Partition> {
        let pos: HashMap<&ItemId, usize> = self.item_ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let labels = ids
            .iter()
            .map(|id| pos.get(id).map(|&i| self.labels[i]).ok_or_else(|| Error::UnknownItem(id.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(ids.to_vec(), labels)
    }

    /// CSV `item_id,label`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("item_id,label\n");
        for (id, l) in self.item_ids.iter().zip(&self.labels) {
            out.push_str(&format!("{id},{l}\n"));
        }
        out
    }
}

fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMeans {
    pub partition: Partition,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
    /// WCSS after each Lloyd iteration of the kept restart; non-increasing.
    pub wcss_history: Vec<f64>,
}

/// k-means over the rows of a similarity matrix, keeping the lowest-WCSS
/// result of `restarts` k-means++ initialisations.
pub fn kmeans(s: &SimilarityMatrix, k: usize, seed: u64, restarts: usize) -> Result<KMeans> {
    let points = s.dense_rows()?;
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} is not in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, Vec<f64>)> = None;
    for _ in 0..restarts.max(1) {
        let (labels, history) = lloyd(&points, k, &mut rng);
        if best.as_ref().is_none_or(|b| history.last() < b.1.last()) {
            best = Some((labels, history));
        }
    }
    let (labels, wcss_history) = best.expect("at least one restart");
    Ok(KMeans {
        partition: Partition::new(s.item_ids().to_vec(), labels)?,
        wcss: *wcss_history.last().expect("at least one iteration"),
        wcss_history,
    })
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.random_range(0..n)];
    while chosen.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| {
                chosen
                    .iter()
                    .map(|&c| squared_distance(p, &points[c]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 && target < *d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            while d2[pick] == 0.0 {
                pick -= 1;
            }
            pick
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
    }
    chosen.into_iter().map(|c| points[c].clone()).collect()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn wcss(points: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| squared_distance(p, &centroids[l]))
        .sum()
}

#[allow(clippy::needless_range_loop)]
fn lloyd(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<f64>) {
    let dim = points[0].len();
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels = vec![0; points.len()];
    let mut history: Vec<f64> = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut dists = vec![0.0; points.len()];
        for (i, p) in points.iter().enumerate() {
            (labels[i], dists[i]) = nearest(p, &centroids);
        }
        // Reseed empty clusters with the point farthest from its centroid.
        for c in 0..k {
            if labels.contains(&c) {
                continue;
            }
            let mut sizes = vec![0usize; k];
            for &l in &labels {
                sizes[l] += 1;
            }
            let far = (0..points.len())
                .filter(|&i| sizes[labels[i]] > 1)
                .fold(None, |acc: Option<usize>, i| match acc {
                    Some(a) if dists[a] >= dists[i] => Some(a),
                    _ => Some(i),
                })
                .expect("k <= n leaves a cluster with two points");
            labels[far] = c;
            dists[far] = 0.0;
            centroids[c] = points[far].clone();
        }
        let mut next = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (acc, v) in next[l].iter_mut().zip(p) {
                *acc += v;
            }
        }
        for (centroid, &count) in next.iter_mut().zip(&counts) {
            for v in centroid.iter_mut() {
                *v /= count as f64;
            }
        }
        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        let current = wcss(points, &labels, &centroids);
        if let Some(&previous) = history.last() {
            debug_assert!(
                current <= previous + 1e-9 * previous.max(1.0),
                "WCSS increased from {previous} to {current}"
            );
        }
        history.push(current);
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }
    (labels, history)
}

/// Fraction of item pairs on which two partitions agree (same cluster in
/// both, or different clusters in both).
pub fn rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    let b = if a.item_ids == b.item_ids { b.clone() } else { b.select(&a.item_ids)? };
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch("partitions cover different items".into()));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InsufficientData("Rand index needs at least 2 items".into()));
    }
    let mut agree = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let same_a = a.labels[i] == a.labels[j];
            let same_b = b.labels[i] == b.labels[j];
            agree += u64::from(same_a == same_b);
        }
    }
    Ok(agree as f64 / (n * (n - 1) / 2) as f64)
}

/// Mean Rand index against `reference` over `runs` single-restart k-means
/// runs seeded `seed`, `seed + 1`, ...
pub fn cluster_eval(s: &SimilarityMatrix, reference: &Partition, k: usize, runs: usize, seed: u64) -> Result<f64> {
    if runs == 0 {
        return Err(Error::InvalidInput("runs must be at least 1".into()));
    }
    let reference = reference.select(s.item_ids())?;
    let mut total = 0.0;
    for r in 0..runs as u64 {
        let km = kmeans(s, k, seed.wrapping_add(r), 1)?;
        total += rand_index(&km.partition, &reference)?;
    }
    Ok(total / runs as f64)
}

/// Leaf order of average-linkage agglomerative clustering on
/// `max(S) - S`. Ties merge the lowest-index pair first.
pub fn hierarchical_order(s: &SimilarityMatrix) -> Result<Vec<usize>> {
    Ok(hierarchical_order_dense(&s.dense_rows()?))
}

/// [`hierarchical_order`] on a dense square matrix of similarities.
pub fn hierarchical_order_dense(rows: &[Vec<f64>]) -> Vec<usize> {
    let n = rows.len();
    if n == 0 {
        return Vec::new();
    }
    let top = rows.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut dist: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| top - v).collect()).collect();
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    for _ in 1..n {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..n {
            if members[a].is_none() {
                continue;
            }
            for b in a + 1..n {
                if members[b].is_none() {
                    continue;
                }
                if best.is_none_or(|(_, _, d)| dist[a][b] < d) {
                    best = Some((a, b, dist[a][b]));
                }
            }
        }
        let (a, b, _) = best.expect("two active clusters");
        let leaves_b = members[b].take().expect("active");
        let (size_a, size_b) = (members[a].as_ref().expect("active").len() as f64, leaves_b.len() as f64);
        for c in 0..n {
            if c != a && members[c].is_some() {
                let d = (size_a * dist[a][c] + size_b * dist[b][c]) / (size_a + size_b);
                dist[a][c] = d;
                dist[c][a] = d;
            }
        }
        members[a].as_mut().expect("active").extend(leaves_b);
    }
    members.into_iter().flatten().next().expect("one cluster remains")
}
