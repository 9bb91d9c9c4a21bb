use serde::{Deserialize, Serialize};

use crate::corpus::{action_sequence, canonize, ActionCaps, AstNode, Corpus, SolutionSelector};
use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

/// Unit-cost edit distance (insert, delete, substitute) between sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Postorder view of a tree: labels and leftmost-leaf descendants, 1-based.
struct Postorder<'a> {
    labels: Vec<&'a str>,
    lld: Vec<usize>,
    keyroots: Vec<usize>,
}

impl<'a> Postorder<'a> {
    fn new(root: &'a AstNode) -> Self {
        fn walk<'a>(node: &'a AstNode, labels: &mut Vec<&'a str>, lld: &mut Vec<usize>) -> usize {
            let mut leftmost = None;
            for child in &node.children {
                let l = walk(child, labels, lld);
                leftmost.get_or_insert(l);
            }
            labels.push(&node.label);
            let me = labels.len() - 1;
            lld.push(leftmost.unwrap_or(me));
            leftmost.unwrap_or(me)
        }
        let mut labels = vec![""];
        let mut lld = vec![0];
        walk(root, &mut labels, &mut lld);
        let n = labels.len() - 1;
        // A keyroot is the highest-numbered node sharing its leftmost leaf.
        let mut seen = vec![false; n + 1];
        let mut keyroots = Vec::new();
        for i in (1..=n).rev() {
            if !seen[lld[i]] {
                seen[lld[i]] = true;
                keyroots.push(i);
            }
        }
        keyroots.reverse();
        Postorder { labels, lld, keyroots }
    }

    fn len(&self) -> usize {
        self.labels.len() - 1
    }
}

/// Ordered-tree edit distance (Zhang–Shasha) with unit insert, delete and
/// relabel costs.
pub fn tree_edit_distance(t1: &AstNode, t2: &AstNode) -> usize {
    let a = Postorder::new(t1);
    let b = Postorder::new(t2);
    let (n, m) = (a.len(), b.len());
    let mut td = vec![vec![0usize; m + 1]; n + 1];
    let mut fd = vec![vec![0usize; m + 1]; n + 1];

    for &i in &a.keyroots {
        for &j in &b.keyroots {
            let (li, lj) = (a.lld[i], b.lld[j]);
            fd[li - 1][lj - 1] = 0;
            for di in li..=i {
                fd[di][lj - 1] = fd[di - 1][lj - 1] + 1;
            }
            for dj in lj..=j {
                fd[li - 1][dj] = fd[li - 1][dj - 1] + 1;
            }
            for di in li..=i {
                for dj in lj..=j {
                    let del = fd[di - 1][dj] + 1;
                    let ins = fd[di][dj - 1] + 1;
                    if a.lld[di] == li && b.lld[dj] == lj {
                        let relabel = fd[di - 1][dj - 1] + usize::from(a.labels[di] != b.labels[dj]);
                        fd[di][dj] = del.min(ins).min(relabel);
                        td[di][dj] = fd[di][dj];
                    } else {
                        let subtree = fd[a.lld[di] - 1][b.lld[dj] - 1] + td[di][dj];
                        fd[di][dj] = del.min(ins).min(subtree);
                    }
                }
            }
        }
    }
    td[n][m]
}

/// Scores for global alignment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NwScoring {
    pub r#match: f64,
    pub mismatch: f64,
    pub gap: f64,
}

impl Default for NwScoring {
    fn default() -> Self {
        NwScoring {
            r#match: 1.0,
            mismatch: -1.0,
            gap: -1.0,
        }
    }
}

/// Optimal global alignment score (Needleman–Wunsch).
pub fn needleman_wunsch<T: PartialEq>(a: &[T], b: &[T], s: NwScoring) -> f64 {
    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64 * s.gap).collect();
    let mut cur = vec![0.0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = (i + 1) as f64 * s.gap;
        for (j, y) in b.iter().enumerate() {
            let diag = prev[j] + if x == y { s.r#match } else { s.mismatch };
            cur[j + 1] = diag.max(prev[j + 1] + s.gap).max(cur[j] + s.gap);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    /// Levenshtein distance over canonized token sequences.
    Levenshtein,
    /// Tree edit distance over ASTs.
    Ted,
    /// Needleman–Wunsch alignment of action sequences.
    Nw,
}

impl EditKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EditKind::Levenshtein => "levenshtein",
            EditKind::Ted => "ted",
            EditKind::Nw => "nw",
        }
    }
}

/// How the cross pairs of two items' solutions are reduced to one value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditAggregation {
    /// Closest pair.
    Min,
    /// Mean over all cross pairs.
    #[default]
    Average,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EditOptions {
    pub selector: SolutionSelector,
    pub aggregation: EditAggregation,
    pub nw_scoring: NwScoring,
    pub caps: ActionCaps,
}

enum Prepared {
    Tokens(Vec<String>),
    Tree(AstNode),
    Actions(Vec<String>),
}

impl Prepared {
    fn new(kind: EditKind, ast: &AstNode, caps: ActionCaps) -> Self {
        match kind {
            EditKind::Levenshtein => Prepared::Tokens(canonize(ast).tokens),
            EditKind::Ted => Prepared::Tree(ast.clone()),
            EditKind::Nw => Prepared::Actions(action_sequence(ast, caps).actions),
        }
    }

    /// Length-normalized similarity of one solution pair: `1 - d/(|a|+|b|)`
    /// for distances, `score / max(|a|, |b|, 1)` for alignments.
    fn similarity(&self, other: &Prepared, scoring: NwScoring) -> f64 {
        match (self, other) {
            (Prepared::Tokens(a), Prepared::Tokens(b)) => {
                let d = levenshtein(a, b) as f64;
                1.0 - d / (a.len() + b.len()).max(1) as f64
            }
            (Prepared::Tree(a), Prepared::Tree(b)) => {
                let d = tree_edit_distance(a, b) as f64;
                1.0 - d / (a.node_count() + b.node_count()) as f64
            }
            (Prepared::Actions(a), Prepared::Actions(b)) => {
                needleman_wunsch(a, b, scoring) / a.len().max(b.len()).max(1) as f64
            }
            _ => unreachable!("solutions prepared with the same kind"),
        }
    }
}

/// Similarity matrix from pairwise edit distances between selected solutions.
///
/// Each cross pair of solutions is converted to a length-normalized
/// similarity, then the pairs are reduced by `aggregation` (`Min` keeps the
/// closest pair). The diagonal is the mean self-similarity of an item's
/// solutions, which is 1 for Levenshtein and TED.
pub fn edit_similarity(
    corpus: &Corpus,
    kind: EditKind,
    options: EditOptions,
    measure_name: impl Into<String>,
) -> Result<SimilarityMatrix> {
    let prepared = corpus
        .items
        .iter()
        .map(|item| {
            let selected = item.select(options.selector);
            if selected.is_empty() {
                return Err(Error::InsufficientData(format!(
                    "item {} has no {} solution",
                    item.id,
                    options.selector.as_str()
                )));
            }
            Ok(selected
                .iter()
                .map(|s| Prepared::new(kind, &s.ast, options.caps))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SimilarityMatrix::from_pairs(corpus.ids(), measure_name, |i, j| {
        let scores: Vec<f64> = if i == j {
            prepared[i].iter().map(|p| p.similarity(p, options.nw_scoring)).collect()
        } else {
            prepared[i]
                .iter()
                .flat_map(|a| prepared[j].iter().map(move |b| (a, b)))
                .map(|(a, b)| a.similarity(b, options.nw_scoring))
                .collect()
        };
        Some(match options.aggregation {
            EditAggregation::Min if i != j => scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            _ => scores.iter().sum::<f64>() / scores.len() as f64,
        })
    }))
}
