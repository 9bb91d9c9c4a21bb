use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use nalgebra::DMatrix;

use crate::corpus::{Corpus, ItemId, PerformanceRecord, SolutionSelector};
use crate::error::{Error, Result};
use crate::features::{Feature, FeatureGroup, FeatureMatrix};

/// A feature matrix together with the corpus items it had to leave out.
#[derive(Clone, Debug, PartialEq)]
pub struct Extracted {
    pub matrix: FeatureMatrix,
    pub excluded: Vec<ItemId>,
}

/// Lowercase, split on non-alphanumeric runs, drop stopwords and tokens
/// shorter than two characters.
pub fn tokenize<'a>(text: &'a str, stopwords: &'a HashSet<String>) -> impl Iterator<Item = String> + 'a {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(move |t| t.chars().count() >= 2 && !stopwords.contains(t))
}

/// Column order follows first appearance in row order.
struct Vocabulary {
    index: HashMap<String, usize>,
    names: Vec<String>,
}

impl Vocabulary {
    fn new() -> Self {
        Vocabulary {
            index: HashMap::new(),
            names: Vec::new(),
        }
    }

    fn id(&mut self, token: &str) -> usize {
        if let Some(&i) = self.index.get(token) {
            return i;
        }
        let i = self.names.len();
        self.index.insert(token.to_string(), i);
        self.names.push(token.to_string());
        i
    }
}

fn counts_to_matrix(
    ids: Vec<ItemId>,
    group: FeatureGroup,
    vocab: Vocabulary,
    rows: Vec<HashMap<usize, f64>>,
) -> Result<FeatureMatrix> {
    let values = DMatrix::from_fn(rows.len(), vocab.names.len(), |i, j| {
        rows[i].get(&j).copied().unwrap_or(0.0)
    });
    let features = vocab
        .names
        .into_iter()
        .map(|n| Feature::new(group, n))
        .collect();
    FeatureMatrix::new(ids, features, values)
}

/// Bag of words over item statements. Items without a statement get a zero row.
pub fn statement_bow(corpus: &Corpus, stopwords: &HashSet<String>) -> FeatureMatrix {
    let mut vocab = Vocabulary::new();
    let rows = corpus
        .items
        .iter()
        .map(|item| {
            let mut counts = HashMap::new();
            if let Some(text) = &item.statement_text {
                for token in tokenize(text, stopwords) {
                    *counts.entry(vocab.id(&token)).or_insert(0.0) += 1.0;
                }
            }
            counts
        })
        .collect();
    counts_to_matrix(corpus.ids(), FeatureGroup::Statement, vocab, rows)
        .expect("bag-of-words counts are finite")
}

/// Bag of AST labels over the selected solutions. With
/// [`SolutionSelector::All`] each item's row is the weight-normalized average
/// of its per-solution counts. Items without a selected solution are excluded.
pub fn solution_keyword_features(corpus: &Corpus, selector: SolutionSelector) -> Result<Extracted> {
    let mut vocab = Vocabulary::new();
    let mut ids = Vec::new();
    let mut excluded = Vec::new();
    let mut rows = Vec::new();
    for item in &corpus.items {
        let selected = item.select(selector);
        if selected.is_empty() {
            excluded.push(item.id.clone());
            continue;
        }
        let total: f64 = selected.iter().map(|s| s.weight).sum();
        let mut counts = HashMap::new();
        for s in &selected {
            let share = s.weight / total;
            for label in s.ast.preorder() {
                *counts.entry(vocab.id(label)).or_insert(0.0) += share;
            }
        }
        ids.push(item.id.clone());
        rows.push(counts);
    }
    if ids.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no item has a {} solution",
            selector.as_str()
        )));
    }
    if !excluded.is_empty() {
        log::warn!(
            "{} item(s) without a {} solution excluded from solution features",
            excluded.len(),
            selector.as_str()
        );
    }
    Ok(Extracted {
        matrix: counts_to_matrix(ids, FeatureGroup::Solution, vocab, rows)?,
        excluded,
    })
}

pub const NODE_COUNT: &str = "node_count";
pub const MAX_DEPTH: &str = "max_depth";
pub const USES_FUNCTIONS: &str = "uses_functions";

fn is_function_def(label: &str) -> bool {
    label == "def" || label.starts_with("def_")
}

/// Size, nesting depth and function use of each item's primary solution.
pub fn structural_features(corpus: &Corpus) -> Extracted {
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for item in &corpus.items {
        let Some(solution) = item.primary_solution() else {
            excluded.push(item.id.clone());
            continue;
        };
        let ast = &solution.ast;
        let uses_functions = ast.preorder().into_iter().any(is_function_def);
        ids.push(item.id.clone());
        rows.push(vec![
            ast.node_count() as f64,
            ast.max_depth() as f64,
            f64::from(u8::from(uses_functions)),
        ]);
    }
    let features = [NODE_COUNT, MAX_DEPTH, USES_FUNCTIONS]
        .into_iter()
        .map(|n| Feature::new(FeatureGroup::Structural, n))
        .collect();
    Extracted {
        matrix: FeatureMatrix::from_rows(ids, features, &rows).expect("structural features are finite"),
        excluded,
    }
}

pub const GRID_ROWS: &str = "grid_rows";
pub const GRID_COLS: &str = "grid_cols";
pub const COMMAND_LIMIT: &str = "command_limit";

/// Per-concept cell counts, grid size and command limit. Items without a
/// world get a zero row; a missing command limit is 0.
pub fn world_features(corpus: &Corpus) -> FeatureMatrix {
    let concepts: BTreeSet<&str> = corpus
        .items
        .iter()
        .filter_map(|i| i.world.as_ref())
        .flat_map(|w| w.legend.values().map(String::as_str))
        .collect();
    let rows: Vec<Vec<f64>> = corpus
        .items
        .iter()
        .map(|item| {
            let counts = item.world.as_ref().map(|w| w.concept_counts()).unwrap_or_default();
            let mut row: Vec<f64> = concepts
                .iter()
                .map(|c| counts.get(c).copied().unwrap_or(0) as f64)
                .collect();
            let (r, c) = item.world.as_ref().map_or((0, 0), |w| (w.rows(), w.cols()));
            row.push(r as f64);
            row.push(c as f64);
            row.push(f64::from(item.command_limit.unwrap_or(0)));
            row
        })
        .collect();
    let features = concepts
        .iter()
        .copied()
        .chain([GRID_ROWS, GRID_COLS, COMMAND_LIMIT])
        .map(|n| Feature::new(FeatureGroup::World, n))
        .collect();
    FeatureMatrix::from_rows(corpus.ids(), features, &rows).expect("world features are finite")
}

pub const MEAN_LOG_TIME: &str = "mean_log_time";
pub const VAR_LOG_TIME: &str = "var_log_time";
pub const SUCCESS_RATE: &str = "success_rate";

/// Mean and population variance of log solving time, and success rate, for
/// every item with at least one record. Rows are sorted by item id.
pub fn performance_features(records: &[PerformanceRecord]) -> FeatureMatrix {
    let mut by_item: BTreeMap<&ItemId, Vec<&PerformanceRecord>> = BTreeMap::new();
    for r in records {
        by_item.entry(&r.item_id).or_default().push(r);
    }
    let mut ids = Vec::with_capacity(by_item.len());
    let mut rows = Vec::with_capacity(by_item.len());
    for (id, recs) in by_item {
        let n = recs.len() as f64;
        let logs: Vec<f64> = recs.iter().map(|r| r.time_seconds.ln()).collect();
        let mean = logs.iter().sum::<f64>() / n;
        let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
        let success = recs.iter().filter(|r| r.success).count() as f64 / n;
        ids.push(id.clone());
        rows.push(vec![mean, var, success]);
    }
    let features = [MEAN_LOG_TIME, VAR_LOG_TIME, SUCCESS_RATE]
        .into_iter()
        .map(|n| Feature::new(FeatureGroup::Performance, n))
        .collect();
    FeatureMatrix::from_rows(ids, features, &rows).expect("performance features are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_robot_program, AstNode, Item, Solution, SolutionKind, WorldSpec};

    fn item(id: &str) -> Item {
        Item::new(ItemId::new(id).unwrap())
    }

    fn statement_item(id: &str, text: &str) -> Item {
        let mut i = item(id);
        i.statement_text = Some(text.into());
        i
    }

    fn solution(file: &str, ast: AstNode, weight: f64) -> Solution {
        Solution {
            kind: if file.starts_with("sample") { SolutionKind::Sample } else { SolutionKind::Learner },
            file: file.into(),
            ast,
            weight,
        }
    }

    #[test]
    fn bow_counts() {
        let corpus = Corpus::new(vec![
            statement_item("a", "print divisors"),
            statement_item("b", "print chessboard"),
        ])
        .unwrap();
        let m = statement_bow(&corpus, &HashSet::new());
        let names: Vec<_> = m.features().iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["print", "divisors", "chessboard"]);
        assert_eq!(m.row(0), vec![1.0, 1.0, 0.0]);
        assert_eq!(m.row(1), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn bow_lowercases_filters_and_handles_missing() {
        let mut world_only = item("c");
        world_only.world = Some(WorldSpec { grid: vec![".".into()], legend: BTreeMap::new() });
        let corpus = Corpus::new(vec![
            statement_item("a", "Print PRINT print, a x the"),
            statement_item("b", ""),
            world_only,
        ])
        .unwrap();
        let stop: HashSet<String> = ["the".to_string()].into();
        let m = statement_bow(&corpus, &stop);
        assert_eq!(m.n_features(), 1);
        assert_eq!(m.row(0), vec![3.0]);
        assert_eq!(m.row(1), vec![0.0]);
        assert_eq!(m.row(2), vec![0.0]);
    }

    #[test]
    fn keyword_counts_single_solution() {
        let mut a = item("a");
        let ast = AstNode::new("for", vec![AstNode::leaf("range"), AstNode::leaf("print")]);
        a.solutions.push(solution("sample.ast.json", ast, 1.0));
        let corpus = Corpus::new(vec![a]).unwrap();
        let ex = solution_keyword_features(&corpus, SolutionSelector::Sample).unwrap();
        let m = ex.matrix;
        for name in ["for", "range", "print"] {
            assert_eq!(m.values()[(0, m.column_index(FeatureGroup::Solution, name).unwrap())], 1.0);
        }
    }

    #[test]
    fn keyword_weighted_average() {
        let prints = |n: usize| AstNode::new("module", vec![AstNode::leaf("print"); n]);
        let mut a = item("a");
        a.solutions.push(solution("l1.ast.json", prints(2), 1.0));
        a.solutions.push(solution("l2.ast.json", prints(4), 1.0));
        let mut b = item("b");
        b.solutions.push(solution("l1.ast.json", prints(0), 3.0));
        b.solutions.push(solution("l2.ast.json", prints(4), 1.0));
        let corpus = Corpus::new(vec![a, b]).unwrap();
        let m = solution_keyword_features(&corpus, SolutionSelector::All).unwrap().matrix;
        let col = m.column_index(FeatureGroup::Solution, "print").unwrap();
        assert_eq!(m.values()[(0, col)], 3.0);
        assert_eq!(m.values()[(1, col)], 1.0);
    }

    #[test]
    fn sample_selector_excludes_learner_only_items() {
        let mut a = item("a");
        a.solutions.push(solution("l1.robot", AstNode::leaf("move"), 1.0));
        let mut b = item("b");
        b.solutions.push(solution("sample.robot", AstNode::leaf("move"), 1.0));
        let corpus = Corpus::new(vec![a, b]).unwrap();
        let ex = solution_keyword_features(&corpus, SolutionSelector::Sample).unwrap();
        assert_eq!(ex.excluded, vec![ItemId::new("a").unwrap()]);
        assert_eq!(ex.matrix.n_items(), 1);

        let only_learner = Corpus::new(vec![corpus.items[0].clone()]).unwrap();
        assert!(solution_keyword_features(&only_learner, SolutionSelector::Sample).is_err());
    }

    #[test]
    fn structural() {
        let cases = [
            ("move", (1.0, 1.0, 0.0), true),
            ("def F { move } call F", (4.0, 3.0, 1.0), false),
            ("repeat 2 { if wall { shoot } }", (5.0, 5.0, 0.0), false),
        ];
        for (src, (nodes, depth, funcs), leaf_only) in cases {
            let ast = if leaf_only { AstNode::leaf(src) } else { parse_robot_program(src).unwrap() };
            let mut a = item("a");
            a.solutions.push(solution("sample.robot", ast, 1.0));
            let corpus = Corpus::new(vec![a]).unwrap();
            let m = structural_features(&corpus).matrix;
            assert_eq!(m.row(0), vec![nodes, depth, funcs], "{src}");
        }
        // program(repeat_2(if_wall(shoot))) as written, without then-wrapper
        let ast = AstNode::new(
            "program",
            vec![AstNode::new("repeat_2", vec![AstNode::new("if_wall", vec![AstNode::leaf("shoot")])])],
        );
        assert_eq!(ast.max_depth(), 4);
    }

    #[test]
    fn world() {
        let mut a = item("a");
        a.world = Some(WorldSpec {
            grid: vec!["M.M".into(), "...".into(), ".D.".into()],
            legend: [('M', "meteorite".to_string()), ('D', "diamond".to_string())].into(),
        });
        a.command_limit = Some(7);
        let mut b = item("b");
        b.world = Some(WorldSpec { grid: vec!["..".into()], legend: BTreeMap::new() });
        let corpus = Corpus::new(vec![a, b]).unwrap();
        let m = world_features(&corpus);
        let col = |n: &str| m.column_index(FeatureGroup::World, n).unwrap();
        assert_eq!(m.values()[(0, col("meteorite"))], 2.0);
        assert_eq!(m.values()[(0, col("diamond"))], 1.0);
        assert_eq!(m.values()[(0, col(COMMAND_LIMIT))], 7.0);
        assert_eq!(m.values()[(1, col(COMMAND_LIMIT))], 0.0);
        assert_eq!(m.row(1)[2..], [1.0, 2.0, 0.0]);

        let only_b = Corpus::new(vec![corpus.items[1].clone()]).unwrap();
        let names: Vec<_> = world_features(&only_b).features().iter().map(|f| f.name.clone()).collect();
        assert_eq!(names, [GRID_ROWS, GRID_COLS, COMMAND_LIMIT]);
    }

    fn rec(learner: &str, item: &str, t: f64, ok: bool) -> PerformanceRecord {
        PerformanceRecord {
            learner_id: learner.into(),
            item_id: ItemId::new(item).unwrap(),
            time_seconds: t,
            success: ok,
        }
    }

    #[test]
    fn performance() {
        let e = std::f64::consts::E;
        let records = vec![
            rec("1", "b", e, true),
            rec("2", "b", e, false),
            rec("3", "b", e, true),
            rec("4", "b", e, true),
            rec("1", "a", 5.0, true),
        ];
        let m = performance_features(&records);
        assert_eq!(m.item_ids()[0].as_str(), "a");
        assert_eq!(m.row(0), vec![5f64.ln(), 0.0, 1.0]);
        let b = m.row(1);
        assert!((b[0] - 1.0).abs() < 1e-15);
        assert_eq!(b[1], 0.0);
        assert_eq!(b[2], 0.75);
    }
}
