//! Property suites for the library invariants. Each entry runs a seeded
//! proptest runner; both the `invariants` and `acceptance` targets use them.

use std::collections::HashSet;

use itemsim::analysis::{agreement_correlation, agreement_topn, kmeans, rand_index, split_half_stability, Partition};
use itemsim::cli::MeasureName;
use itemsim::corpus::{
    action_sequence, canonize, load_corpus, parse_robot_program, pretty_print, write_corpus, ActionCaps, AstNode,
    ItemId, PerformanceRecord, SolutionSelector,
};
use itemsim::features::{
    apply_transform, combine_matrices, solution_keyword_features, CombineMethod, Feature, FeatureGroup,
    FeatureMatrix, TransformSpec,
};
use itemsim::projection::{mds_project, pca_project};
use itemsim::similarity::{
    levenshtein, needleman_wunsch, performance_similarity, similarity_from_features, tree_edit_distance,
    FeatureMetric, NwScoring, PerformanceMeasure, SimilarityMatrix,
};
use itemsim::stats;
use itemsim::synth::{generate_corpus, CorpusSpec};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 128;

pub struct Property {
    pub name: &'static str,
    pub run: fn() -> Result<(), String>,
}

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config.clone(), TestRng::deterministic_rng(config.rng_algorithm));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

// ---------- generators ----------

const KEYWORDS: [&str; 10] = ["repeat", "while", "if", "else", "def", "call", "move", "left", "right", "shoot"];

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,4}".prop_filter("keyword", |s| !KEYWORDS.contains(&s.as_str()))
}

fn cond() -> impl Strategy<Value = String> {
    prop_oneof![
        ident(),
        (ident(), prop_oneof![Just("=="), Just("!=")], ident()).prop_map(|(a, op, b)| format!("{a} {op} {b}")),
    ]
}

/// Random source text in the robot language.
pub fn robot_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        4 => prop_oneof![Just("move"), Just("left"), Just("right"), Just("shoot")].prop_map(str::to_string),
        1 => ident().prop_map(|f| format!("call {f}")),
    ];
    let stmt = leaf.prop_recursive(4, 32, 4, |inner| {
        let block = prop::collection::vec(inner, 0..4).prop_map(|v| format!("{{ {} }}", v.join(" ")));
        prop_oneof![
            (1u32..30, block.clone()).prop_map(|(n, b)| format!("repeat {n} {b}")),
            (cond(), block.clone()).prop_map(|(c, b)| format!("while {c} {b}")),
            (cond(), block.clone(), prop::option::of(block.clone())).prop_map(|(c, t, e)| match e {
                Some(e) => format!("if {c} {t} else {e}"),
                None => format!("if {c} {t}"),
            }),
            (ident(), block).prop_map(|(f, b)| format!("def {f} {b}")),
        ]
    });
    prop::collection::vec(stmt, 0..6).prop_map(|v| v.join("\n"))
}

pub fn robot_ast() -> impl Strategy<Value = AstNode> {
    robot_source().prop_map(|s| parse_robot_program(&s).expect("generated source parses"))
}

/// Ordered labelled trees with at most `max_nodes` nodes.
pub fn tree(labels: &'static [&'static str], max_nodes: usize) -> impl Strategy<Value = AstNode> {
    let label = prop::sample::select(labels);
    label
        .clone()
        .prop_map(AstNode::leaf)
        .prop_recursive(4, max_nodes as u32, 3, move |inner| {
            (prop::sample::select(labels), prop::collection::vec(inner, 1..4))
                .prop_map(|(l, c)| AstNode::new(l, c))
        })
        .prop_filter("size", move |t| t.node_count() <= max_nodes)
}

fn ids(n: usize) -> Vec<ItemId> {
    (0..n).map(|i| ItemId::new(format!("i{i:02}")).unwrap()).collect()
}

fn feature_matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
    let p = rows[0].len();
    let features = (0..p).map(|j| Feature::new(FeatureGroup::Solution, format!("f{j}"))).collect();
    FeatureMatrix::from_rows(ids(rows.len()), features, rows).unwrap()
}

/// Non-negative count-like matrices.
fn counts(max_n: usize, max_p: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_n, 2..=max_p).prop_flat_map(|(n, p)| {
        prop::collection::vec(prop::collection::vec((0u32..6).prop_map(f64::from), p), n)
    })
}

fn reals(n: std::ops::RangeInclusive<usize>, p: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (n, p).prop_flat_map(|(n, p)| prop::collection::vec(prop::collection::vec(-5.0f64..5.0, p), n))
}

/// Random symmetric similarity matrix with unit diagonal.
fn sim_matrix(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = SimilarityMatrix> {
    n.prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, n * n)).prop_map(|v| {
        let n = (v.len() as f64).sqrt().round() as usize;
        SimilarityMatrix::from_pairs(ids(n), "s", |i, j| Some(if i == j { 1.0 } else { v[i * n + j] }))
    })
}

fn records() -> impl Strategy<Value = Vec<PerformanceRecord>> {
    (3usize..20, 2usize..6).prop_flat_map(|(learners, items)| {
        prop::collection::vec((0.5f64..500.0, any::<bool>(), 0.0f64..1.0), learners * items).prop_map(move |v| {
            v.into_iter()
                .enumerate()
                .filter(|(_, (_, _, keep))| *keep < 0.85)
                .map(|(k, (t, success, _))| PerformanceRecord {
                    learner_id: format!("l{}", k / items),
                    item_id: ItemId::new(format!("i{}", k % items)).unwrap(),
                    time_seconds: t,
                    success,
                })
                .collect()
        })
    })
}

fn exactly_symmetric(s: &SimilarityMatrix) -> bool {
    let n = s.len();
    (0..n).all(|i| (0..n).all(|j| s.get(i, j).map(f64::to_bits) == s.get(j, i).map(f64::to_bits)))
}

// ---------- corpus ----------

fn dsl_round_trip() -> Result<(), String> {
    check(CASES, robot_ast(), |ast| {
        let text = pretty_print(&ast).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let back = parse_robot_program(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(back, ast);
        Ok(())
    })
}

fn canonize_injective() -> Result<(), String> {
    const AB: &[&str] = &["a", "b"];
    check(CASES * 4, (tree(AB, 20), tree(AB, 20)), |(t1, t2)| {
        prop_assert_eq!(t1 == t2, canonize(&t1) == canonize(&t2));
        Ok(())
    })?;
    // Small trees collide often enough to exercise the equal case.
    check(CASES * 4, (tree(AB, 4), tree(AB, 4)), |(t1, t2)| {
        prop_assert_eq!(t1 == t2, canonize(&t1) == canonize(&t2));
        Ok(())
    })
}

fn action_length_capped() -> Result<(), String> {
    check(CASES, (robot_ast(), 1usize..40, 1usize..60), |(ast, unroll_cap, total_cap)| {
        let seq = action_sequence(&ast, ActionCaps { unroll_cap, total_cap });
        prop_assert!(seq.len() <= total_cap);
        Ok(())
    })
}

fn load_is_deterministic() -> Result<(), String> {
    check(CASES, (1usize..6, 1usize..3, any::<u64>()), |(n, levels, seed)| {
        let spec = CorpusSpec {
            n_items: n.max(levels),
            n_levels: levels,
            statement_len: 5,
            seed,
            ..CorpusSpec::default()
        };
        let dir = tempfile::tempdir().unwrap();
        write_corpus(&generate_corpus(&spec).unwrap(), dir.path()).unwrap();
        let a = serde_json::to_string(&load_corpus(dir.path()).unwrap()).unwrap();
        let b = serde_json::to_string(&load_corpus(dir.path()).unwrap()).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

// ---------- features ----------

fn binarize_idempotent() -> Result<(), String> {
    check(CASES, counts(8, 6), |rows| {
        let once = apply_transform(&feature_matrix(&rows), TransformSpec::Binarize).unwrap();
        let twice = apply_transform(&once, TransformSpec::Binarize).unwrap();
        prop_assert_eq!(once, twice);
        Ok(())
    })
}

fn max_normalize_range() -> Result<(), String> {
    check(CASES, counts(8, 6), |rows| {
        let m = apply_transform(&feature_matrix(&rows), TransformSpec::MaxNormalize).unwrap();
        let v = m.values();
        prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
        for col in v.column_iter() {
            if col.iter().any(|x| *x > 0.0) {
                prop_assert_eq!(col.max(), 1.0);
            }
        }
        Ok(())
    })
}

fn log_monotone() -> Result<(), String> {
    check(CASES, prop::collection::vec(0.0f64..1e6, 2..20), |vals| {
        let rows: Vec<Vec<f64>> = vals.iter().map(|v| vec![*v]).collect();
        let m = apply_transform(&feature_matrix(&rows), TransformSpec::Log).unwrap();
        for i in 0..vals.len() {
            for j in 0..vals.len() {
                if vals[i] < vals[j] {
                    prop_assert!(m.values()[(i, 0)] < m.values()[(j, 0)]);
                }
            }
        }
        Ok(())
    })
}

fn binarize_after_idf() -> Result<(), String> {
    let strategy = counts(8, 6).prop_filter("idf zeroes a column", |rows| {
        (0..rows[0].len()).all(|j| rows.iter().any(|r| r[j] == 0.0))
    });
    check(CASES, strategy, |rows| {
        let m = feature_matrix(&rows);
        let a = apply_transform(&apply_transform(&m, TransformSpec::Idf).unwrap(), TransformSpec::Binarize).unwrap();
        let b = apply_transform(&m, TransformSpec::Binarize).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

fn average_permutation_invariant() -> Result<(), String> {
    let strategy = (2usize..5, 1usize..4, 1usize..4).prop_flat_map(|(k, n, p)| {
        (
            prop::collection::vec(prop::collection::vec(-100.0f64..100.0, n * p), k),
            Just(n),
            Just(p),
            Just((0..k).collect::<Vec<usize>>()).prop_shuffle(),
        )
    });
    check(CASES, strategy, |(data, n, p, perm)| {
        let ms: Vec<DMatrix<f64>> = data.iter().map(|d| DMatrix::from_vec(n, p, d.clone())).collect();
        let shuffled: Vec<DMatrix<f64>> = perm.iter().map(|&i| ms[i].clone()).collect();
        let a = combine_matrices(&ms, CombineMethod::Average, None).unwrap();
        let b = combine_matrices(&shuffled, CombineMethod::Average, None).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

fn transforms_deterministic() -> Result<(), String> {
    let all = [
        TransformSpec::Binarize,
        TransformSpec::Log,
        TransformSpec::MaxNormalize,
        TransformSpec::Idf,
        TransformSpec::Scale {
            group: FeatureGroup::Solution,
            factor: 5.0,
        },
    ];
    check(CASES, counts(8, 6), |rows| {
        let m = feature_matrix(&rows);
        for t in all {
            let a = apply_transform(&m, t).unwrap();
            let b = apply_transform(&m, t).unwrap();
            prop_assert!(a.values().iter().zip(b.values().iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        Ok(())
    })
}

// ---------- similarity ----------

fn similarity_exactly_symmetric() -> Result<(), String> {
    check(CASES, (reals(2..=10, 2..=6), records()), |(rows, recs)| {
        let m = feature_matrix(&rows);
        for metric in [FeatureMetric::Pearson, FeatureMetric::Cosine, FeatureMetric::Euclidean] {
            prop_assert!(exactly_symmetric(&similarity_from_features(&m, metric, "s").unwrap()));
        }
        prop_assert!(exactly_symmetric(&performance_similarity(&recs, PerformanceMeasure::LogTime, 2, "p")));
        Ok(())
    })
}

fn pearson_is_centered_cosine() -> Result<(), String> {
    check(CASES, reals(2..=12, 2..=8), |rows| {
        let centered: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let mu = stats::mean(r);
                r.iter().map(|v| v - mu).collect()
            })
            .collect();
        let p = similarity_from_features(&feature_matrix(&rows), FeatureMetric::Pearson, "p").unwrap();
        let c = similarity_from_features(&feature_matrix(&centered), FeatureMetric::Cosine, "c").unwrap();
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                match (p.get(i, j), c.get(i, j)) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
                    (a, b) => prop_assert_eq!(a, b),
                }
            }
        }
        Ok(())
    })
}

fn sequence(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..3, 0..=max)
}

fn edit_triangle_inequality() -> Result<(), String> {
    const ABC: &[&str] = &["a", "b", "c"];
    check(CASES, (sequence(8), sequence(8), sequence(8)), |(a, b, c)| {
        prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        Ok(())
    })?;
    check(CASES, (tree(ABC, 8), tree(ABC, 8), tree(ABC, 8)), |(a, b, c)| {
        prop_assert!(tree_edit_distance(&a, &c) <= tree_edit_distance(&a, &b) + tree_edit_distance(&b, &c));
        Ok(())
    })
}

fn ted_bounds() -> Result<(), String> {
    const ABC: &[&str] = &["a", "b", "c"];
    check(CASES, (tree(ABC, 12), tree(ABC, 12)), |(a, b)| {
        let d = tree_edit_distance(&a, &b);
        let (n1, n2) = (a.node_count(), b.node_count());
        prop_assert!(n1.abs_diff(n2) <= d && d <= n1 + n2);
        Ok(())
    })
}

fn nw_self_alignment() -> Result<(), String> {
    check(CASES, sequence(16), |a| {
        prop_assert_eq!(needleman_wunsch(&a, &a, NwScoring::default()), a.len() as f64);
        Ok(())
    })
}

fn performance_in_range() -> Result<(), String> {
    check(CASES, records(), |recs| {
        for measure in [PerformanceMeasure::LogTime, PerformanceMeasure::Success] {
            let s = performance_similarity(&recs, measure, 2, "p");
            for i in 0..s.len() {
                for j in 0..s.len() {
                    if let Some(v) = s.get(i, j) {
                        prop_assert!((-1.0..=1.0).contains(&v));
                    }
                }
            }
        }
        Ok(())
    })
}

// ---------- analysis ----------

fn agreement_affine_invariant() -> Result<(), String> {
    check(CASES, (sim_matrix(3..=10), 0.01f64..100.0, -50.0f64..50.0), |(s, a, b)| {
        let t = s.map(|v| a * v + b);
        prop_assert!((agreement_correlation(&s, &t).unwrap() - 1.0).abs() <= 1e-12);
        Ok(())
    })
}

fn top_sets(s: &SimilarityMatrix, i: usize, n: usize) -> HashSet<usize> {
    let mut others: Vec<usize> = (0..s.len()).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| s.get(i, b).unwrap().total_cmp(&s.get(i, a).unwrap()).then(a.cmp(&b)));
    others.into_iter().take(n).collect()
}

fn topn_bounded_and_exact() -> Result<(), String> {
    check(CASES, (sim_matrix(3..=9), sim_matrix(3..=9), 1usize..4), |(s1, s2, n)| {
        let k = s1.len().min(s2.len());
        let keep: Vec<ItemId> = s1.item_ids()[..k].to_vec();
        let (s1, s2) = (s1.select(&keep).unwrap(), s2.select(&keep).unwrap());
        let n = n.min(k - 1);
        let a = agreement_topn(&s1, &s2, n).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&a));
        let coincide = (0..k).all(|i| top_sets(&s1, i, n) == top_sets(&s2, i, n));
        prop_assert_eq!(a == 1.0, coincide);
        prop_assert_eq!(agreement_topn(&s1, &s1, n).unwrap().value, 1.0);
        Ok(())
    })
}

fn topn_monotone_invariant() -> Result<(), String> {
    check(CASES, (sim_matrix(6..=12), 0usize..3), |(s, f)| {
        let t = match f {
            0 => s.map(f64::exp),
            1 => s.map(|v| v * v * v + v),
            _ => s.map(|v| 3.0 * v - 7.0),
        };
        for n in [1, 3, 5] {
            prop_assert_eq!(agreement_topn(&s, &t, n).unwrap().value, 1.0);
        }
        Ok(())
    })
}

fn rand_index_label_invariant() -> Result<(), String> {
    let strategy = (2usize..15).prop_flat_map(|n| {
        (
            prop::collection::vec(0usize..4, n),
            prop::collection::vec(0usize..4, n),
            Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
        )
    });
    check(CASES, strategy, |(a, b, perm)| {
        let n = a.len();
        let pa = Partition::new(ids(n), a.clone()).unwrap();
        let pb = Partition::new(ids(n), b.clone()).unwrap();
        let relabelled = Partition::new(ids(n), a.iter().map(|l| perm[*l]).collect()).unwrap();
        let r = rand_index(&pa, &pb).unwrap();
        prop_assert_eq!(r, rand_index(&relabelled, &pb).unwrap());
        prop_assert_eq!(r, rand_index(&pb, &relabelled).unwrap());
        Ok(())
    })
}

fn kmeans_wcss_non_increasing() -> Result<(), String> {
    check(CASES, (reals(2..=15, 1..=4), any::<u64>(), 1usize..4), |(rows, seed, restarts)| {
        let s = similarity_from_features(&feature_matrix(&rows), FeatureMetric::Euclidean, "e").unwrap();
        let k = 1 + (seed as usize) % rows.len();
        let km = kmeans(&s, k, seed, restarts).unwrap();
        for w in km.wcss_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0), "{:?}", km.wcss_history);
        }
        prop_assert_eq!(km.partition.n_clusters(), k);
        Ok(())
    })
}

fn stability_reproducible() -> Result<(), String> {
    check(CASES, (records(), any::<u64>()), |(recs, seed)| {
        let a = split_half_stability(&recs, PerformanceMeasure::LogTime, 2, seed);
        let b = split_half_stability(&recs, PerformanceMeasure::LogTime, 2, seed);
        match (a, b) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
            (Err(x), Err(y)) => prop_assert_eq!(x.to_string(), y.to_string()),
            _ => prop_assert!(false, "outcomes differ"),
        }
        Ok(())
    })
}

// ---------- projection ----------

fn pca_translation_invariant() -> Result<(), String> {
    let strategy = reals(3..=10, 2..=5).prop_flat_map(|rows| {
        let p = rows[0].len();
        (Just(rows), prop::collection::vec(-10.0f64..10.0, p))
    });
    check(CASES, strategy, |(rows, shift)| {
        let dims = rows.len().min(rows[0].len());
        let shifted: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&shift).map(|(v, s)| v + s).collect()).collect();
        let a = pca_project(&feature_matrix(&rows), dims).unwrap();
        let ev = a.explained_variance.clone().unwrap();
        // Directions are only defined up to rotation within repeated eigenvalues.
        prop_assume!(ev.windows(2).all(|w| w[0] - w[1] > 1e-6 * ev[0].max(1.0)));
        prop_assume!(ev.last().is_some_and(|v| *v > 1e-6));
        let b = pca_project(&feature_matrix(&shifted), dims).unwrap();
        prop_assert!((a.coordinates - b.coordinates).amax() < 1e-9);
        Ok(())
    })
}

fn mds_reconstructs_euclidean() -> Result<(), String> {
    check(CASES, reals(3..=10, 1..=3), |points| {
        let n = points.len();
        let s = SimilarityMatrix::from_pairs(ids(n), "e", |i, j| Some(-stats::euclidean(&points[i], &points[j])));
        let dims = points[0].len().min(n - 1);
        let e = mds_project(&s, dims).unwrap();
        for i in 0..n {
            for j in 0..n {
                let d = stats::euclidean(&points[i], &points[j]);
                prop_assert!((e.distance(i, j) - d).abs() < 1e-6);
            }
        }
        Ok(())
    })
}

fn projections_deterministic() -> Result<(), String> {
    check(CASES, reals(3..=10, 2..=5), |rows| {
        let m = feature_matrix(&rows);
        let dims = 2.min(rows.len() - 1);
        prop_assert_eq!(pca_project(&m, dims).unwrap(), pca_project(&m, dims).unwrap());
        let s = similarity_from_features(&m, FeatureMetric::Euclidean, "e").unwrap();
        prop_assert_eq!(mds_project(&s, dims).unwrap(), mds_project(&s, dims).unwrap());
        Ok(())
    })
}

// ---------- synth ----------

fn synth_levels_separate() -> Result<(), String> {
    check(CASES, (2usize..=9, any::<u64>()), |(levels, seed)| {
        let c = generate_corpus(&CorpusSpec {
            n_items: 5 * levels,
            n_levels: levels,
            seed,
            ..CorpusSpec::default()
        })
        .unwrap();
        let lv = c.levels().unwrap();
        let m = solution_keyword_features(&c, SolutionSelector::Sample).unwrap().matrix;
        let (mut within, mut across) = (Vec::new(), Vec::new());
        for i in 0..m.n_items() {
            for j in i + 1..m.n_items() {
                let v = stats::cosine(&m.row(i), &m.row(j)).unwrap();
                if lv[i] == lv[j] {
                    within.push(v);
                } else {
                    across.push(v);
                }
            }
        }
        prop_assert!(stats::mean(&within) > stats::mean(&across));
        Ok(())
    })
}

fn synth_round_trip() -> Result<(), String> {
    check(CASES, (1usize..4, any::<u64>()), |(levels, seed)| {
        let c = generate_corpus(&CorpusSpec {
            n_items: 3 * levels,
            n_levels: levels,
            seed,
            ..CorpusSpec::default()
        })
        .unwrap();
        for item in &c.items {
            let ast = &item.solutions[0].ast;
            prop_assert_eq!(&parse_robot_program(&pretty_print(ast).unwrap()).unwrap(), ast);
        }
        Ok(())
    })
}

// ---------- cli ----------

fn measure_name_text() -> impl Strategy<Value = String> {
    let source = prop::sample::select(vec!["statement", "solution", "structural", "world", "performance"]);
    let sources = prop_oneof![
        Just("bag".to_string()),
        prop::sample::subsequence(vec!["statement", "solution", "structural", "world", "performance"], 1..=5)
            .prop_shuffle()
            .prop_map(|v| v.join("+")),
    ];
    let step = prop_oneof![
        prop::sample::select(vec!["bin", "log", "max", "idf", "weights", "pca"]).prop_map(str::to_string),
        (source, 1e-3f64..1e3).prop_map(|(g, f)| format!("scale:{g}:{f}")),
    ];
    let transforms = prop::collection::vec(step, 0..5)
        .prop_map(|v| if v.is_empty() { "none".to_string() } else { v.join("+") });
    let metric = prop::sample::select(vec!["correlation", "cosine", "euclidean"]);
    let selector = prop::sample::select(vec!["", "@sample", "@top_learner", "@all"]);
    prop_oneof![
        (sources, transforms, metric, selector.clone()).prop_map(|(s, t, m, sel)| format!("{s}/{t}/{m}{sel}")),
        (prop::sample::select(vec!["ted", "levenshtein", "nw"]), selector).prop_map(|(k, sel)| format!("{k}{sel}")),
        prop::sample::select(vec!["performance", "performance:success"]).prop_map(str::to_string),
        "[a-z][a-z0-9_-]{0,8}".prop_filter("reserved", |s| !["ted", "levenshtein", "nw", "performance"].contains(&s.as_str())),
    ]
}

fn measure_name_round_trip() -> Result<(), String> {
    check(CASES * 2, measure_name_text(), |text| {
        let m: MeasureName = text.parse().map_err(|e: itemsim::Error| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&m.to_string(), &text);
        prop_assert_eq!(m.to_string().parse::<MeasureName>().unwrap(), m);
        Ok(())
    })
}

pub const ALL: &[Property] = &[
    Property { name: "corpus: DSL print/parse round trip", run: dsl_round_trip },
    Property { name: "corpus: canonize is injective", run: canonize_injective },
    Property { name: "corpus: action sequence respects total cap", run: action_length_capped },
    Property { name: "corpus: loading is deterministic", run: load_is_deterministic },
    Property { name: "features: binarize is idempotent", run: binarize_idempotent },
    Property { name: "features: max-normalize range and column max", run: max_normalize_range },
    Property { name: "features: log is monotone", run: log_monotone },
    Property { name: "features: binarize after idf equals binarize", run: binarize_after_idf },
    Property { name: "features: average combination is order-free", run: average_permutation_invariant },
    Property { name: "features: transforms are bit-deterministic", run: transforms_deterministic },
    Property { name: "similarity: matrices are exactly symmetric", run: similarity_exactly_symmetric },
    Property { name: "similarity: pearson equals centered cosine", run: pearson_is_centered_cosine },
    Property { name: "similarity: edit distances obey the triangle inequality", run: edit_triangle_inequality },
    Property { name: "similarity: tree edit distance bounds", run: ted_bounds },
    Property { name: "similarity: self alignment scores the length", run: nw_self_alignment },
    Property { name: "similarity: performance similarity in [-1, 1]", run: performance_in_range },
    Property { name: "analysis: correlation agreement is affine invariant", run: agreement_affine_invariant },
    Property { name: "analysis: top-n agreement bounds and equality", run: topn_bounded_and_exact },
    Property { name: "analysis: top-n agreement is monotone invariant", run: topn_monotone_invariant },
    Property { name: "analysis: Rand index ignores label names", run: rand_index_label_invariant },
    Property { name: "analysis: k-means WCSS never increases", run: kmeans_wcss_non_increasing },
    Property { name: "analysis: split-half stability is reproducible", run: stability_reproducible },
    Property { name: "projection: PCA is translation invariant", run: pca_translation_invariant },
    Property { name: "projection: MDS reconstructs Euclidean distances", run: mds_reconstructs_euclidean },
    Property { name: "projection: projections are deterministic", run: projections_deterministic },
    Property { name: "synth: same-level items are more similar", run: synth_levels_separate },
    Property { name: "synth: generated programs round trip", run: synth_round_trip },
    Property { name: "cli: measure names round trip", run: measure_name_round_trip },
];
