//! Seeded synthetic corpora with known level labels, and synthetic learner
//! performance on them.
//!
//! Every level owns `concepts_per_level` control constructs. A solution is
//! a random robot program mixing base commands with constructs, each drawn
//! from the item's own level with probability [`CONCEPT_PURITY`]. Statements
//! are drawn from a shared Zipf-like vocabulary independent of the
//! level.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    parse_robot_program, Corpus, Item, ItemId, PerformanceRecord, Solution, SolutionKind, WorldSpec,
};
use crate::error::{Error, Result};

pub const CONCEPT_PURITY: f64 = 0.8;

const BASE_COMMANDS: [&str; 3] = ["move", "left", "right"];
const CONDITIONS: [&str; 10] = [
    "wall",
    "free",
    "diamond",
    "asteroid",
    "color==red",
    "color==blue",
    "color!=green",
    "position==edge",
    "fuel",
    "meteor",
];
const CONSTRUCT_KINDS: usize = 5;

/// Chance that a top-level statement is a bare base command.
const BASE_STATEMENT_PROB: f64 = 0.2;
/// Chance that a block statement is a nested construct.
const NEST_PROB: f64 = 0.2;
const MAX_BODY_LEN: usize = 8;
/// Statement word `r` (1-based rank) has weight `r^-ZIPF_EXPONENT`.
const ZIPF_EXPONENT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub n_items: usize,
    pub n_levels: usize,
    pub concepts_per_level: usize,
    pub statement_vocab: usize,
    pub statement_len: usize,
    pub noise_tokens: usize,
    pub seed: u64,
    /// Attach a small random grid world to every item.
    #[serde(default = "yes")]
    pub worlds: bool,
}

fn yes() -> bool {
    true
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_items: 45,
            n_levels: 9,
            concepts_per_level: 3,
            statement_vocab: 100,
            statement_len: 20,
            noise_tokens: 5,
            seed: 0,
            worlds: true,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_items", self.n_items),
            ("n_levels", self.n_levels),
            ("concepts_per_level", self.concepts_per_level),
            ("statement_vocab", self.statement_vocab),
            ("statement_len", self.statement_len),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.n_levels > self.n_items {
            return Err(Error::Config(format!(
                "n_levels ({}) exceeds n_items ({})",
                self.n_levels, self.n_items
            )));
        }
        Ok(())
    }

    /// Level of the `i`-th item: items are split evenly in id order.
    pub fn level_of(&self, i: usize) -> usize {
        i * self.n_levels / self.n_items
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerfSpec {
    pub n_learners: usize,
    pub solve_prob: f64,
    pub skill_sd: f64,
    pub difficulty_sd: f64,
    pub noise_sd: f64,
    /// Spread of a per-learner, per-level skill offset added to the general
    /// skill. Zero gives a single-factor model.
    #[serde(default)]
    pub level_skill_sd: f64,
    pub seed: u64,
}

impl Default for PerfSpec {
    fn default() -> Self {
        PerfSpec {
            n_learners: 500,
            solve_prob: 1.0,
            skill_sd: 1.0,
            difficulty_sd: 0.5,
            noise_sd: 0.5,
            level_skill_sd: 1.0,
            seed: 0,
        }
    }
}

impl PerfSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_learners == 0 {
            return Err(Error::Config("n_learners must be positive".into()));
        }
        if !(self.solve_prob > 0.0 && self.solve_prob <= 1.0) {
            return Err(Error::Config(format!("solve_prob {} is not in (0, 1]", self.solve_prob)));
        }
        for (name, v) in [
            ("skill_sd", self.skill_sd),
            ("difficulty_sd", self.difficulty_sd),
            ("noise_sd", self.noise_sd),
            ("level_skill_sd", self.level_skill_sd),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

/// Log-time of the easiest level before skill and noise.
const BASE_LOG_TIME: f64 = 3.5;
/// Log-time added per level.
const LEVEL_STEP: f64 = 0.5;

fn condition(k: usize) -> String {
    CONDITIONS
        .get(k)
        .map_or_else(|| format!("sensor{}", k - CONDITIONS.len()), |c| c.to_string())
}

struct Generator<'a> {
    rng: &'a mut ChaCha8Rng,
    own: Vec<usize>,
    others: Vec<usize>,
    defs: Vec<String>,
}

impl Generator<'_> {
    fn base(&mut self) -> &'static str {
        BASE_COMMANDS[self.rng.random_range(0..BASE_COMMANDS.len())]
    }

    fn concept(&mut self) -> usize {
        if self.others.is_empty() || self.rng.random_bool(CONCEPT_PURITY) {
            self.own[self.rng.random_range(0..self.own.len())]
        } else {
            self.others[self.rng.random_range(0..self.others.len())]
        }
    }

    fn body(&mut self, depth: usize) -> String {
        let len = self.rng.random_range(1..=MAX_BODY_LEN);
        let mut parts: Vec<String> = Vec::with_capacity(len);
        for _ in 0..len {
            if depth < 2 && self.rng.random_bool(NEST_PROB) {
                let c = self.concept();
                parts.push(self.construct(c, depth + 1));
            } else {
                parts.push(self.base().to_string());
            }
        }
        format!("{{ {} }}", parts.join(" "))
    }

    fn construct(&mut self, c: usize, depth: usize) -> String {
        let param = c / CONSTRUCT_KINDS;
        match c % CONSTRUCT_KINDS {
            0 => format!("repeat {} {}", param + 2, self.body(depth)),
            1 => format!("while {} {}", condition(param), self.body(depth)),
            2 => format!("if {} {}", condition(param + 5), self.body(depth)),
            3 => {
                let (t, e) = (self.body(depth), self.body(depth));
                format!("if {} {t} else {e}", condition(param + 10))
            }
            _ => {
                let name = format!("f{param}");
                if !self.defs.contains(&name) {
                    let body = self.body(depth);
                    self.defs.push(format!("def {name} {body}"));
                }
                format!("call {name}")
            }
        }
    }

    fn program(&mut self) -> String {
        let len = self.rng.random_range(4..=8);
        let mut stmts = Vec::with_capacity(len);
        for _ in 0..len {
            if self.rng.random_bool(BASE_STATEMENT_PROB) {
                stmts.push(self.base().to_string());
            } else {
                let c = self.concept();
                stmts.push(self.construct(c, 0));
            }
        }
        let mut all = std::mem::take(&mut self.defs);
        all.extend(stmts);
        all.join("\n")
    }
}

fn statement(rng: &mut ChaCha8Rng, spec: &CorpusSpec, zipf: &WeightedIndex<f64>) -> String {
    let mut words: Vec<String> = (0..spec.statement_len)
        .map(|_| format!("w{}", zipf.sample(rng)))
        .collect();
    words.extend((0..spec.noise_tokens).map(|_| format!("w{}", rng.random_range(0..spec.statement_vocab))));
    words.join(" ")
}

fn world(rng: &mut ChaCha8Rng) -> WorldSpec {
    let legend = [('A', "asteroid"), ('D', "diamond"), ('W', "wormhole")];
    let cols = rng.random_range(3..=6);
    let grid = (0..3)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if rng.random_bool(0.7) {
                        '.'
                    } else {
                        legend[rng.random_range(0..legend.len())].0
                    }
                })
                .collect()
        })
        .collect();
    WorldSpec {
        grid,
        legend: legend.iter().map(|(c, n)| (*c, n.to_string())).collect(),
    }
}

/// Random corpus with `level` labels `0..n_levels`; identical for equal specs.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let zipf = WeightedIndex::new((1..=spec.statement_vocab).map(|r| (r as f64).powf(-ZIPF_EXPONENT)))
        .expect("positive vocabulary weights");
    let width = spec.n_items.to_string().len().max(2);
    let n_concepts = spec.n_levels * spec.concepts_per_level;

    let mut items = Vec::with_capacity(spec.n_items);
    for i in 0..spec.n_items {
        let level = spec.level_of(i);
        let own: Vec<usize> = (level * spec.concepts_per_level..(level + 1) * spec.concepts_per_level).collect();
        let others = (0..n_concepts).filter(|c| !own.contains(c)).collect();
        let source = Generator {
            rng: &mut rng,
            own,
            others,
            defs: Vec::new(),
        }
        .program();
        let ast = parse_robot_program(&source)?;
        let mut item = Item::new(ItemId::new(format!("item{i:0width$}"))?);
        item.statement_text = Some(statement(&mut rng, spec, &zipf));
        if spec.worlds {
            item.world = Some(world(&mut rng));
        }
        item.level = Some(level as u32);
        item.solutions.push(Solution {
            file: "sample.robot".into(),
            ast,
            weight: 1.0,
            kind: SolutionKind::Sample,
        });
        items.push(item);
    }
    Corpus::new(items)
}

/// Learner records on `corpus`. Log-time is item difficulty minus learner
/// skill plus noise; difficulty rises with the item's level.
pub fn generate_performance(corpus: &Corpus, spec: &PerfSpec) -> Result<Vec<PerformanceRecord>> {
    spec.validate()?;
    let levels = corpus
        .levels()
        .ok_or_else(|| Error::Corpus("every item needs a level to generate performance".into()))?;
    let n_levels = levels.iter().max().map_or(0, |m| *m as usize + 1);
    let normal = |sd: f64| Normal::new(0.0, sd).expect("validated standard deviation");
    let (skill, level_skill, difficulty, noise) = (
        normal(spec.skill_sd),
        normal(spec.level_skill_sd),
        normal(spec.difficulty_sd),
        normal(spec.noise_sd),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let difficulties: Vec<f64> = levels
        .iter()
        .map(|&l| BASE_LOG_TIME + LEVEL_STEP * f64::from(l) + difficulty.sample(&mut rng))
        .collect();
    let width = spec.n_learners.to_string().len().max(3);
    let mut records = Vec::with_capacity(spec.n_learners * corpus.len());
    for learner in 0..spec.n_learners {
        let general = skill.sample(&mut rng);
        let per_level: Vec<f64> = (0..n_levels).map(|_| level_skill.sample(&mut rng)).collect();
        for (item, (&level, &d)) in corpus.items.iter().zip(levels.iter().zip(&difficulties)) {
            let solved = spec.solve_prob >= 1.0 || rng.random_bool(spec.solve_prob);
            let eps = noise.sample(&mut rng);
            if !solved {
                continue;
            }
            let log_time = d - (general + per_level[level as usize]) + eps;
            records.push(PerformanceRecord {
                learner_id: format!("learner{learner:0width$}"),
                item_id: item.id.clone(),
                time_seconds: log_time.exp(),
                success: true,
            });
        }
    }
    Ok(records)
}
