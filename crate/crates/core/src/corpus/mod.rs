//! Items, their solutions and worlds, and the on-disk corpus layout.
//!
//! ```text
//! <dir>/items.json                      [{id, statement_text?, world?, command_limit?, level?}]
//! <dir>/solutions/<item_id>/<name>.robot     robot-language source
//! <dir>/solutions/<item_id>/<name>.ast.json  canonical AST document
//! <dir>/solutions/<item_id>/weights.json     {filename: weight}
//! <dir>/performance.csv
//! ```
//!
//! Solution files whose name starts with `sample` are sample solutions; all
//! others are learner solutions. Weights default to 1.

mod actions;
mod ast;
mod dsl;
mod performance;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use actions::{action_sequence, ActionCaps, ActionSequence, DEFAULT_TOTAL_CAP, DEFAULT_UNROLL_CAP};
pub use ast::{canonize, parse_ast_document, AstNode, ItemId, TokenSequence};
pub use dsl::{parse_robot_program, pretty_print};
pub use performance::{
    load_performance, parse_performance, write_performance, PerformanceLog, PerformanceRecord,
    PERFORMANCE_HEADER,
};

use crate::error::{Error, Result};

pub const ITEMS_FILE: &str = "items.json";
pub const SOLUTIONS_DIR: &str = "solutions";
pub const WEIGHTS_FILE: &str = "weights.json";
pub const PERFORMANCE_FILE: &str = "performance.csv";
const ROBOT_EXT: &str = ".robot";
const AST_EXT: &str = ".ast.json";

/// Grid world shown in a robot item's statement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub grid: Vec<String>,
    #[serde(default)]
    pub legend: BTreeMap<char, String>,
}

impl WorldSpec {
    pub fn is_blank(cell: char) -> bool {
        cell == '.' || cell == ' '
    }

    pub fn rows(&self) -> usize {
        self.grid.len()
    }

    pub fn cols(&self) -> usize {
        self.grid.first().map_or(0, |r| r.chars().count())
    }

    pub fn validate(&self) -> Result<()> {
        let cols = self.cols();
        for (i, row) in self.grid.iter().enumerate() {
            if row.chars().count() != cols {
                return Err(Error::Corpus(format!(
                    "world row {i} has {} cells, expected {cols}",
                    row.chars().count()
                )));
            }
            if let Some(c) = row
                .chars()
                .find(|c| !Self::is_blank(*c) && !self.legend.contains_key(c))
            {
                return Err(Error::Corpus(format!(
                    "world cell code {c:?} is missing from the legend"
                )));
            }
        }
        Ok(())
    }

    /// Number of cells per legend concept, keyed by concept name.
    pub fn concept_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts: BTreeMap<&str, usize> =
            self.legend.values().map(|name| (name.as_str(), 0)).collect();
        for cell in self.grid.iter().flat_map(|r| r.chars()) {
            if let Some(name) = self.legend.get(&cell) {
                *counts.get_mut(name.as_str()).expect("legend concept present") += 1;
            }
        }
        counts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Sample,
    Learner,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    /// File name the solution was loaded from or will be written to.
    pub file: String,
    pub ast: AstNode,
    pub weight: f64,
    pub kind: SolutionKind,
}

/// Which of an item's solutions a measure uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionSelector {
    /// First sample solution by file name.
    #[default]
    Sample,
    /// Learner solution with the largest weight (most common).
    TopLearner,
    /// Every solution, weighted where the measure supports weights.
    #[serde(alias = "all_weighted")]
    All,
}

impl SolutionSelector {
    pub fn as_str(self) -> &'static str {
        match self {
            SolutionSelector::Sample => "sample",
            SolutionSelector::TopLearner => "top_learner",
            SolutionSelector::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sample" => Some(SolutionSelector::Sample),
            "top_learner" => Some(SolutionSelector::TopLearner),
            "all" | "all_weighted" => Some(SolutionSelector::All),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Item {
    pub id: ItemId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statement_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub world: Option<WorldSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command_limit: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub solutions: Vec<Solution>,
}

impl Item {
    pub fn new(id: ItemId) -> Self {
        Item {
            id,
            statement_text: None,
            world: None,
            command_limit: None,
            level: None,
            solutions: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.statement_text.is_none() && self.world.is_none() && self.solutions.is_empty() {
            return Err(Error::Corpus(format!(
                "item {} has no statement, world, or solution",
                self.id
            )));
        }
        if let Some(world) = &self.world {
            world.validate()?;
        }
        if self.command_limit == Some(0) {
            return Err(Error::Corpus(format!("item {}: command_limit must be positive", self.id)));
        }
        if let Some(s) = self.solutions.iter().find(|s| !(s.weight.is_finite() && s.weight > 0.0)) {
            return Err(Error::Corpus(format!(
                "item {}: solution {} has non-positive weight {}",
                self.id, s.file, s.weight
            )));
        }
        Ok(())
    }

    /// Solutions chosen by `selector`, in file-name order.
    pub fn select(&self, selector: SolutionSelector) -> Vec<&Solution> {
        match selector {
            SolutionSelector::Sample => self
                .solutions
                .iter()
                .find(|s| s.kind == SolutionKind::Sample)
                .into_iter()
                .collect(),
            SolutionSelector::TopLearner => {
                let mut best: Option<&Solution> = None;
                for s in self.solutions.iter().filter(|s| s.kind == SolutionKind::Learner) {
                    if best.is_none_or(|b| s.weight > b.weight) {
                        best = Some(s);
                    }
                }
                best.into_iter().collect()
            }
            SolutionSelector::All => self.solutions.iter().collect(),
        }
    }

    /// The sample solution, falling back to the first solution.
    pub fn primary_solution(&self) -> Option<&Solution> {
        self.select(SolutionSelector::Sample)
            .into_iter()
            .next()
            .or_else(|| self.solutions.first())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Corpus {
    /// Sorted by id.
    pub items: Vec<Item>,
}

impl Corpus {
    /// Build a corpus, sorting items by id and validating them.
    pub fn new(mut items: Vec<Item>) -> Result<Self> {
        items.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = items.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateItem(w[0].id.to_string()));
        }
        for item in &mut items {
            item.solutions.sort_by(|a, b| a.file.cmp(&b.file));
            item.validate()?;
        }
        Ok(Corpus { items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> Vec<ItemId> {
        self.items.iter().map(|i| i.id.clone()).collect()
    }

    pub fn get(&self, id: &ItemId) -> Option<&Item> {
        self.items
            .binary_search_by(|i| i.id.cmp(id))
            .ok()
            .map(|idx| &self.items[idx])
    }

    /// Manual level labels, if every item has one.
    pub fn levels(&self) -> Option<Vec<u32>> {
        self.items.iter().map(|i| i.level).collect()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemRecord {
    id: ItemId,
    #[serde(default)]
    statement_text: Option<String>,
    #[serde(default)]
    world: Option<WorldSpec>,
    #[serde(default)]
    command_limit: Option<u32>,
    #[serde(default)]
    level: Option<u32>,
}

#[derive(Serialize)]
struct ItemRecordOut<'a> {
    id: &'a ItemId,
    #[serde(skip_serializing_if = "Option::is_none")]
    statement_text: Option<&'a String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    world: Option<&'a WorldSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    command_limit: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<u32>,
}

fn kind_for(file: &str) -> SolutionKind {
    if file.starts_with("sample") {
        SolutionKind::Sample
    } else {
        SolutionKind::Learner
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<fs::DirEntry>> {
    let mut entries = fs::read_dir(dir)?.collect::<std::io::Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

fn load_solutions(dir: &Path) -> Result<Vec<Solution>> {
    let mut solutions = Vec::new();
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    for entry in sorted_entries(dir)? {
        let path = entry.path();
        let file = entry.file_name().to_string_lossy().into_owned();
        if file == WEIGHTS_FILE {
            let text = fs::read_to_string(&path)?;
            weights = serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(&path))?;
            continue;
        }
        let ast = if file.ends_with(AST_EXT) {
            parse_ast_document(&fs::read_to_string(&path)?).map_err(|e| e.in_file(&path))?
        } else if file.ends_with(ROBOT_EXT) {
            parse_robot_program(&fs::read_to_string(&path)?).map_err(|e| e.in_file(&path))?
        } else {
            log::warn!("ignoring {}", path.display());
            continue;
        };
        solutions.push(Solution {
            kind: kind_for(&file),
            file,
            ast,
            weight: 1.0,
        });
    }
    for (file, weight) in weights {
        let Some(s) = solutions.iter_mut().find(|s| s.file == file) else {
            return Err(Error::Corpus(format!("weights refer to unknown solution file {file:?}"))
                .in_file(dir.join(WEIGHTS_FILE)));
        };
        s.weight = weight;
    }
    Ok(solutions)
}

/// Load a corpus directory. Items come back sorted by id.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Corpus> {
    let dir = dir.as_ref();
    let items_path = dir.join(ITEMS_FILE);
    let text = fs::read_to_string(&items_path).map_err(|e| Error::from(e).in_file(&items_path))?;
    let records: Vec<ItemRecord> =
        serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(&items_path))?;

    let mut items: BTreeMap<ItemId, Item> = BTreeMap::new();
    for r in records {
        if items.contains_key(&r.id) {
            return Err(Error::DuplicateItem(r.id.to_string()).in_file(&items_path));
        }
        let mut item = Item::new(r.id.clone());
        item.statement_text = r.statement_text;
        item.world = r.world;
        item.command_limit = r.command_limit;
        item.level = r.level;
        items.insert(r.id, item);
    }

    let solutions_dir = dir.join(SOLUTIONS_DIR);
    if solutions_dir.is_dir() {
        for entry in sorted_entries(&solutions_dir)? {
            if !entry.file_type()?.is_dir() {
                continue;
            }
            let name = entry.file_name().to_string_lossy().into_owned();
            let id = ItemId::new(name.clone()).map_err(|e| e.in_file(entry.path()))?;
            let Some(item) = items.get_mut(&id) else {
                return Err(Error::UnknownItem(name).in_file(entry.path()));
            };
            item.solutions = load_solutions(&entry.path())?;
        }
    }

    Corpus::new(items.into_values().collect()).map_err(|e| e.in_file(dir))
}

/// Write a corpus in the directory layout read by [`load_corpus`]. Solutions
/// inside the robot language are written as `.robot` source, others as AST
/// documents; the stored file name's extension is adjusted accordingly.
pub fn write_corpus(corpus: &Corpus, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let records: Vec<ItemRecordOut<'_>> = corpus
        .items
        .iter()
        .map(|i| ItemRecordOut {
            id: &i.id,
            statement_text: i.statement_text.as_ref(),
            world: i.world.as_ref(),
            command_limit: i.command_limit,
            level: i.level,
        })
        .collect();
    let mut json = serde_json::to_string_pretty(&records)?;
    json.push('\n');
    fs::write(dir.join(ITEMS_FILE), json)?;

    for item in corpus.items.iter().filter(|i| !i.solutions.is_empty()) {
        let sdir = dir.join(SOLUTIONS_DIR).join(item.id.as_str());
        fs::create_dir_all(&sdir)?;
        let mut weights = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for s in &item.solutions {
            let stem = s
                .file
                .strip_suffix(AST_EXT)
                .or_else(|| s.file.strip_suffix(ROBOT_EXT))
                .unwrap_or(&s.file);
            let (file, text) = match pretty_print(&s.ast) {
                Ok(src) => (format!("{stem}{ROBOT_EXT}"), src),
                Err(_) => (format!("{stem}{AST_EXT}"), s.ast.to_document() + "\n"),
            };
            if !seen.insert(file.clone()) {
                return Err(Error::Corpus(format!("item {}: duplicate solution file {file}", item.id)));
            }
            if s.weight != 1.0 {
                weights.insert(file.clone(), s.weight);
            }
            fs::write(sdir.join(&file), text)?;
        }
        if !weights.is_empty() {
            let mut json = serde_json::to_string_pretty(&weights)?;
            json.push('\n');
            fs::write(sdir.join(WEIGHTS_FILE), json)?;
        }
    }
    Ok(())
}
