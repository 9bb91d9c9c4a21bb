use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cli::measure::{is_stage_name, MeasureName};
use crate::corpus::ActionCaps;
use crate::error::{Error, Result};
use crate::features::CombineMethod;
use crate::similarity::{EditAggregation, NwScoring, PerformanceMeasure, DEFAULT_MIN_OVERLAP};
use crate::synth::{CorpusSpec, PerfSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Elementwise combination of other measures under a new name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub inputs: Vec<String>,
    #[serde(default)]
    pub method: CombineMethod,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    Pca,
    #[default]
    Mds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub top_n: usize,
    /// Defaults to the number of distinct levels.
    pub k: Option<usize>,
    pub runs: usize,
    pub restarts: usize,
    pub min_overlap: usize,
    pub caps: ActionCaps,
    /// File with one stopword per line.
    pub stopwords: Option<PathBuf>,
    pub aggregation: EditAggregation,
    pub nw: NwScoring,
    pub dims: usize,
    pub projection: ProjectionKind,
    pub performance_measure: PerformanceMeasure,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            top_n: 5,
            k: None,
            runs: 10,
            restarts: 1,
            min_overlap: DEFAULT_MIN_OVERLAP,
            caps: ActionCaps::default(),
            stopwords: None,
            aggregation: EditAggregation::default(),
            nw: NwScoring::default(),
            dims: 2,
            projection: ProjectionKind::default(),
            performance_measure: PerformanceMeasure::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub corpus: CorpusSpec,
    #[serde(default)]
    pub performance: Option<PerfSpec>,
}

/// One serialized run of the pipeline. Relative paths resolve against the
/// config file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema: u32,
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    /// Defaults to `performance.csv` inside the corpus directory.
    #[serde(default)]
    pub performance: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub measure: Option<String>,
    #[serde(default)]
    pub measures: Vec<String>,
    #[serde(default)]
    pub stages: BTreeMap<String, StageConfig>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub synth: Option<SynthConfig>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        PipelineConfig::from_json(&text, base).map_err(|e| e.in_file(path))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    /// Checks the schema version, every measure name, stage references, and
    /// that stages form no cycle.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        for (name, stage) in &self.stages {
            if !is_stage_name(name) {
                return Err(Error::Config(format!("invalid stage name {name:?}")));
            }
            if stage.inputs.is_empty() {
                return Err(Error::Config(format!("stage {name:?} has no inputs")));
            }
            if let Some(w) = &stage.weights {
                if w.len() != stage.inputs.len() {
                    return Err(Error::Config(format!(
                        "stage {name:?} has {} weights for {} inputs",
                        w.len(),
                        stage.inputs.len()
                    )));
                }
            }
        }
        let names = self.measure.iter().chain(&self.measures);
        for m in names.chain(self.stages.values().flat_map(|s| &s.inputs)) {
            self.check_reference(m)?;
        }
        self.check_acyclic()?;
        if self.params.dims == 0 {
            return Err(Error::Config("params.dims must be positive".into()));
        }
        if self.params.runs == 0 || self.params.restarts == 0 || self.params.top_n == 0 {
            return Err(Error::Config("params.runs, restarts and top_n must be positive".into()));
        }
        Ok(())
    }

    fn check_reference(&self, name: &str) -> Result<MeasureName> {
        let m: MeasureName = name.parse()?;
        if let MeasureName::Stage(s) = &m {
            if !self.stages.contains_key(s) {
                return Err(Error::Config(format!("measure {s:?} refers to no declared stage")));
            }
        }
        Ok(m)
    }

    fn check_acyclic(&self) -> Result<()> {
        fn visit<'a>(
            cfg: &'a PipelineConfig,
            name: &'a str,
            done: &mut HashSet<&'a str>,
            path: &mut Vec<&'a str>,
        ) -> Result<()> {
            if done.contains(name) {
                return Ok(());
            }
            if path.contains(&name) {
                path.push(name);
                return Err(Error::Config(format!("stage cycle: {}", path.join(" -> "))));
            }
            path.push(name);
            for input in &cfg.stages[name].inputs {
                if let Ok(MeasureName::Stage(s)) = input.parse::<MeasureName>() {
                    let s = cfg.stages.get_key_value(&s).expect("checked reference").0;
                    visit(cfg, s, done, path)?;
                }
            }
            path.pop();
            done.insert(name);
            Ok(())
        }
        let mut done = HashSet::new();
        for name in self.stages.keys() {
            visit(self, name, &mut done, &mut Vec::new())?;
        }
        Ok(())
    }
}
