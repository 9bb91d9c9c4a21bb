//! The `itemsim` command line: argument parsing, pipeline evaluation from a
//! [`PipelineConfig`], and artifact writers.
//!
//! Every subcommand writes fixed file names into the output directory, so a
//! rerun with the same inputs overwrites them with identical bytes.

pub mod config;
pub mod heatmap;
pub mod measure;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{Params, PipelineConfig, ProjectionKind, StageConfig, SynthConfig, SCHEMA_VERSION};
pub use heatmap::{emit_heatmap, heatmap_order, Ordering};
pub use measure::{FeaturePipeline, FeatureSource, MeasureName, Sources, Transform};

use crate::analysis::{agreement_matrix, cluster_eval, kmeans, meta_agreement, split_half_stability, AgreementMethod, Partition};
use crate::corpus::{
    load_corpus, load_performance, write_corpus, write_performance, Corpus, ItemId, PerformanceRecord,
    SolutionSelector, PERFORMANCE_FILE,
};
use crate::error::{Error, Result};
use crate::features::{
    apply_transform, concat_features, performance_features, solution_keyword_features, statement_bow,
    structural_features, world_features, FeatureMatrix,
};
use crate::projection::{mds_project, pca_decorrelate, pca_project};
use crate::similarity::{
    combine_similarities, edit_similarity, performance_similarity, similarity_from_features, EditOptions,
    SimilarityMatrix,
};
use crate::synth::{generate_corpus, generate_performance};
use crate::table::parse_square_csv;

#[derive(Debug, Parser)]
#[command(name = "itemsim", version, about = "Item similarity measures and their evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Pipeline config (JSON, "schema": 1).
    #[arg(short = 'c', long = "config")]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(short = 'o', long = "out", default_value = ".")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated measure names; overrides the config.
    #[arg(long)]
    pub measures: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Feature matrix of the configured measure (features.csv).
    Features(Common),
    /// Similarity matrix of the configured measure (sim.csv).
    Sim(Common),
    /// Agreement matrix between measures (agreement.csv).
    Agree {
        #[command(flatten)]
        common: Common,
        /// corr or top:<N>.
        #[arg(long, default_value = "corr")]
        method: String,
    },
    /// Agreement between the correlation and top-N agreement matrices
    /// (meta_agreement.json).
    MetaAgree(Common),
    /// k-means partition and Rand index against levels (partition.csv,
    /// cluster.json).
    Cluster(Common),
    /// PCA or MDS embedding (embedding.csv).
    Project(Common),
    /// Split-half stability of performance similarity (stability.json).
    Stability(Common),
    /// Synthetic corpus and performance log written as a corpus directory.
    Synth(Common),
    /// SVG heatmap of a square matrix CSV (heatmap.svg).
    Heatmap {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(short = 'o', long = "out", default_value = ".")]
        out: PathBuf,
        /// none or hierarchical.
        #[arg(long, default_value = "hierarchical")]
        ordering: String,
    },
}

/// Lazily loaded inputs and memoized similarity matrices for one config.
pub struct Pipeline {
    cfg: PipelineConfig,
    corpus: Option<Corpus>,
    records: Option<Vec<PerformanceRecord>>,
    stopwords: Option<HashSet<String>>,
    cache: HashMap<String, SimilarityMatrix>,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Self {
        Pipeline {
            cfg,
            corpus: None,
            records: None,
            stopwords: None,
            cache: HashMap::new(),
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    fn corpus_dir(&self) -> Result<PathBuf> {
        let dir = self
            .cfg
            .corpus
            .as_ref()
            .ok_or_else(|| Error::Config("no corpus configured".into()))?;
        Ok(self.cfg.resolve(dir))
    }

    pub fn corpus(&mut self) -> Result<&Corpus> {
        if self.corpus.is_none() {
            self.corpus = Some(load_corpus(self.corpus_dir()?)?);
        }
        Ok(self.corpus.as_ref().expect("loaded"))
    }

    pub fn records(&mut self) -> Result<&[PerformanceRecord]> {
        if self.records.is_none() {
            let path = match &self.cfg.performance {
                Some(p) => self.cfg.resolve(p),
                None => self.corpus_dir()?.join(PERFORMANCE_FILE),
            };
            let corpus = if self.cfg.corpus.is_some() { Some(self.corpus()?.clone()) } else { None };
            let log = load_performance(&path, corpus.as_ref())?;
            if log.duplicates_dropped > 0 {
                log::warn!("dropped {} duplicate performance rows", log.duplicates_dropped);
            }
            self.records = Some(log.records);
        }
        Ok(self.records.as_deref().expect("loaded"))
    }

    fn stopwords(&mut self) -> Result<HashSet<String>> {
        if self.stopwords.is_none() {
            let words = match &self.cfg.params.stopwords {
                None => HashSet::new(),
                Some(p) => {
                    let path = self.cfg.resolve(p);
                    let text = fs::read_to_string(&path).map_err(|e| Error::from(e).in_file(&path))?;
                    text.lines()
                        .map(|l| l.trim().to_lowercase())
                        .filter(|l| !l.is_empty())
                        .collect()
                }
            };
            self.stopwords = Some(words);
        }
        Ok(self.stopwords.clone().expect("loaded"))
    }

    fn source_matrix(&mut self, src: FeatureSource, selector: SolutionSelector) -> Result<FeatureMatrix> {
        let extracted = match src {
            FeatureSource::Statement => {
                let stop = self.stopwords()?;
                return Ok(statement_bow(self.corpus()?, &stop));
            }
            FeatureSource::World => return Ok(world_features(self.corpus()?)),
            FeatureSource::Performance => return Ok(performance_features(self.records()?)),
            FeatureSource::Solution => solution_keyword_features(self.corpus()?, selector)?,
            FeatureSource::Structural => structural_features(self.corpus()?),
        };
        if !extracted.excluded.is_empty() {
            log::warn!(
                "{} item(s) excluded from {} features",
                extracted.excluded.len(),
                src.as_str()
            );
        }
        Ok(extracted.matrix)
    }

    /// Extracted, concatenated and transformed features of a pipeline.
    pub fn features(&mut self, p: &FeaturePipeline) -> Result<FeatureMatrix> {
        let selector = p.selector.unwrap_or_default();
        let parts = p
            .sources
            .expand()
            .into_iter()
            .map(|s| self.source_matrix(s, selector))
            .collect::<Result<Vec<_>>>()?;
        let common: Vec<ItemId> = parts[0]
            .item_ids()
            .iter()
            .filter(|id| parts[1..].iter().all(|m| m.item_ids().contains(id)))
            .cloned()
            .collect();
        let parts = parts
            .iter()
            .map(|m| m.select_items(&common))
            .collect::<Result<Vec<_>>>()?;
        let mut m = concat_features(&parts)?;
        for t in &p.transforms {
            m = match t.spec() {
                Some(spec) => apply_transform(&m, spec)?,
                None => pca_decorrelate(&m)?,
            };
        }
        Ok(m)
    }

    /// Similarity matrix for a measure name; stage names resolve through the
    /// config.
    pub fn similarity(&mut self, name: &str) -> Result<SimilarityMatrix> {
        if let Some(s) = self.cache.get(name) {
            return Ok(s.clone());
        }
        let m: MeasureName = name.parse()?;
        let canonical = m.to_string();
        let s = match m {
            MeasureName::Features(p) => {
                let f = self.features(&p)?;
                similarity_from_features(&f, p.metric, &canonical)?
            }
            MeasureName::Edit { kind, selector } => {
                let params = &self.cfg.params;
                let options = EditOptions {
                    selector: selector.unwrap_or_default(),
                    aggregation: params.aggregation,
                    nw_scoring: params.nw,
                    caps: params.caps,
                };
                edit_similarity(self.corpus()?, kind, options, &canonical)?
            }
            MeasureName::Performance(measure) => {
                let min_overlap = self.cfg.params.min_overlap;
                performance_similarity(self.records()?, measure, min_overlap, &canonical)
            }
            MeasureName::Stage(stage) => {
                let StageConfig { inputs, method, weights } = self
                    .cfg
                    .stages
                    .get(&stage)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("undeclared stage {stage:?}")))?;
                let ms = inputs.iter().map(|i| self.similarity(i)).collect::<Result<Vec<_>>>()?;
                let ms = restrict_to_common(&ms)?;
                combine_similarities(&ms, method, weights.as_deref(), &stage)?
            }
        };
        self.cache.insert(name.to_string(), s.clone());
        Ok(s)
    }
}

/// Restrict matrices to the items present in all of them, in the first
/// matrix's order.
fn restrict_to_common(ms: &[SimilarityMatrix]) -> Result<Vec<SimilarityMatrix>> {
    let common: Vec<ItemId> = ms[0]
        .item_ids()
        .iter()
        .filter(|id| ms[1..].iter().all(|m| m.item_ids().contains(id)))
        .cloned()
        .collect();
    if common.len() < ms[0].len() || ms.iter().any(|m| m.len() != common.len()) {
        log::info!("restricting {} measures to {} common items", ms.len(), common.len());
    }
    ms.iter().map(|m| m.select(&common)).collect()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::from(e).in_file(&path))?;
    Ok(path)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(dir, name, &text)
}

fn measure_list(common: &Common, cfg: &PipelineConfig) -> Result<Vec<String>> {
    let names: Vec<String> = match &common.measures {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None => cfg.measures.clone(),
    };
    for n in &names {
        if let MeasureName::Stage(s) = n.parse::<MeasureName>()? {
            if !cfg.stages.contains_key(&s) {
                return Err(Error::Config(format!("measure {s:?} refers to no declared stage")));
            }
        }
    }
    Ok(names)
}

fn single_measure(common: &Common, cfg: &PipelineConfig) -> Result<String> {
    if common.measures.is_some() {
        let list = measure_list(common, cfg)?;
        return match <[String; 1]>::try_from(list) {
            Ok([m]) => Ok(m),
            Err(list) => Err(Error::InvalidInput(format!(
                "this subcommand takes exactly one measure, got {}",
                list.len()
            ))),
        };
    }
    cfg.measure
        .clone()
        .ok_or_else(|| Error::Config("no measure configured".into()))
}

fn at_least_two(names: &[String]) -> Result<()> {
    if names.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 measures, got {}",
            names.len()
        )));
    }
    Ok(())
}

fn load(common: &Common) -> Result<(Pipeline, u64)> {
    let cfg = PipelineConfig::load(&common.config)?;
    let seed = common.seed.unwrap_or(cfg.seed);
    Ok((Pipeline::new(cfg), seed))
}

#[derive(Serialize)]
struct MetaAgreementReport<'a> {
    measures: &'a [String],
    methods: [String; 2],
    value: f64,
}

#[derive(Serialize)]
struct ClusterReport {
    measure: String,
    k: usize,
    runs: usize,
    restarts: usize,
    seed: u64,
    wcss: f64,
    rand_index: f64,
}

#[derive(Serialize)]
struct StabilityReport {
    measure: &'static str,
    min_overlap: usize,
    seed: u64,
    value: f64,
}

/// Run one parsed command. Returns the text printed on stdout.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Features(common) => {
            let (mut p, _) = load(&common)?;
            let name = single_measure(&common, p.config())?;
            let MeasureName::Features(fp) = name.parse()? else {
                return Err(Error::InvalidInput(format!("{name} is not a feature-based measure")));
            };
            let m = p.features(&fp)?;
            let path = write_file(&common.out, "features.csv", &m.to_csv())?;
            Ok(format!("{}\n", path.display()))
        }
        Command::Sim(common) => {
            let (mut p, _) = load(&common)?;
            let name = single_measure(&common, p.config())?;
            let s = p.similarity(&name)?;
            let path = write_file(&common.out, "sim.csv", &s.to_csv())?;
            Ok(format!("{}\n", path.display()))
        }
        Command::Agree { common, method } => {
            let method = AgreementMethod::parse(&method)
                .ok_or_else(|| Error::InvalidInput(format!("unknown agreement method {method:?}")))?;
            let (mut p, _) = load(&common)?;
            let names = measure_list(&common, p.config())?;
            at_least_two(&names)?;
            let ms = names.iter().map(|n| p.similarity(n)).collect::<Result<Vec<_>>>()?;
            let a = agreement_matrix(&restrict_to_common(&ms)?, method)?;
            let path = write_file(&common.out, "agreement.csv", &a.to_csv())?;
            Ok(format!("{}\n", path.display()))
        }
        Command::MetaAgree(common) => {
            let (mut p, _) = load(&common)?;
            let names = measure_list(&common, p.config())?;
            at_least_two(&names)?;
            let ms = names.iter().map(|n| p.similarity(n)).collect::<Result<Vec<_>>>()?;
            let ms = restrict_to_common(&ms)?;
            let methods = [AgreementMethod::Correlation, AgreementMethod::TopN(p.config().params.top_n)];
            let a = agreement_matrix(&ms, methods[0])?;
            let b = agreement_matrix(&ms, methods[1])?;
            let value = meta_agreement(&a, &b)?;
            let report = MetaAgreementReport {
                measures: &names,
                methods: methods.map(|m| m.to_string()),
                value,
            };
            write_json(&common.out, "meta_agreement.json", &report)?;
            Ok(format!("{value}\n"))
        }
        Command::Cluster(common) => {
            let (mut p, seed) = load(&common)?;
            let name = single_measure(&common, p.config())?;
            let s = p.similarity(&name)?;
            let reference = Partition::from_levels(p.corpus()?)?;
            let params = p.config().params.clone();
            let k = params.k.unwrap_or_else(|| reference.n_clusters());
            let km = kmeans(&s, k, seed, params.restarts)?;
            let rand_index = cluster_eval(&s, &reference, k, params.runs, seed)?;
            write_file(&common.out, "partition.csv", &km.partition.to_csv())?;
            let report = ClusterReport {
                measure: s.measure_name().to_string(),
                k,
                runs: params.runs,
                restarts: params.restarts,
                seed,
                wcss: km.wcss,
                rand_index,
            };
            write_json(&common.out, "cluster.json", &report)?;
            Ok(format!("{rand_index}\n"))
        }
        Command::Project(common) => {
            let (mut p, _) = load(&common)?;
            let name = single_measure(&common, p.config())?;
            let params = p.config().params.clone();
            let e = match params.projection {
                ProjectionKind::Pca => {
                    let MeasureName::Features(fp) = name.parse()? else {
                        return Err(Error::InvalidInput(format!("PCA needs a feature-based measure, got {name}")));
                    };
                    pca_project(&p.features(&fp)?, params.dims)?
                }
                ProjectionKind::Mds => mds_project(&p.similarity(&name)?, params.dims)?,
            };
            let path = write_file(&common.out, "embedding.csv", &e.to_csv())?;
            Ok(format!("{}\n", path.display()))
        }
        Command::Stability(common) => {
            let (mut p, seed) = load(&common)?;
            let params = p.config().params.clone();
            let value = split_half_stability(p.records()?, params.performance_measure, params.min_overlap, seed)?;
            let report = StabilityReport {
                measure: params.performance_measure.as_str(),
                min_overlap: params.min_overlap,
                seed,
                value,
            };
            write_json(&common.out, "stability.json", &report)?;
            Ok(format!("{value}\n"))
        }
        Command::Synth(common) => {
            let cfg = PipelineConfig::load(&common.config)?;
            let synth = cfg
                .synth
                .clone()
                .ok_or_else(|| Error::Config("no synth section configured".into()))?;
            let mut corpus_spec = synth.corpus;
            if let Some(seed) = common.seed {
                corpus_spec.seed = seed;
            }
            let corpus = generate_corpus(&corpus_spec)?;
            write_corpus(&corpus, &common.out)?;
            if let Some(mut perf) = synth.performance {
                if let Some(seed) = common.seed {
                    perf.seed = seed;
                }
                let records = generate_performance(&corpus, &perf)?;
                let mut buf = Vec::new();
                write_performance(&records, &mut buf)?;
                write_file(&common.out, PERFORMANCE_FILE, &String::from_utf8(buf).expect("CSV is UTF-8"))?;
            }
            Ok(format!("{}\n", common.out.display()))
        }
        Command::Heatmap { input, out, ordering } => {
            let ordering = Ordering::parse(&ordering)
                .ok_or_else(|| Error::InvalidInput(format!("unknown ordering {ordering:?}")))?;
            let text = fs::read_to_string(&input).map_err(|e| Error::from(e).in_file(&input))?;
            let m = parse_square_csv(&text).map_err(|e| e.in_file(&input))?;
            let path = write_file(&out, "heatmap.svg", &emit_heatmap(&m, ordering)?)?;
            Ok(format!("{}\n", path.display()))
        }
    }
}

/// Single-line, machine-parsable rendering of an error: `error[<kind>]: <message>`.
pub fn error_line(e: &Error) -> String {
    let msg = e.to_string().replace(['\n', '\r'], " ");
    format!("error[{}]: {msg}", e.kind())
}
