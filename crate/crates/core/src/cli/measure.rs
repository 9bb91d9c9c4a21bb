//! Measure names: compact, canonical descriptions of one similarity
//! pipeline.
//!
//! ```text
//! name      := features "/" transforms "/" metric selector?
//!            | ("ted" | "levenshtein" | "nw") selector?
//!            | "performance" (":success")?
//!            | stage
//! features  := "bag" | source ("+" source)*
//! source    := "statement" | "solution" | "structural" | "world" | "performance"
//! transforms:= "none" | step ("+" step)*
//! step      := "bin" | "log" | "max" | "idf" | "weights" | "pca"
//!            | "scale:" group ":" factor
//! metric    := "correlation" | "cosine" | "euclidean"
//! selector  := "@" ("sample" | "top_learner" | "all")
//! ```
//!
//! `bag` is statement plus solution keywords; `weights` multiplies solution
//! features by 5; `pca` replaces the features by their principal components.

use std::fmt;
use std::str::FromStr;

use crate::corpus::SolutionSelector;
use crate::error::{Error, Result};
use crate::features::{FeatureGroup, TransformSpec};
use crate::similarity::{EditKind, FeatureMetric, PerformanceMeasure};

pub const WEIGHTS_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureSource {
    Statement,
    Solution,
    Structural,
    World,
    Performance,
}

impl FeatureSource {
    pub const ALL: [FeatureSource; 5] = [
        FeatureSource::Statement,
        FeatureSource::Solution,
        FeatureSource::Structural,
        FeatureSource::World,
        FeatureSource::Performance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSource::Statement => "statement",
            FeatureSource::Solution => "solution",
            FeatureSource::Structural => "structural",
            FeatureSource::World => "world",
            FeatureSource::Performance => "performance",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sources {
    Bag,
    List(Vec<FeatureSource>),
}

impl Sources {
    pub fn expand(&self) -> Vec<FeatureSource> {
        match self {
            Sources::Bag => vec![FeatureSource::Statement, FeatureSource::Solution],
            Sources::List(l) => l.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    Binarize,
    Log,
    Max,
    Idf,
    Weights,
    Scale { group: FeatureGroup, factor: f64 },
    Decorrelate,
}

impl Transform {
    /// The feature-matrix transform this step performs, if it is one.
    pub fn spec(self) -> Option<TransformSpec> {
        Some(match self {
            Transform::Binarize => TransformSpec::Binarize,
            Transform::Log => TransformSpec::Log,
            Transform::Max => TransformSpec::MaxNormalize,
            Transform::Idf => TransformSpec::Idf,
            Transform::Weights => TransformSpec::Scale {
                group: FeatureGroup::Solution,
                factor: WEIGHTS_FACTOR,
            },
            Transform::Scale { group, factor } => TransformSpec::Scale { group, factor },
            Transform::Decorrelate => return None,
        })
    }

    fn parse(s: &str) -> Option<Transform> {
        Some(match s {
            "bin" => Transform::Binarize,
            "log" => Transform::Log,
            "max" => Transform::Max,
            "idf" => Transform::Idf,
            "weights" => Transform::Weights,
            "pca" => Transform::Decorrelate,
            _ => {
                let rest = s.strip_prefix("scale:")?;
                let (group, factor) = rest.split_once(':')?;
                let factor: f64 = factor.parse().ok()?;
                if !(factor.is_finite() && factor > 0.0) {
                    return None;
                }
                Transform::Scale {
                    group: FeatureGroup::parse(group)?,
                    factor,
                }
            }
        })
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Binarize => f.write_str("bin"),
            Transform::Log => f.write_str("log"),
            Transform::Max => f.write_str("max"),
            Transform::Idf => f.write_str("idf"),
            Transform::Weights => f.write_str("weights"),
            Transform::Decorrelate => f.write_str("pca"),
            Transform::Scale { group, factor } => write!(f, "scale:{group}:{factor}"),
        }
    }
}

fn metric_str(m: FeatureMetric) -> &'static str {
    match m {
        FeatureMetric::Pearson => "correlation",
        FeatureMetric::Cosine => "cosine",
        FeatureMetric::Euclidean => "euclidean",
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeaturePipeline {
    pub sources: Sources,
    pub transforms: Vec<Transform>,
    pub metric: FeatureMetric,
    pub selector: Option<SolutionSelector>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureName {
    Features(FeaturePipeline),
    Edit {
        kind: EditKind,
        selector: Option<SolutionSelector>,
    },
    Performance(PerformanceMeasure),
    /// A combination stage declared in the pipeline config.
    Stage(String),
}

const RESERVED: [&str; 4] = ["ted", "levenshtein", "nw", "performance"];

/// Whether `s` can name a combination stage.
pub fn is_stage_name(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && !RESERVED.contains(&s)
}

fn bad(name: &str, why: impl fmt::Display) -> Error {
    Error::Config(format!("invalid measure name {name:?}: {why}"))
}

fn split_selector(s: &str) -> Result<(&str, Option<SolutionSelector>)> {
    match s.split_once('@') {
        None => Ok((s, None)),
        Some((head, sel)) => {
            let selector = SolutionSelector::parse(sel).ok_or_else(|| bad(s, format!("unknown selector {sel:?}")))?;
            Ok((head, Some(selector)))
        }
    }
}

impl FromStr for MeasureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "performance" {
            return Ok(MeasureName::Performance(PerformanceMeasure::LogTime));
        }
        if let Some(m) = s.strip_prefix("performance:") {
            return match PerformanceMeasure::parse(m) {
                Some(PerformanceMeasure::Success) => Ok(MeasureName::Performance(PerformanceMeasure::Success)),
                _ => Err(bad(s, format!("unknown performance measure {m:?}"))),
            };
        }
        let (head, selector) = split_selector(s)?;
        let parts: Vec<&str> = head.split('/').collect();
        if parts.len() == 1 {
            let kind = match head {
                "ted" => EditKind::Ted,
                "levenshtein" => EditKind::Levenshtein,
                "nw" => EditKind::Nw,
                _ if selector.is_none() && is_stage_name(head) => return Ok(MeasureName::Stage(head.to_string())),
                _ => return Err(bad(s, "expected <features>/<transforms>/<metric>, an edit distance, or a stage")),
            };
            return Ok(MeasureName::Edit { kind, selector });
        }
        let [features, transforms, metric] = parts[..] else {
            return Err(bad(s, "expected three '/'-separated parts"));
        };
        let sources = if features == "bag" {
            Sources::Bag
        } else {
            let mut list = Vec::new();
            for tok in features.split('+') {
                let src = FeatureSource::ALL
                    .into_iter()
                    .find(|f| f.as_str() == tok)
                    .ok_or_else(|| bad(s, format!("unknown feature source {tok:?}")))?;
                if list.contains(&src) {
                    return Err(bad(s, format!("feature source {tok:?} listed twice")));
                }
                list.push(src);
            }
            Sources::List(list)
        };
        let transforms = if transforms == "none" {
            Vec::new()
        } else {
            transforms
                .split('+')
                .map(|t| Transform::parse(t).ok_or_else(|| bad(s, format!("unknown transform {t:?}"))))
                .collect::<Result<Vec<_>>>()?
        };
        let metric = match metric {
            "correlation" => FeatureMetric::Pearson,
            "cosine" => FeatureMetric::Cosine,
            "euclidean" => FeatureMetric::Euclidean,
            other => return Err(bad(s, format!("unknown metric {other:?}"))),
        };
        Ok(MeasureName::Features(FeaturePipeline {
            sources,
            transforms,
            metric,
            selector,
        }))
    }
}

impl fmt::Display for MeasureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let selector = |f: &mut fmt::Formatter<'_>, s: &Option<SolutionSelector>| match s {
            Some(s) => write!(f, "@{}", s.as_str()),
            None => Ok(()),
        };
        match self {
            MeasureName::Features(p) => {
                match &p.sources {
                    Sources::Bag => f.write_str("bag")?,
                    Sources::List(l) => {
                        let names: Vec<&str> = l.iter().map(|s| s.as_str()).collect();
                        f.write_str(&names.join("+"))?;
                    }
                }
                f.write_str("/")?;
                if p.transforms.is_empty() {
                    f.write_str("none")?;
                } else {
                    let steps: Vec<String> = p.transforms.iter().map(ToString::to_string).collect();
                    f.write_str(&steps.join("+"))?;
                }
                write!(f, "/{}", metric_str(p.metric))?;
                selector(f, &p.selector)
            }
            MeasureName::Edit { kind, selector: s } => {
                f.write_str(kind.as_str())?;
                selector(f, s)
            }
            MeasureName::Performance(PerformanceMeasure::LogTime) => f.write_str("performance"),
            MeasureName::Performance(m) => write!(f, "performance:{}", m.as_str()),
            MeasureName::Stage(name) => f.write_str(name),
        }
    }
}
