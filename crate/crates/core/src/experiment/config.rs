//! Experiment configuration and TOML suite files.
//!
//! A suite file holds optional top-level `name`, an optional `[defaults]`
//! table and one or more `[[case]]` tables. Each case starts from the
//! defaults; a key given in the case replaces the default wholesale, except
//! `train`, whose keys are merged one by one. See `docs/config.md`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kds::KdsKind;
use crate::neural::{ArchSpec, TrainConfig};
use crate::series::{KeepMode, SyntheticParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// Replicate `r` generates with seed `params.seed + r`.
    Synthetic(SyntheticParams),
    /// A CSV file with a `value` column. Relative paths resolve against the
    /// suite file's directory.
    Csv {
        path: PathBuf,
        #[serde(default = "default_period")]
        period: usize,
    },
}

fn default_period() -> usize {
    48
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SyntheticParams::default())
    }
}

/// Which part of the training slice the knowledge system is built from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KdsFit {
    /// The whole training slice, whatever `keep_fraction` says. The
    /// knowledge system stands for prior expertise, so reducing the data
    /// the networks learn from leaves it untouched.
    #[default]
    FullTrain,
    /// Only the observations kept after the reduction.
    Kept,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub label: String,
    pub data: DataSource,
    pub train_fraction: f64,
    /// Share of the training slice kept for fitting.
    pub keep_fraction: f64,
    pub keep: KeepMode,
    pub kds: KdsKind,
    pub kds_fit: KdsFit,
    pub dnn_arch: ArchSpec,
    pub train: TrainConfig,
    /// Windows hold `w + 1` observations.
    pub w: usize,
    pub h: usize,
    pub seeds: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            label: "case".into(),
            data: DataSource::default(),
            train_fraction: 0.8,
            keep_fraction: 1.0,
            keep: KeepMode::Last,
            kds: KdsKind::graph(),
            kds_fit: KdsFit::FullTrain,
            dnn_arch: ArchSpec::default(),
            train: TrainConfig::default(),
            w: 48,
            h: 1,
            seeds: vec![1, 2, 3, 4, 5],
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let frac = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in (0, 1], got {v}")))
            }
        };
        frac("train_fraction", self.train_fraction)?;
        frac("keep_fraction", self.keep_fraction)?;
        if self.train_fraction == 1.0 {
            return Err(Error::Config("train_fraction must leave a test slice".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if self.h == 0 {
            return Err(Error::Config("h must be at least 1".into()));
        }
        if let DataSource::Csv { period: 0, .. } = self.data {
            return Err(Error::Config("data.period must be at least 1".into()));
        }
        self.kds.validate()?;
        self.train.validate()?;
        self.dnn_arch.build(self.w + 1 + self.h, self.h)?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| format!("# unserializable: {e}\n"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub name: String,
    pub cases: Vec<ExperimentConfig>,
}

/// Parses a suite. `base_dir` anchors relative CSV paths.
pub fn parse_suite(text: &str, base_dir: Option<&Path>) -> Result<Suite> {
    let doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    for key in doc.keys() {
        if !matches!(key.as_str(), "name" | "defaults" | "case") {
            return Err(Error::Config(format!("unknown top-level key `{key}`")));
        }
    }
    let name = match doc.get("name") {
        None => "suite".to_string(),
        Some(toml::Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::Config("`name` must be a string".into())),
    };
    let defaults = match doc.get("defaults") {
        None => toml::Table::new(),
        Some(toml::Value::Table(t)) => t.clone(),
        Some(_) => return Err(Error::Config("`defaults` must be a table".into())),
    };
    let cases = match doc.get("case") {
        Some(toml::Value::Array(a)) if !a.is_empty() => a,
        _ => return Err(Error::Config("suite needs at least one [[case]]".into())),
    };

    let mut out = Vec::with_capacity(cases.len());
    for (i, case) in cases.iter().enumerate() {
        let toml::Value::Table(case) = case else {
            return Err(Error::Config(format!("case[{i}] must be a table")));
        };
        let merged = merge(&defaults, case);
        let mut cfg: ExperimentConfig =
            serde_path_to_error::deserialize(toml::Value::Table(merged)).map_err(|e| {
                let path = e.path().to_string();
                Error::Config(format!("case[{i}].{path}: {}", e.into_inner()))
            })?;
        if !case.contains_key("label") {
            cfg.label = format!("case {}", i + 1);
        }
        if let (DataSource::Csv { path, .. }, Some(dir)) = (&mut cfg.data, base_dir) {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
        cfg.validate()
            .map_err(|e| Error::Config(format!("case[{i}] ({}): {e}", cfg.label)))?;
        out.push(cfg);
    }
    Ok(Suite { name, cases: out })
}

fn merge(defaults: &toml::Table, case: &toml::Table) -> toml::Table {
    let mut merged = defaults.clone();
    for (k, v) in case {
        match (k.as_str(), merged.get_mut(k), v) {
            ("train", Some(toml::Value::Table(base)), toml::Value::Table(over)) => {
                for (tk, tv) in over {
                    base.insert(tk.clone(), tv.clone());
                }
            }
            _ => {
                merged.insert(k.clone(), v.clone());
            }
        }
    }
    merged
}

pub fn load_suite(path: impl AsRef<Path>) -> Result<Suite> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_suite(&text, path.parent())
}
