//! Knowledge-driven forecasters.
//!
//! Every variant implements [`Forecaster`]: given the observed history up to
//! a forecast point, return an `h`-step forecast. The fusion layer and the
//! experiment harness only ever see that contract.

pub mod baselines;
pub mod graph;
pub mod rule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Series;
use crate::window::SampleSet;

pub use baselines::{
    indexed_noise, naive_last, noisy_wrap, seasonal_ar_fit, zero_kds, SeasonalArModel,
};
pub use graph::{build_graph, build_graph_with, delta, kds_forecast, Edge, GraphOptions, KnowledgeGraph};
pub use rule::{apply_seasonal_rule, BlockStats, RuleDiagnostics, SeasonalRuleConfig, SigmaMode};

/// A forecaster driven by fixed knowledge rather than trained weights.
pub trait Forecaster {
    /// Forecasts the `h` values following `history`. `next_index` is the
    /// absolute series index of the first forecast step.
    fn forecast(&self, history: &[f64], next_index: usize, h: usize) -> Result<Vec<f64>>;

    /// Shortest history `forecast` accepts.
    fn min_history(&self) -> usize;
}

/// Declarative description of a knowledge system, as written in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KdsKind {
    Graph {
        #[serde(default = "default_threshold")]
        threshold: f64,
        /// Defaults to two seasonal periods.
        #[serde(default)]
        max_lag: Option<usize>,
        #[serde(default)]
        abs_threshold: bool,
        #[serde(default)]
        rule: SeasonalRuleConfig,
    },
    NaiveLast,
    Zero,
    Noisy {
        inner: Box<KdsKind>,
        noise_sd: f64,
        #[serde(default)]
        seed: u64,
    },
    SeasonalAr {
        #[serde(default = "default_ar_order")]
        p: usize,
        #[serde(default = "default_true")]
        seasonal_diff: bool,
    },
}

fn default_threshold() -> f64 {
    graph::DEFAULT_THRESHOLD
}

fn default_ar_order() -> usize {
    2
}

fn default_true() -> bool {
    true
}

impl Default for KdsKind {
    fn default() -> Self {
        KdsKind::graph()
    }
}

impl KdsKind {
    /// The lag graph with default threshold, lag range and rule.
    pub fn graph() -> Self {
        KdsKind::Graph {
            threshold: graph::DEFAULT_THRESHOLD,
            max_lag: None,
            abs_threshold: false,
            rule: SeasonalRuleConfig::default(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            KdsKind::Graph { .. } => "graph".into(),
            KdsKind::NaiveLast => "naive_last".into(),
            KdsKind::Zero => "zero".into(),
            KdsKind::Noisy { inner, .. } => format!("noisy({})", inner.name()),
            KdsKind::SeasonalAr { .. } => "seasonal_ar".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KdsKind::Graph { threshold, rule, .. } => {
                if !threshold.is_finite() {
                    return Err(Error::Config("kds.threshold must be finite".into()));
                }
                rule.validate()
            }
            KdsKind::Noisy {
                inner, noise_sd, ..
            } => {
                if !(*noise_sd >= 0.0) || !noise_sd.is_finite() {
                    return Err(Error::Config("kds.noise_sd must be non-negative".into()));
                }
                if matches!(**inner, KdsKind::Noisy { .. }) {
                    return Err(Error::Config("noisy knowledge systems cannot nest".into()));
                }
                inner.validate()
            }
            KdsKind::SeasonalAr { p, .. } if *p == 0 => {
                Err(Error::Config("kds.p must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Fits the knowledge system on the training slice.
    pub fn fit(&self, train: &Series) -> Result<Kds> {
        self.validate()?;
        Ok(match self {
            KdsKind::Graph {
                threshold,
                max_lag,
                abs_threshold,
                rule,
            } => {
                let max_lag = max_lag.unwrap_or(2 * train.period());
                let g = graph::build_graph_with(
                    train,
                    max_lag,
                    GraphOptions {
                        threshold: *threshold,
                        abs_threshold: *abs_threshold,
                    },
                )?;
                let stats = BlockStats::fit(train, rule)?;
                Kds::Graph(GraphKds {
                    graph: g,
                    rule: rule.clone(),
                    stats,
                })
            }
            KdsKind::NaiveLast => Kds::NaiveLast,
            KdsKind::Zero => Kds::Zero,
            KdsKind::Noisy {
                inner,
                noise_sd,
                seed,
            } => Kds::Noisy {
                inner: Box::new(inner.fit(train)?),
                noise_sd: *noise_sd,
                seed: *seed,
            },
            KdsKind::SeasonalAr { p, seasonal_diff } => {
                Kds::SeasonalAr(seasonal_ar_fit(train, *p, *seasonal_diff)?)
            }
        })
    }
}

/// The lag graph conditioned by the seasonal rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphKds {
    pub graph: KnowledgeGraph,
    pub rule: SeasonalRuleConfig,
    pub stats: BlockStats,
}

impl GraphKds {
    pub fn forecast_with_diagnostics(
        &self,
        history: &[f64],
        next_index: usize,
        h: usize,
    ) -> Result<(Vec<f64>, RuleDiagnostics)> {
        let raw = kds_forecast(&self.graph, history, h)?;
        Ok(apply_seasonal_rule(
            &raw,
            history,
            &self.rule,
            &self.stats,
            next_index,
        ))
    }
}

/// A fitted knowledge system.
#[derive(Debug, Clone, PartialEq)]
pub enum Kds {
    Graph(GraphKds),
    NaiveLast,
    Zero,
    Noisy {
        inner: Box<Kds>,
        noise_sd: f64,
        seed: u64,
    },
    SeasonalAr(SeasonalArModel),
}

impl Kds {
    pub fn name(&self) -> String {
        match self {
            Kds::Graph(_) => "graph".into(),
            Kds::NaiveLast => "naive_last".into(),
            Kds::Zero => "zero".into(),
            Kds::Noisy { inner, .. } => format!("noisy({})", inner.name()),
            Kds::SeasonalAr(_) => "seasonal_ar".into(),
        }
    }
}

impl Forecaster for Kds {
    fn forecast(&self, history: &[f64], next_index: usize, h: usize) -> Result<Vec<f64>> {
        match self {
            Kds::Graph(g) => g.forecast_with_diagnostics(history, next_index, h).map(|r| r.0),
            Kds::NaiveLast => naive_last(history, h),
            Kds::Zero => Ok(zero_kds(h)),
            Kds::Noisy {
                inner,
                noise_sd,
                seed,
            } => {
                let mut out = inner.forecast(history, next_index, h)?;
                for (i, v) in out.iter_mut().enumerate() {
                    *v += indexed_noise(*noise_sd, *seed, next_index + i)?;
                }
                Ok(out)
            }
            Kds::SeasonalAr(m) => m.forecast(history, h),
        }
    }

    fn min_history(&self) -> usize {
        match self {
            Kds::Graph(g) => g.graph.max_lag(),
            Kds::NaiveLast => 1,
            Kds::Zero => 0,
            Kds::Noisy { inner, .. } => inner.min_history(),
            Kds::SeasonalAr(m) => m.min_history(),
        }
    }
}

/// Walk-forward forecasts for every sample: the forecast for a sample whose
/// first target sits at absolute index `t` sees only `context` values
/// before `t`.
pub fn kds_predict_series<F: Forecaster + ?Sized>(
    kds: &F,
    context: &Series,
    samples: &SampleSet,
) -> Result<Vec<Vec<f64>>> {
    samples
        .iter()
        .map(|s| {
            let t = s.target_start;
            if t < context.origin() || t > context.end() {
                return Err(Error::InvalidArgument(format!(
                    "sample target {t} lies outside the context [{}, {}]",
                    context.origin(),
                    context.end()
                )));
            }
            let history = &context.values()[..t - context.origin()];
            if history.len() < kds.min_history() {
                return Err(Error::TooShort {
                    needed: kds.min_history(),
                    actual: history.len(),
                });
            }
            kds.forecast(history, t, samples.h)
        })
        .collect()
}

/// Stores walk-forward forecasts on the (unscaled) samples.
pub fn attach_kds_predictions<F: Forecaster + ?Sized>(
    kds: &F,
    context: &Series,
    samples: &mut SampleSet,
) -> Result<()> {
    let preds = kds_predict_series(kds, context, samples)?;
    for (s, p) in samples.samples.iter_mut().zip(preds) {
        s.kds_pred = Some(p);
    }
    Ok(())
}
