//! Lag graph built from partial autocorrelations.
//!
//! Every observation is a node. A node is linked to the node `k` steps
//! earlier when the training-set partial autocorrelation at lag `k` exceeds
//! the threshold, so the graph reduces to a template of connected lags that
//! is applied at every forecast point. Edge weights are `pacf(k) * delta(k)`,
//! normalized to sum to one, where `delta` penalizes links longer than one
//! seasonal period.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::series::Series;
use crate::stats::{pacf, PacfProfile};

/// Default similarity cut-off for connecting two nodes.
pub const DEFAULT_THRESHOLD: f64 = 0.2;

/// Distance penalty for a link spanning `lag` steps: 1 within one period,
/// `1 / (2 log2 lag)` beyond.
pub fn delta(lag: usize, period: usize) -> Result<f64> {
    if lag == 0 {
        return Err(Error::InvalidArgument("lag must be at least 1".into()));
    }
    Ok(if lag <= period {
        1.0
    } else {
        1.0 / (2.0 * (lag as f64).log2())
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub lag: usize,
    pub pacf: f64,
    pub delta: f64,
    pub raw_weight: f64,
    pub norm_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeGraph {
    edges: Vec<Edge>,
    threshold: f64,
    period: usize,
    fallback: bool,
}

/// Options for graph construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphOptions {
    pub threshold: f64,
    /// Compare `|pacf|` rather than the signed value against the threshold.
    pub abs_threshold: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            threshold: DEFAULT_THRESHOLD,
            abs_threshold: false,
        }
    }
}

/// Computes the training PACF up to `max_lag` and builds the graph from it.
pub fn build_graph(train: &Series, threshold: f64, max_lag: usize) -> Result<KnowledgeGraph> {
    build_graph_with(
        train,
        max_lag,
        GraphOptions {
            threshold,
            ..GraphOptions::default()
        },
    )
}

pub fn build_graph_with(
    train: &Series,
    max_lag: usize,
    options: GraphOptions,
) -> Result<KnowledgeGraph> {
    let profile = pacf(train, max_lag)?;
    KnowledgeGraph::from_pacf(&profile, train.period(), options)
}

impl KnowledgeGraph {
    /// Connects every lag whose PACF passes the threshold. When none does,
    /// falls back to lags `{1, period}` with equal weights and sets
    /// [`KnowledgeGraph::is_fallback`].
    pub fn from_pacf(profile: &PacfProfile, period: usize, options: GraphOptions) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidArgument("period must be at least 1".into()));
        }
        let mut edges = Vec::new();
        for (lag, value) in profile.iter() {
            let passes = if options.abs_threshold {
                value.abs() > options.threshold
            } else {
                value > options.threshold
            };
            if passes {
                let d = delta(lag, period)?;
                edges.push(Edge {
                    lag,
                    pacf: value,
                    delta: d,
                    raw_weight: value * d,
                    norm_weight: 0.0,
                });
            }
        }
        let total: f64 = edges.iter().map(|e| e.raw_weight).sum();
        if edges.is_empty() || !(total > 0.0) {
            return Ok(Self::fallback(profile, period, options.threshold));
        }
        for e in &mut edges {
            e.norm_weight = e.raw_weight / total;
        }
        Ok(KnowledgeGraph {
            edges,
            threshold: options.threshold,
            period,
            fallback: false,
        })
    }

    fn fallback(profile: &PacfProfile, period: usize, threshold: f64) -> Self {
        let mut lags = vec![1];
        if period > 1 {
            lags.push(period);
        }
        let w = 1.0 / lags.len() as f64;
        let edges = lags
            .into_iter()
            .map(|lag| {
                let pacf = if lag <= profile.max_lag() {
                    profile.at(lag)
                } else {
                    0.0
                };
                Edge {
                    lag,
                    pacf,
                    delta: 1.0,
                    raw_weight: w,
                    norm_weight: w,
                }
            })
            .collect();
        KnowledgeGraph {
            edges,
            threshold,
            period,
            fallback: true,
        }
    }

    /// Builds a graph from explicit `(lag, norm_weight)` pairs. The weights
    /// are renormalized to sum to one.
    pub fn from_weights(weights: &[(usize, f64)], period: usize, threshold: f64) -> Result<Self> {
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if weights.is_empty() || !(total > 0.0) {
            return Err(Error::InvalidArgument(
                "graph needs at least one lag with positive total weight".into(),
            ));
        }
        let edges = weights
            .iter()
            .map(|&(lag, w)| {
                Ok(Edge {
                    lag,
                    pacf: f64::NAN,
                    delta: delta(lag, period)?,
                    raw_weight: w,
                    norm_weight: w / total,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(KnowledgeGraph {
            edges,
            threshold,
            period,
            fallback: false,
        })
    }

    /// Restores a graph from previously computed edges, unchanged.
    pub(crate) fn from_edges(
        edges: Vec<Edge>,
        threshold: f64,
        period: usize,
        fallback: bool,
    ) -> Result<Self> {
        if edges.is_empty() || edges.iter().any(|e| e.lag == 0) {
            return Err(Error::InvalidArgument("graph edges are malformed".into()));
        }
        Ok(KnowledgeGraph {
            edges,
            threshold,
            period,
            fallback,
        })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn connected_lags(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.lag).collect()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// True when no lag passed the threshold.
    pub fn is_fallback(&self) -> bool {
        self.fallback
    }

    pub fn max_lag(&self) -> usize {
        self.edges.iter().map(|e| e.lag).max().unwrap_or(0)
    }

    pub fn weight_sum(&self) -> f64 {
        self.edges.iter().map(|e| e.norm_weight).sum()
    }

    /// One-step forecast: `Σ norm_weight(k) * history[len - k]`.
    pub fn forecast_one(&self, history: &[f64]) -> Result<f64> {
        if history.len() < self.max_lag() {
            return Err(Error::TooShort {
                needed: self.max_lag(),
                actual: history.len(),
            });
        }
        let n = history.len();
        Ok(self
            .edges
            .iter()
            .map(|e| e.norm_weight * history[n - e.lag])
            .sum())
    }

    /// `lag,pacf,delta,raw_weight,norm_weight` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,pacf,delta,raw_weight,norm_weight\n");
        for e in &self.edges {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                e.lag, e.pacf, e.delta, e.raw_weight, e.norm_weight
            );
        }
        out
    }
}

/// Recursive `h`-step forecast: each forecast is appended to the history
/// before the next step.
pub fn kds_forecast(g: &KnowledgeGraph, history: &[f64], h: usize) -> Result<Vec<f64>> {
    let mut buf = history.to_vec();
    let mut out = Vec::with_capacity(h);
    for _ in 0..h {
        let y = g.forecast_one(&buf)?;
        out.push(y);
        buf.push(y);
    }
    Ok(out)
}
