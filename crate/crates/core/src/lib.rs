//! Knowledge-enhanced residual forecasting.
//!
//! A knowledge-driven forecaster (a partial-autocorrelation lag graph plus a
//! seasonal rule) produces a forecast for every rolling window. A small
//! neural network receives that forecast next to the window and learns only
//! the forecaster's error; the final prediction is the sum of the two.
//!
//! Modules, bottom-up:
//!
//! - [`series`], [`window`], [`metrics`]: data handling and scoring
//! - [`stats`]: autocovariance and partial autocorrelation
//! - [`kds`]: knowledge-driven forecasters and their shared contract
//! - [`neural`]: MLP and TCN predictors with hand-written backpropagation
//! - [`fusion`]: the residual fusion model
//! - [`experiment`]: config-driven case runner and reports

pub mod error;
pub mod experiment;
pub mod fusion;
pub mod kds;
pub mod metrics;
pub mod neural;
pub mod series;
pub mod stats;
pub mod window;

pub use error::{Error, Result};
pub use series::Series;
