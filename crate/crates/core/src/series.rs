//! Univariate series: construction, CSV ingestion, synthetic traffic-like
//! data and chronological slicing.

use std::f64::consts::PI;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observations per day for 30-minute bins.
pub const DEFAULT_PERIOD: usize = 48;

/// An ordered, finite, univariate series.
///
/// `origin` is the absolute index of `values[0]` in the series it was sliced
/// from. It keeps clock-time phase (`index % period`) stable across splits.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    period: usize,
    origin: usize,
}

impl Series {
    pub fn new(values: Vec<f64>, period: usize) -> Result<Self> {
        Self::with_origin(values, period, 0)
    }

    pub fn with_origin(values: Vec<f64>, period: usize, origin: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidSeries("period must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidSeries("series is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "value at index {i} is not finite"
            )));
        }
        Ok(Series {
            values,
            period,
            origin,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Absolute index one past the last observation.
    pub fn end(&self) -> usize {
        self.origin + self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Applies `a * x + b` to every value.
    pub fn affine(&self, a: f64, b: f64) -> Result<Series> {
        Series::with_origin(
            self.values.iter().map(|v| a * v + b).collect(),
            self.period,
            self.origin,
        )
    }

    /// Appends a chronologically adjacent series.
    pub fn concat(&self, next: &Series) -> Result<Series> {
        if next.origin != self.end() {
            return Err(Error::InvalidArgument(format!(
                "series are not adjacent: first ends at {}, second starts at {}",
                self.end(),
                next.origin
            )));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&next.values);
        Series::with_origin(values, self.period, self.origin)
    }
}

/// Reads a series from a CSV file with a `value` column and an optional
/// `timestamp` column. Only row order is used.
pub fn load_csv(path: impl AsRef<Path>, period: usize) -> Result<Series> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path, period)
}

pub(crate) fn read_csv<R: std::io::Read>(reader: R, path: &Path, period: usize) -> Result<Series> {
    let parse_err = |row: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "value")
        .ok_or_else(|| parse_err(1, "missing `value` column in header".into()))?;

    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // Row numbers are 1-based and count the header.
        let row = i + 2;
        let record = record.map_err(|e| parse_err(row, e.to_string()))?;
        let cell = record
            .get(col)
            .ok_or_else(|| parse_err(row, "missing value cell".into()))?;
        let v: f64 = cell
            .parse()
            .map_err(|_| parse_err(row, format!("non-numeric value {cell:?}")))?;
        if !v.is_finite() {
            return Err(parse_err(row, format!("non-finite value {cell:?}")));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(parse_err(1, "file contains no observations".into()));
    }
    Series::new(values, period)
}

/// Writes `index,value` rows.
pub fn write_csv(series: &Series, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut wtr = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let io = |e: csv::Error| Error::io(path, e.into());
    wtr.write_record(["index", "value"]).map_err(io)?;
    for (i, v) in series.values().iter().enumerate() {
        wtr.write_record([(series.origin() + i).to_string(), v.to_string()])
            .map_err(io)?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

/// Shape of the synthetic traffic-like generator.
///
/// The series is a daily profile (a sinusoid plus morning and evening rush
/// peaks), a day-of-week offset, an autoregressive deviation and a linear
/// trend, clipped at zero. The deviation regresses on the previous step and
/// on the same clock time one period earlier. All stochastic parts, the
/// day-of-week offsets included, scale with `noise_sd`, so a zero-noise
/// series is exactly periodic in `period`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticParams {
    pub n: usize,
    pub period: usize,
    pub seed: u64,
    pub noise_sd: f64,
    pub trend: f64,
    pub level: f64,
    pub daily_amplitude: f64,
    pub rush_amplitude: f64,
    /// Standard deviation of the day-of-week offsets, in units of `noise_sd`.
    pub weekly_scale: f64,
    /// Lag-1 coefficient of the deviation.
    pub ar_coef: f64,
    /// Coefficient on the deviation one period earlier. Together with
    /// `ar_coef` it must keep `|ar_coef| + |day_carryover| < 1`.
    pub day_carryover: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            n: 4800,
            period: DEFAULT_PERIOD,
            seed: 7,
            noise_sd: 2.0,
            trend: 0.001,
            level: 50.0,
            daily_amplitude: 10.0,
            rush_amplitude: 10.0,
            weekly_scale: 0.5,
            ar_coef: 0.3,
            day_carryover: 0.45,
        }
    }
}

/// Deterministic synthetic series with the default shape parameters.
pub fn generate_synthetic(
    n: usize,
    period: usize,
    seed: u64,
    noise_sd: f64,
    trend: f64,
) -> Result<Series> {
    SyntheticParams {
        n,
        period,
        seed,
        noise_sd,
        trend,
        ..SyntheticParams::default()
    }
    .generate()
}

impl SyntheticParams {
    pub fn generate(&self) -> Result<Series> {
        let period = self.period;
        if period == 0 {
            return Err(Error::InvalidArgument("period must be at least 1".into()));
        }
        if self.n < 2 * period {
            return Err(Error::TooShort {
                needed: 2 * period,
                actual: self.n,
            });
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::InvalidArgument("noise_sd must be non-negative".into()));
        }
        if !(self.ar_coef.abs() + self.day_carryover.abs() < 1.0) {
            return Err(Error::InvalidArgument(
                "|ar_coef| + |day_carryover| must stay below 1".into(),
            ));
        }

        let p = period as f64;
        let bump = |phase: f64, center: f64| {
            let width = p / 24.0;
            (-0.5 * ((phase - center) / width).powi(2)).exp()
        };
        let profile: Vec<f64> = (0..period)
            .map(|tau| {
                let phase = tau as f64;
                let theta = 2.0 * PI * phase / p;
                self.level - self.daily_amplitude * theta.cos()
                    + self.rush_amplitude * bump(phase, p / 3.0)
                    + 0.8 * self.rush_amplitude * bump(phase, 0.72 * p)
            })
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };

        let weekly: Vec<f64> = (0..7)
            .map(|_| self.weekly_scale * self.noise_sd * normal())
            .collect();
        let mut dev = vec![0.0; self.n];
        let mut values = Vec::with_capacity(self.n);
        for t in 0..self.n {
            let prev = if t >= 1 { dev[t - 1] } else { 0.0 };
            let day = if t >= period { dev[t - period] } else { 0.0 };
            dev[t] = self.ar_coef * prev + self.day_carryover * day + self.noise_sd * normal();
            let v = profile[t % period] + weekly[(t / period) % 7] + dev[t] + self.trend * t as f64;
            values.push(v.max(0.0));
        }
        Series::new(values, period)
    }
}

/// Splits into `(train, test)`: the first `floor(n * train_fraction)` values
/// train, the rest test. No shuffling.
pub fn split_chronological(s: &Series, train_fraction: f64) -> Result<(Series, Series)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let cut = (s.len() as f64 * train_fraction).floor() as usize;
    if cut == 0 || cut == s.len() {
        return Err(Error::InvalidArgument(format!(
            "split of {} values at {train_fraction} leaves one side empty",
            s.len()
        )));
    }
    let (a, b) = s.values().split_at(cut);
    Ok((
        Series::with_origin(a.to_vec(), s.period(), s.origin())?,
        Series::with_origin(b.to_vec(), s.period(), s.origin() + cut)?,
    ))
}

/// Which end of the training slice survives a reduction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeepMode {
    /// The most recent observations.
    #[default]
    Last,
    First,
}

/// Keeps `floor(n * keep_fraction)` observations of the training slice.
pub fn reduce_training(s: &Series, keep_fraction: f64, mode: KeepMode) -> Result<Series> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "keep_fraction must lie in (0, 1], got {keep_fraction}"
        )));
    }
    let keep = (s.len() as f64 * keep_fraction).floor() as usize;
    if keep < 2 * s.period() {
        return Err(Error::TooShort {
            needed: 2 * s.period(),
            actual: keep,
        });
    }
    let start = match mode {
        KeepMode::Last => s.len() - keep,
        KeepMode::First => 0,
    };
    Series::with_origin(
        s.values()[start..start + keep].to_vec(),
        s.period(),
        s.origin() + start,
    )
}
