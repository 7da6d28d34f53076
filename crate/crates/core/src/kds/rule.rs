//! Seasonal mean-matching rule.
//!
//! A graph forecast for time `t` is compared with the mean of the same
//! clock-time block on the previous day. When the two are within `k_sigma`
//! standard deviations of that block, the forecast is pulled onto the mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Series;

/// Which spread the rule compares against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// Standard deviation of each block's daily mean across training days.
    #[default]
    PerBlock,
    /// Standard deviation of all training observations.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeasonalRuleConfig {
    pub enabled: bool,
    pub k_sigma: f64,
    /// Block length in hours of a 24-hour day.
    pub block_hours: usize,
    /// 1 replaces the forecast by the block mean; smaller values move it
    /// part of the way.
    pub blend: f64,
    pub sigma: SigmaMode,
}

impl Default for SeasonalRuleConfig {
    fn default() -> Self {
        SeasonalRuleConfig {
            enabled: true,
            k_sigma: 0.7,
            block_hours: 2,
            blend: 1.0,
            sigma: SigmaMode::PerBlock,
        }
    }
}

impl SeasonalRuleConfig {
    pub fn disabled() -> Self {
        SeasonalRuleConfig {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_sigma > 0.0) {
            return Err(Error::Config("rule.k_sigma must be positive".into()));
        }
        if self.block_hours == 0 {
            return Err(Error::Config("rule.block_hours must be at least 1".into()));
        }
        if !(self.blend > 0.0 && self.blend <= 1.0) {
            return Err(Error::Config("rule.blend must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Observations per block: 4 for 2-hour blocks of a 48-step day.
    pub fn block_len(&self, period: usize) -> usize {
        ((self.block_hours * period) as f64 / 24.0).round().max(1.0) as usize
    }
}

/// Per-block spread learned from the training slice.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    pub period: usize,
    pub block_len: usize,
    /// Indexed by block position within the day.
    pub sigma: Vec<f64>,
}

impl BlockStats {
    pub fn fit(train: &Series, cfg: &SeasonalRuleConfig) -> Result<Self> {
        cfg.validate()?;
        let period = train.period();
        let block_len = cfg.block_len(period).min(period);
        let n_blocks = period.div_ceil(block_len);

        let sigma = match cfg.sigma {
            SigmaMode::Global => vec![std_dev(train.values()); n_blocks],
            SigmaMode::PerBlock => {
                let mut means: Vec<Vec<f64>> = vec![Vec::new(); n_blocks];
                let first_day = train.origin().div_ceil(period);
                let last_day = train.end() / period;
                for day in first_day..last_day {
                    for (b, slot) in means.iter_mut().enumerate() {
                        let lo = day * period + b * block_len;
                        let hi = (lo + block_len).min((day + 1) * period);
                        let vals = &train.values()[lo - train.origin()..hi - train.origin()];
                        slot.push(vals.iter().sum::<f64>() / vals.len() as f64);
                    }
                }
                means.iter().map(|m| std_dev(m)).collect()
            }
        };
        Ok(BlockStats {
            period,
            block_len,
            sigma,
        })
    }

    pub fn block_of(&self, index: usize) -> usize {
        (index % self.period) / self.block_len
    }
}

/// Sample standard deviation; zero for fewer than two values.
fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Counts of how the rule behaved over a forecast.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RuleDiagnostics {
    pub fired: usize,
    pub kept: usize,
    /// Steps where the previous-day block was not fully observed.
    pub skipped: usize,
}

impl std::ops::AddAssign for RuleDiagnostics {
    fn add_assign(&mut self, rhs: Self) {
        self.fired += rhs.fired;
        self.kept += rhs.kept;
        self.skipped += rhs.skipped;
    }
}

/// Previous-day block mean for the target at absolute index `target`, read
/// from `history` whose last element sits at `history_end - 1`. `None` if
/// any needed observation is outside the history.
pub fn previous_block_mean(
    history: &[f64],
    history_end: usize,
    target: usize,
    stats: &BlockStats,
) -> Option<f64> {
    let period = stats.period;
    let day_start = target - target % period;
    let prev_day = day_start.checked_sub(period)?;
    let lo = prev_day + stats.block_of(target) * stats.block_len;
    let hi = (lo + stats.block_len).min(day_start);
    let history_start = history_end.checked_sub(history.len())?;
    if lo < history_start || hi > history_end {
        return None;
    }
    let vals = &history[lo - history_start..hi - history_start];
    Some(vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Replaces `pred` with `mean` when `|pred - mean| <= k_sigma * sigma`.
pub fn match_mean(pred: f64, mean: f64, sigma: f64, cfg: &SeasonalRuleConfig) -> (f64, bool) {
    if (pred - mean).abs() <= cfg.k_sigma * sigma {
        (pred + cfg.blend * (mean - pred), true)
    } else {
        (pred, false)
    }
}

/// Applies the rule to an `h`-step forecast whose first step is the
/// absolute index `target_start`; `history` ends right before it.
pub fn apply_seasonal_rule(
    pred: &[f64],
    history: &[f64],
    cfg: &SeasonalRuleConfig,
    stats: &BlockStats,
    target_start: usize,
) -> (Vec<f64>, RuleDiagnostics) {
    let mut diag = RuleDiagnostics::default();
    if !cfg.enabled {
        return (pred.to_vec(), diag);
    }
    let out = pred
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let t = target_start + i;
            match previous_block_mean(history, target_start, t, stats) {
                None => {
                    diag.skipped += 1;
                    p
                }
                Some(m) => {
                    let (v, fired) = match_mean(p, m, stats.sigma[stats.block_of(t)], cfg);
                    if fired {
                        diag.fired += 1;
                    } else {
                        diag.kept += 1;
                    }
                    v
                }
            }
        })
        .collect();
    (out, diag)
}
