//! The per-seed pipeline and case aggregation.

use std::time::Instant;

use rayon::prelude::*;

use super::config::{DataSource, ExperimentConfig, KdsFit, Suite};
use crate::error::{Error, Result};
use crate::fusion::{kenn_predict, padded_pairs, scale_for_fusion, train_kenn, KennModel};
use crate::kds::{attach_kds_predictions, Forecaster, Kds, KdsKind};
use crate::metrics::{median, MetricsReport};
use crate::neural::{init_predictor, train_pairs, Predictor, TrainOutcome};
use crate::series::{load_csv, reduce_training, split_chronological, Series};
use crate::window::{make_samples, unscale_prediction, SampleSet};

/// Everything the models see, built from one series and replicate seed.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// The (possibly reduced) training slice.
    pub train: Series,
    pub test: Series,
    pub kds: Kds,
    /// Scaled training samples with knowledge forecasts attached.
    pub train_set: SampleSet,
    /// Scaled test samples with knowledge forecasts attached.
    pub test_set: SampleSet,
    /// Unscaled knowledge forecasts for the test samples.
    pub kds_test: Vec<f64>,
    /// Unscaled test targets.
    pub truth: Vec<f64>,
}

/// Per-observation test predictions of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub target_index: Vec<usize>,
    pub truth: Vec<f64>,
    pub dnn: Vec<f64>,
    pub kds: Vec<f64>,
    pub kenn: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub dnn: MetricsReport,
    pub kds: MetricsReport,
    pub kenn: MetricsReport,
    pub dnn_outcome: TrainOutcome,
    pub kenn_outcome: TrainOutcome,
    pub dnn_model: Predictor,
    pub kenn_model: KennModel,
    pub predictions: Predictions,
    pub n_train: usize,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub label: String,
    pub config: ExperimentConfig,
    pub runs: Vec<SeedRun>,
    /// Seeds whose pipeline failed, with the error message.
    pub failures: Vec<(u64, String)>,
    pub runtime_secs: f64,
}

/// Median test MSE (and MAE) of the three models across replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medians {
    pub dnn: f64,
    pub kds: f64,
    pub kenn: f64,
    pub dnn_mae: f64,
    pub kds_mae: f64,
    pub kenn_mae: f64,
}

impl CaseReport {
    pub fn medians(&self) -> Medians {
        let m = |f: &dyn Fn(&SeedRun) -> f64| {
            median(&self.runs.iter().map(f).collect::<Vec<_>>()).unwrap_or(f64::NAN)
        };
        Medians {
            dnn: m(&|r| r.dnn.mse),
            kds: m(&|r| r.kds.mse),
            kenn: m(&|r| r.kenn.mse),
            dnn_mae: m(&|r| r.dnn.mae),
            kds_mae: m(&|r| r.kds.mae),
            kenn_mae: m(&|r| r.kenn.mae),
        }
    }
}

pub fn load_series(cfg: &ExperimentConfig, seed: u64) -> Result<Series> {
    match &cfg.data {
        DataSource::Synthetic(p) => {
            let mut p = p.clone();
            p.seed = p.seed.wrapping_add(seed);
            p.generate()
        }
        DataSource::Csv { path, period } => load_csv(path, *period),
    }
}

/// The knowledge system for replicate `seed`: noise streams are offset by
/// the replicate seed so replicates see independent perturbations.
pub fn kds_for_seed(kind: &KdsKind, seed: u64) -> KdsKind {
    match kind {
        KdsKind::Noisy {
            inner,
            noise_sd,
            seed: s,
        } => KdsKind::Noisy {
            inner: inner.clone(),
            noise_sd: *noise_sd,
            seed: s.wrapping_add(seed),
        },
        other => other.clone(),
    }
}

/// Split, reduce, fit the knowledge system and build scaled sample sets with
/// walk-forward knowledge forecasts.
///
/// The networks learn only from windows inside the kept training slice. The
/// knowledge system is fitted on the slice chosen by `cfg.kds_fit`, and its
/// forecasts for training targets read that slice. A test forecast for
/// target `t` reads the whole series before `t`. Samples whose forecast
/// point has less history than the knowledge system needs are dropped.
pub fn prepare(cfg: &ExperimentConfig, series: &Series, seed: u64) -> Result<Prepared> {
    let (train_full, test) = split_chronological(series, cfg.train_fraction)?;
    let train = reduce_training(&train_full, cfg.keep_fraction, cfg.keep)?;
    let kds_source = match cfg.kds_fit {
        KdsFit::FullTrain => &train_full,
        KdsFit::Kept => &train,
    };
    let kds = kds_for_seed(&cfg.kds, seed).fit(kds_source)?;

    let mut train_raw = make_samples(&train, cfg.w, cfg.h)?;
    train_raw.retain_from(kds_source.origin() + kds.min_history());
    if train_raw.is_empty() {
        return Err(Error::TooShort {
            needed: kds.min_history() + cfg.w + 1 + cfg.h,
            actual: train.len(),
        });
    }
    attach_kds_predictions(&kds, kds_source, &mut train_raw)?;

    let mut test_raw = make_samples(&test, cfg.w, cfg.h)?;
    test_raw.retain_from(series.origin() + kds.min_history());
    let context = Series::with_origin(
        series.values()[..test.end() - series.origin()].to_vec(),
        series.period(),
        series.origin(),
    )?;
    attach_kds_predictions(&kds, &context, &mut test_raw)?;

    let kds_test = test_raw.unscaled_kds()?;
    let truth = test_raw.unscaled_targets();
    Ok(Prepared {
        train_set: scale_for_fusion(&train_raw, &kds),
        test_set: scale_for_fusion(&test_raw, &kds),
        train,
        test,
        kds,
        kds_test,
        truth,
    })
}

/// The stand-alone network's unscaled test predictions.
pub fn dnn_predict(p: &Predictor, set: &SampleSet) -> Result<Vec<f64>> {
    let (inputs, _) = padded_pairs(set);
    let mut out = Vec::with_capacity(set.len() * set.h);
    for (x, s) in inputs.iter().zip(set.iter()) {
        out.extend(unscale_prediction(&p.forward(x)?, s.scale));
    }
    Ok(out)
}

/// Runs one replicate on a given series.
pub fn run_seed_on(cfg: &ExperimentConfig, series: &Series, seed: u64) -> Result<SeedRun> {
    let start = Instant::now();
    let prep = prepare(cfg, series, seed)?;

    let arch = cfg.dnn_arch.build(cfg.w + 1 + cfg.h, cfg.h)?;
    let p0 = init_predictor(&arch, seed)?;
    let mut train_cfg = cfg.train.clone();
    train_cfg.seed = train_cfg.seed.wrapping_add(seed);

    // The stand-alone network gets zeros where the fused one gets the
    // knowledge forecast, so both share width and initial weights.
    let (inputs, targets) = padded_pairs(&prep.train_set);
    let (dnn_model, dnn_outcome) = train_pairs(&p0, &inputs, &targets, &train_cfg, |_, _| {})?;

    let m0 = KennModel::from_parts(p0, prep.kds.clone(), cfg.w, cfg.h)?;
    let (kenn_model, kenn_outcome) = train_kenn(&m0, &prep.train_set, &train_cfg)?;

    let dnn_pred = dnn_predict(&dnn_model, &prep.test_set)?;
    let kenn_pred = kenn_predict(&kenn_model, &prep.test_set)?;

    let target_index = prep
        .test_set
        .iter()
        .flat_map(|s| s.target_start..s.target_start + cfg.h)
        .collect();
    Ok(SeedRun {
        seed,
        dnn: MetricsReport::evaluate("DNN", &dnn_pred, &prep.truth)?,
        kds: MetricsReport::evaluate("KDS", &prep.kds_test, &prep.truth)?,
        kenn: MetricsReport::evaluate("KENN", &kenn_pred, &prep.truth)?,
        dnn_outcome,
        kenn_outcome,
        dnn_model,
        kenn_model,
        predictions: Predictions {
            target_index,
            truth: prep.truth,
            dnn: dnn_pred,
            kds: prep.kds_test,
            kenn: kenn_pred,
        },
        n_train: prep.train_set.len(),
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    let series = load_series(cfg, seed)?;
    run_seed_on(cfg, &series, seed)
}

/// Runs every replicate, in parallel. Fails only if all replicates fail.
pub fn run_case(cfg: &ExperimentConfig) -> Result<CaseReport> {
    cfg.validate()?;
    let start = Instant::now();
    let results: Vec<(u64, Result<SeedRun>)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| (seed, run_seed(cfg, seed)))
        .collect();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let mut last_err = None;
    for (seed, r) in results {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => {
                failures.push((seed, e.to_string()));
                last_err = Some(e);
            }
        }
    }
    if runs.is_empty() {
        return Err(last_err.expect("seeds are non-empty"));
    }
    Ok(CaseReport {
        label: cfg.label.clone(),
        config: cfg.clone(),
        runs,
        failures,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

pub fn run_suite(suite: &Suite) -> Result<Vec<CaseReport>> {
    suite.cases.iter().map(run_case).collect()
}
