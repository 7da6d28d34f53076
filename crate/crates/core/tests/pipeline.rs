mod common;

use common::{poisoned, small_config};
use kenn::experiment::report::mask_runtime;
use kenn::experiment::{emit_report, prepare, run_case, run_seed_on, ExperimentConfig, KdsFit};
use kenn::kds::KdsKind;
use kenn::Series;

#[test]
fn test_slice_never_reaches_fitting_or_training() {
    for kds in [
        KdsKind::graph(),
        KdsKind::SeasonalAr {
            p: 2,
            seasonal_diff: true,
        },
    ] {
        let cfg = ExperimentConfig {
            kds,
            ..small_config()
        };
        let s = kenn::experiment::load_series(&cfg, 1).unwrap();
        let bad = poisoned(&s, &cfg);

        let a = prepare(&cfg, &s, 1).unwrap();
        let b = prepare(&cfg, &bad, 1).unwrap();
        assert_eq!(a.kds, b.kds);
        assert_eq!(a.train, b.train);
        assert_eq!(a.train_set, b.train_set);

        let ra = run_seed_on(&cfg, &s, 1).unwrap();
        let rb = run_seed_on(&cfg, &bad, 1).unwrap();
        assert_eq!(ra.dnn_model, rb.dnn_model);
        assert_eq!(ra.kenn_model, rb.kenn_model);
        assert_eq!(ra.dnn_outcome, rb.dnn_outcome);
        assert_eq!(ra.kenn_outcome, rb.kenn_outcome);
        // The poison does reach evaluation.
        assert_ne!(ra.predictions.truth, rb.predictions.truth);
    }
}

#[test]
fn reduced_training_ignores_dropped_prefix() {
    let cfg = ExperimentConfig {
        keep_fraction: 0.5,
        kds_fit: KdsFit::Kept,
        ..small_config()
    };
    let s = kenn::experiment::load_series(&cfg, 1).unwrap();
    let mut v = s.values().to_vec();
    // The first quarter of the series lies outside the kept training half.
    for x in &mut v[..s.len() / 4] {
        *x = -1e6;
    }
    let bad = Series::with_origin(v, s.period(), s.origin()).unwrap();
    let a = prepare(&cfg, &s, 1).unwrap();
    let b = prepare(&cfg, &bad, 1).unwrap();
    assert_eq!(a.kds, b.kds);
    assert_eq!(a.train_set, b.train_set);
}

#[test]
fn reduction_leaves_knowledge_system_untouched_by_default() {
    let full = small_config();
    let reduced = ExperimentConfig {
        keep_fraction: 0.5,
        ..small_config()
    };
    let s = kenn::experiment::load_series(&full, 1).unwrap();
    let a = prepare(&full, &s, 1).unwrap();
    let b = prepare(&reduced, &s, 1).unwrap();
    assert_eq!(a.kds, b.kds);
    assert_eq!(a.kds_test, b.kds_test);
    assert!(b.train_set.len() < a.train_set.len());
    for sample in b.train_set.iter() {
        assert!(sample.target_start - reduced.w - 1 >= b.train.origin());
        assert!(sample.target_start + reduced.h <= b.train.end());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = small_config();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut bodies = Vec::new();
    for d in &dirs {
        let report = run_case(&cfg).unwrap();
        emit_report(&[report], d.path()).unwrap();
        let csv = std::fs::read_to_string(d.path().join("results.csv")).unwrap();
        let summary = std::fs::read_to_string(d.path().join("summary.txt")).unwrap();
        let preds = std::fs::read_to_string(d.path().join("predictions_case.csv")).unwrap();
        bodies.push((mask_runtime(&csv), summary, preds));
    }
    assert_eq!(bodies[0], bodies[1]);
    assert_eq!(bodies[0].0.lines().count(), 1 + 2 * 3);
}

#[test]
fn zero_kds_case_matches_stand_alone_network() {
    let cfg = ExperimentConfig {
        kds: KdsKind::Zero,
        ..small_config()
    };
    let report = run_case(&cfg).unwrap();
    for run in &report.runs {
        assert_eq!(run.dnn.mse.to_bits(), run.kenn.mse.to_bits());
        assert_eq!(run.dnn_model.params, run.kenn_model.predictor.params);
    }
}
