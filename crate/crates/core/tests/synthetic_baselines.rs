//! Behaviour of the knowledge systems and networks on the default synthetic
//! series, measured against repeating the last observation.

use kenn::experiment::{run_seed, ExperimentConfig};
use kenn::kds::{Forecaster, Kds, KdsKind};
use kenn::metrics::mse;
use kenn::neural::{init_predictor, predict_series, train as fit_network, PredictorArch, TrainConfig};
use kenn::series::{split_chronological, SyntheticParams};
use kenn::window::make_samples;
use kenn::Series;

fn seed7() -> (Series, Series, Series) {
    let s = SyntheticParams::default().generate().unwrap();
    assert_eq!(SyntheticParams::default().seed, 7);
    let (train, test) = split_chronological(&s, 0.8).unwrap();
    (s, train, test)
}

fn test_mse(kds: &Kds, s: &Series, test: &Series) -> f64 {
    let v = s.values();
    let pred: Vec<f64> = (test.origin()..v.len())
        .map(|t| kds.forecast(&v[..t], t, 1).unwrap()[0])
        .collect();
    mse(&pred, &v[test.origin()..]).unwrap()
}

#[test]
fn graph_links_previous_step_and_previous_day() {
    let (_, train, _) = seed7();
    let Kds::Graph(g) = KdsKind::graph().fit(&train).unwrap() else {
        unreachable!()
    };
    let lags = g.graph.connected_lags();
    assert!(lags.contains(&1) && lags.contains(&48), "{lags:?}");
}

#[test]
fn knowledge_systems_beat_naive() {
    let (s, train, test) = seed7();
    let naive = test_mse(&KdsKind::NaiveLast.fit(&train).unwrap(), &s, &test);
    let graph = test_mse(&KdsKind::graph().fit(&train).unwrap(), &s, &test);
    let sar = test_mse(
        &KdsKind::SeasonalAr {
            p: 2,
            seasonal_diff: true,
        }
        .fit(&train)
        .unwrap(),
        &s,
        &test,
    );
    assert!(graph < naive, "graph {graph} naive {naive}");
    assert!(sar < naive, "sar {sar} naive {naive}");
}

#[test]
fn mlp_beats_naive() {
    let (_, train, test) = seed7();
    let train_set = make_samples(&train, 48, 1).unwrap().scaled();
    let test_set = make_samples(&test, 48, 1).unwrap().scaled();
    let p0 = init_predictor(&PredictorArch::mlp(&[49, 32, 16, 1]), 1).unwrap();
    let (model, _) = fit_network(&p0, &train_set, &TrainConfig::default()).unwrap();
    let truth = test_set.unscaled_targets();
    let pred = predict_series(&model, &test_set).unwrap();
    let naive: Vec<f64> = test_set.iter().map(|s| s.scale.invert(s.input[48])).collect();
    let (m, n) = (mse(&pred, &truth).unwrap(), mse(&naive, &truth).unwrap());
    assert!(m < n, "mlp {m} naive {n}");
}

#[test]
fn less_data_hurts_the_stand_alone_network() {
    let full = run_seed(&ExperimentConfig::default(), 1).unwrap();
    let tenth = run_seed(
        &ExperimentConfig {
            keep_fraction: 0.1,
            ..ExperimentConfig::default()
        },
        1,
    )
    .unwrap();
    assert!(tenth.dnn.mse > full.dnn.mse, "{} vs {}", tenth.dnn.mse, full.dnn.mse);
    // The knowledge system is built from the whole training slice either way.
    assert_eq!(tenth.kds.mse, full.kds.mse);
}
