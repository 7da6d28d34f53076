//! Trains a stand-alone MLP on rolling windows and scores it against
//! repeating the last observation.

use kenn::metrics::MetricsReport;
use kenn::neural::{init_predictor, predict_series, train_pairs, PredictorArch, TrainConfig};
use kenn::series::{split_chronological, SyntheticParams};
use kenn::window::make_samples;

fn main() -> kenn::Result<()> {
    let (w, h) = (48, 1);
    let s = SyntheticParams::default().generate()?;
    let (train, test) = split_chronological(&s, 0.8)?;
    let train_set = make_samples(&train, w, h)?.scaled();
    let test_set = make_samples(&test, w, h)?.scaled();

    let arch = PredictorArch::mlp(&[w + 1, 32, 16, h]);
    let p0 = init_predictor(&arch, 1)?;
    let cfg = TrainConfig::default();
    let inputs: Vec<Vec<f64>> = train_set.iter().map(|s| s.input.clone()).collect();
    let targets: Vec<Vec<f64>> = train_set.iter().map(|s| s.target.clone()).collect();
    let (model, outcome) = train_pairs(&p0, &inputs, &targets, &cfg, |epoch, _| {
        if epoch % 50 == 0 {
            eprintln!("epoch {epoch}");
        }
    })?;
    println!(
        "{} parameters, {} epochs, training loss {:.3e} -> {:.3e}{}",
        model.params.len(),
        outcome.epochs(),
        outcome.loss_history[0],
        outcome.final_loss(),
        if outcome.plateaued { " (plateau)" } else { "" }
    );

    let truth = test_set.unscaled_targets();
    let pred = predict_series(&model, &test_set)?;
    let naive: Vec<f64> = test_set.iter().map(|s| s.scale.invert(s.input[w])).collect();
    for m in [
        MetricsReport::evaluate("MLP", &pred, &truth)?,
        MetricsReport::evaluate("naive", &naive, &truth)?,
    ] {
        println!("{:<6} mse {:.3} mae {:.3}", m.model_name, m.mse, m.mae);
    }
    Ok(())
}
