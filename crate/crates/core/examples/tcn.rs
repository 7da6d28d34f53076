//! A temporal convolutional network on the same task, with its receptive
//! field and a gradient spot check against finite differences.

use kenn::metrics::MetricsReport;
use kenn::neural::{gradient, init_predictor, loss, predict_series, train, ArchSpec, Tcn, TrainConfig};
use kenn::series::{split_chronological, SyntheticParams};
use kenn::window::make_samples;

fn main() -> kenn::Result<()> {
    let (w, h) = (48, 1);
    let choice = ArchSpec::Tcn {
        blocks: 4,
        channels: 4,
        kernel_size: 3,
    };
    let arch = choice.build(w + 1, h)?;
    let shape = Tcn {
        input_len: w + 1,
        blocks: 4,
        channels: 4,
        kernel_size: 3,
        output_len: h,
    };
    println!("receptive field {} steps, input {} steps", shape.receptive_field(), w + 1);
    let p0 = init_predictor(&arch, 3)?;
    println!("{} parameters", p0.params.len());

    let s = SyntheticParams::default().generate()?;
    let (train_s, test_s) = split_chronological(&s, 0.8)?;
    let train_set = make_samples(&train_s, w, h)?.scaled();
    let test_set = make_samples(&test_s, w, h)?.scaled();

    let batch: Vec<_> = train_set.iter().take(8).map(|s| (s.input.clone(), s.target.clone())).collect();
    let g = gradient(&p0, &batch)?;
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for i in (0..p0.params.len()).step_by(17) {
        let mut up = p0.clone();
        up.params[i] += step;
        let mut down = p0.clone();
        down.params[i] -= step;
        let numeric = (loss(&up, &batch)? - loss(&down, &batch)?) / (2.0 * step);
        worst = worst.max((g[i] - numeric).abs() / g[i].abs().max(numeric.abs()).max(1e-6));
    }
    println!("largest relative gradient error on sampled coordinates: {worst:.2e}");

    let cfg = TrainConfig {
        max_epochs: 60,
        ..TrainConfig::default()
    };
    let (model, outcome) = train(&p0, &train_set, &cfg)?;
    let pred = predict_series(&model, &test_set)?;
    let m = MetricsReport::evaluate("TCN", &pred, &test_set.unscaled_targets())?;
    println!("{} epochs, test mse {:.3}, mae {:.3}", outcome.epochs(), m.mse, m.mae);
    Ok(())
}
