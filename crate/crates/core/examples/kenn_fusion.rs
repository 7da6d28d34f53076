//! One replicate of the full pipeline: knowledge system, stand-alone
//! network and the fused model, followed by a checkpoint round trip.

use kenn::experiment::{load_series, prepare, run_seed, ExperimentConfig};
use kenn::fusion::{kenn_predict, load_kenn, save_kenn};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::default();
    let seed = 1;
    let run = run_seed(&cfg, seed)?;
    println!("{} training samples, {:.1}s", run.n_train, run.runtime_secs);
    for m in [&run.dnn, &run.kds, &run.kenn] {
        println!("{:<5} mse {:.3} mae {:.3}", m.model_name, m.mse, m.mae);
    }
    println!(
        "epochs: DNN {}, KENN {}",
        run.dnn_outcome.epochs(),
        run.kenn_outcome.epochs()
    );

    // The fused model predicts the knowledge forecast plus a learned
    // correction; show a few test points.
    let p = &run.predictions;
    println!("index   truth     KDS    KENN");
    for i in (0..p.truth.len()).step_by(p.truth.len() / 6) {
        println!("{:>5} {:7.2} {:7.2} {:7.2}", p.target_index[i], p.truth[i], p.kds[i], p.kenn[i]);
    }

    let dir = std::env::temp_dir().join("kenn_fusion_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("kenn.ckpt");
    save_kenn(&run.kenn_model, &path)?;
    let back = load_kenn(&path)?;
    let series = load_series(&cfg, seed)?;
    let prep = prepare(&cfg, &series, seed)?;
    let again = kenn_predict(&back, &prep.test_set)?;
    println!(
        "reloaded checkpoint reproduces predictions exactly: {}",
        again == run.predictions.kenn
    );
    Ok(())
}
