use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kenn::experiment::report::{read_csv, summarize, summary_table};
use kenn::experiment::runner::dnn_predict;
use kenn::experiment::{emit_report, load_series, load_suite, prepare, run_seed, DataSource, ExperimentConfig};
use kenn::fusion::{padded_pairs, save_kenn};
use kenn::kds::{Forecaster, Kds, KdsKind};
use kenn::metrics::MetricsReport;
use kenn::neural::{init_predictor, save_predictor, train_pairs, ArchSpec, Predictor};
use kenn::series::{load_csv, split_chronological, write_csv, SyntheticParams};
use kenn::Error;

#[derive(Parser)]
#[command(name = "kenn", version, about = "Knowledge-graph forecasting fused with small neural predictors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic traffic-like series as CSV.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4800)]
        n: usize,
        #[arg(long, default_value_t = 48)]
        period: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = 0.001)]
        trend: f64,
    },
    /// Print `lag,value` partial autocorrelations of a CSV series.
    Pacf {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        max_lag: usize,
        #[arg(long, default_value_t = 48)]
        period: usize,
    },
    /// Knowledge-system commands.
    Kds {
        #[command(subcommand)]
        command: KdsCommand,
    },
    /// Train a stand-alone network and report its test error.
    Train {
        #[arg(long, value_enum, default_value_t = Arch::Mlp)]
        arch: Arch,
        #[command(flatten)]
        common: TrainArgs,
    },
    /// Fusion commands.
    Kenn {
        #[command(subcommand)]
        command: KennCommand,
    },
    /// Suite commands.
    Suite {
        #[command(subcommand)]
        command: SuiteCommand,
    },
    /// Print the median summary of a results CSV.
    Report {
        #[arg(long)]
        results: PathBuf,
    },
}

#[derive(Subcommand)]
enum KdsCommand {
    /// Fit on the training slice and forecast the test slice one step ahead.
    Forecast {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = KindArg::Graph)]
        kind: KindArg,
        #[arg(long, default_value_t = 48)]
        period: usize,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        /// Also write the graph edges as CSV (graph kind only).
        #[arg(long)]
        dump_graph: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum KennCommand {
    /// Train the fused model and report all three test errors.
    Train {
        #[arg(long, value_enum, default_value_t = KindArg::Graph)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = Arch::Mlp)]
        arch: Arch,
        #[command(flatten)]
        common: TrainArgs,
    },
}

#[derive(Subcommand)]
enum SuiteCommand {
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// CSV series; a synthetic series is generated when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 48)]
    period: usize,
    #[arg(long, default_value_t = 48)]
    w: usize,
    #[arg(long, default_value_t = 1)]
    h: usize,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Checkpoint path for the trained model.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arch {
    Mlp,
    Tcn,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Graph,
    Naive,
    Zero,
    Sar,
}

impl KindArg {
    fn kind(self) -> KdsKind {
        match self {
            KindArg::Graph => KdsKind::graph(),
            KindArg::Naive => KdsKind::NaiveLast,
            KindArg::Zero => KdsKind::Zero,
            KindArg::Sar => KdsKind::SeasonalAr {
                p: 2,
                seasonal_diff: true,
            },
        }
    }
}

/// Errors split by exit code: 1 for usage and configuration, 2 for
/// everything that fails while running.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Generate {
            out,
            n,
            period,
            seed,
            noise_sd,
            trend,
        } => {
            let s = SyntheticParams {
                n,
                period,
                seed,
                noise_sd,
                trend,
                ..SyntheticParams::default()
            }
            .generate()?;
            write_csv(&s, &out)?;
            eprintln!("wrote {} observations to {}", s.len(), out.display());
        }
        Command::Pacf {
            input,
            max_lag,
            period,
        } => {
            let s = load_csv(&input, period)?;
            let profile = kenn::stats::pacf(&s, max_lag)?;
            println!("lag,value");
            for (lag, v) in profile.iter() {
                println!("{lag},{v}");
            }
        }
        Command::Kds {
            command:
                KdsCommand::Forecast {
                    input,
                    kind,
                    period,
                    train_fraction,
                    dump_graph,
                },
        } => kds_forecast(&input, kind.kind(), period, train_fraction, dump_graph.as_deref())?,
        Command::Train { arch, common } => {
            let cfg = train_config(&common, KdsKind::Zero, arch)?;
            let (model, report) = train_alone(&cfg, common.seed)?;
            print_metrics(&[&report]);
            if let Some(path) = &common.out {
                save_predictor(&model, path)?;
            }
        }
        Command::Kenn {
            command: KennCommand::Train { kind, arch, common },
        } => {
            let cfg = train_config(&common, kind.kind(), arch)?;
            let run = run_seed(&cfg, common.seed)?;
            print_metrics(&[&run.dnn, &run.kds, &run.kenn]);
            if let Some(path) = &common.out {
                save_kenn(&run.kenn_model, path)?;
            }
        }
        Command::Suite {
            command: SuiteCommand::Run { config, out },
        } => {
            let suite = load_suite(&config).map_err(|e| Failure::Usage(e.to_string()))?;
            let mut reports = Vec::with_capacity(suite.cases.len());
            for case in &suite.cases {
                eprintln!("running {} ({} seeds)", case.label, case.seeds.len());
                let report = kenn::experiment::run_case(case)?;
                for (seed, err) in &report.failures {
                    eprintln!("  seed {seed} failed: {err}");
                }
                reports.push(report);
            }
            let table = emit_report(&reports, &out)?;
            println!("{}", suite.name);
            print!("{table}");
            eprintln!("results written to {}", out.display());
        }
        Command::Report { results } => {
            let rows = read_csv(&results)?;
            print!("{}", summary_table(&summarize(&rows)));
        }
    }
    Ok(())
}

fn train_config(a: &TrainArgs, kds: KdsKind, arch: Arch) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig {
        label: "cli".into(),
        kds,
        w: a.w,
        h: a.h,
        seeds: vec![a.seed],
        dnn_arch: match arch {
            Arch::Mlp => ArchSpec::default(),
            Arch::Tcn => ArchSpec::tcn(),
        },
        ..ExperimentConfig::default()
    };
    if let Some(input) = &a.input {
        cfg.data = DataSource::Csv {
            path: input.clone(),
            period: a.period,
        };
    }
    if let Some(e) = a.epochs {
        cfg.train.max_epochs = e;
    }
    if let Some(lr) = a.learning_rate {
        cfg.train.learning_rate = lr;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn train_alone(cfg: &ExperimentConfig, seed: u64) -> kenn::Result<(Predictor, MetricsReport)> {
    let series = load_series(cfg, seed)?;
    let prep = prepare(cfg, &series, seed)?;
    let arch = cfg.dnn_arch.build(cfg.w + 1 + cfg.h, cfg.h)?;
    let p0 = init_predictor(&arch, seed)?;
    let mut train_cfg = cfg.train.clone();
    train_cfg.seed = train_cfg.seed.wrapping_add(seed);
    let (inputs, targets) = padded_pairs(&prep.train_set);
    let (model, outcome) = train_pairs(&p0, &inputs, &targets, &train_cfg, |_, _| {})?;
    eprintln!("trained {} epochs, final loss {:.6}", outcome.epochs(), outcome.final_loss());
    let pred = dnn_predict(&model, &prep.test_set)?;
    let report = MetricsReport::evaluate("DNN", &pred, &prep.truth)?;
    Ok((model, report))
}

fn print_metrics(reports: &[&MetricsReport]) {
    println!("model,mse,mae");
    for r in reports {
        println!("{},{},{}", r.model_name, r.mse, r.mae);
    }
}

fn kds_forecast(
    input: &Path,
    kind: KdsKind,
    period: usize,
    train_fraction: f64,
    dump_graph: Option<&Path>,
) -> Result<(), Failure> {
    let series = load_csv(input, period)?;
    let (train, test) = split_chronological(&series, train_fraction)?;
    let kds = kind.fit(&train)?;
    if let Some(path) = dump_graph {
        let Kds::Graph(g) = &kds else {
            return Err(Failure::Usage("--dump-graph needs --kind graph".into()));
        };
        fs::write(path, g.graph.to_csv()).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    }
    let values = series.values();
    let start = (test.origin() - series.origin()).max(kds.min_history());
    println!("index,truth,forecast");
    let (mut pred, mut truth) = (Vec::new(), Vec::new());
    for t in start..values.len() {
        let f = kds.forecast(&values[..t], series.origin() + t, 1)?[0];
        println!("{},{},{}", series.origin() + t, values[t], f);
        pred.push(f);
        truth.push(values[t]);
    }
    let m = MetricsReport::evaluate(kds.name(), &pred, &truth)?;
    eprintln!("{}: mse {:.6} mae {:.6} over {} points", m.model_name, m.mse, m.mae, pred.len());
    Ok(())
}
