//! Builds the lag graph from training data, prints its edges and compares
//! the graph forecaster with and without the seasonal rule.

use kenn::kds::{Forecaster, Kds, KdsKind, RuleDiagnostics, SeasonalRuleConfig};
use kenn::metrics::mse;
use kenn::series::{split_chronological, SyntheticParams};

fn main() -> kenn::Result<()> {
    let s = SyntheticParams::default().generate()?;
    let (train, test) = split_chronological(&s, 0.8)?;

    let kds = KdsKind::graph().fit(&train)?;
    let Kds::Graph(g) = &kds else { unreachable!() };
    println!("lag   pacf   delta  weight");
    for e in g.graph.edges() {
        println!("{:>3} {:+.3} {:.4} {:.4}", e.lag, e.pacf, e.delta, e.norm_weight);
    }
    println!("weights sum to {:.15}", g.graph.weight_sum());

    let plain = KdsKind::Graph {
        threshold: 0.2,
        max_lag: None,
        abs_threshold: false,
        rule: SeasonalRuleConfig::disabled(),
    }
    .fit(&train)?;

    let v = s.values();
    let start = test.origin();
    let truth = &v[start..];
    let mut diag = RuleDiagnostics::default();
    let mut with_rule = Vec::new();
    for t in start..v.len() {
        let (f, d) = g.forecast_with_diagnostics(&v[..t], t, 1)?;
        with_rule.push(f[0]);
        diag += d;
    }
    let without: Vec<f64> = (start..v.len())
        .map(|t| plain.forecast(&v[..t], t, 1).map(|f| f[0]))
        .collect::<kenn::Result<_>>()?;
    println!("test MSE with rule {:.3}, without {:.3}", mse(&with_rule, truth)?, mse(&without, truth)?);
    println!("rule fired {} times, kept {}, skipped {}", diag.fired, diag.kept, diag.skipped);
    Ok(())
}
