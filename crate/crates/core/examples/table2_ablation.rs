//! Swaps the knowledge system for a seasonal AR model, then the MLP for a
//! TCN, and checks the fused model still beats both parts.
//!
//! cargo run --release --example table2_ablation -- [out_dir] [seeds]

use std::path::PathBuf;

use kenn::experiment::{emit_report, load_suite, run_case};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "results/table2".into()));
    let seeds: Option<u64> = args.next().map(|s| s.parse()).transpose()?;

    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/table2_analog.toml");
    let mut suite = load_suite(&path)?;
    if let Some(n) = seeds {
        for case in &mut suite.cases {
            case.seeds = (1..=n).collect();
        }
    }
    let mut reports = Vec::new();
    for case in &suite.cases {
        let r = run_case(case)?;
        let m = r.medians();
        let verdict = if m.kenn < m.dnn && m.kenn < m.kds { "ahead of both" } else { "not ahead of both" };
        eprintln!("{:<24} {:6.1}s  KENN {verdict}", case.label, r.runtime_secs);
        reports.push(r);
    }
    print!("{}", emit_report(&reports, &out)?);
    Ok(())
}
