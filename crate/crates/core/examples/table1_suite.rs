//! Runs the bundled seven-case suite and writes its reports.
//!
//! cargo run --release --example table1_suite -- [out_dir] [seeds]
//!
//! `seeds` is a replicate count; fewer seeds give a faster, noisier table.

use std::path::PathBuf;

use kenn::experiment::{emit_report, load_suite, run_case};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "results/table1".into()));
    let seeds: Option<u64> = args.next().map(|s| s.parse()).transpose()?;

    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/table1_analog.toml");
    let mut suite = load_suite(&path)?;
    if let Some(n) = seeds {
        for case in &mut suite.cases {
            case.seeds = (1..=n).collect();
        }
    }
    let mut reports = Vec::new();
    for case in &suite.cases {
        let r = run_case(case)?;
        eprintln!("{:<32} {:6.1}s", case.label, r.runtime_secs);
        reports.push(r);
    }
    print!("{}", emit_report(&reports, &out)?);
    eprintln!("reports in {}", out.display());
    Ok(())
}
