//! Config-driven experiment harness: each case splits a series, fits a
//! knowledge system, trains a stand-alone network and a fused one, and
//! scores all three on the untouched test slice.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{load_suite, parse_suite, DataSource, ExperimentConfig, KdsFit, Suite};
pub use report::{emit_report, result_rows, summarize, summary_table, write_csv, ResultRow};
pub use runner::{
    kds_for_seed, load_series, prepare, run_case, run_seed, run_seed_on, run_suite, CaseReport,
    Medians, Predictions, Prepared, SeedRun,
};
