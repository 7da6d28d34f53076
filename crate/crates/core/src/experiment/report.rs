//! Result tables: a machine-diffable CSV, a median summary with one row per
//! case and one column per model, and per-observation prediction dumps.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::runner::CaseReport;
use crate::error::{Error, Result};
use crate::metrics::median;

pub const CSV_HEADER: [&str; 6] = ["case", "model", "seed", "mse", "mae", "runtime"];

/// One row of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub case: String,
    pub model: String,
    pub seed: u64,
    pub mse: f64,
    pub mae: f64,
    /// Wall-clock seconds of the replicate; the only nondeterministic column.
    pub runtime: f64,
}

pub fn result_rows(reports: &[CaseReport]) -> Vec<ResultRow> {
    let mut rows = Vec::new();
    for r in reports {
        let mut runs: Vec<_> = r.runs.iter().collect();
        runs.sort_by_key(|run| run.seed);
        for run in runs {
            for m in [&run.dnn, &run.kds, &run.kenn] {
                rows.push(ResultRow {
                    case: r.label.clone(),
                    model: m.model_name.clone(),
                    seed: run.seed,
                    mse: m.mse,
                    mae: m.mae,
                    runtime: (run.runtime_secs * 1000.0).round() / 1000.0,
                });
            }
        }
        for (seed, _) in &r.failures {
            for model in ["DNN", "KDS", "KENN"] {
                rows.push(ResultRow {
                    case: r.label.clone(),
                    model: model.into(),
                    seed: *seed,
                    mse: f64::NAN,
                    mae: f64::NAN,
                    runtime: 0.0,
                });
            }
        }
    }
    rows
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no results to report".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        row: 1,
        message: e.to_string(),
    })?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header != CSV_HEADER {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            message: format!("expected columns {}", CSV_HEADER.join(",")),
        });
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                row: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Median row per case, in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub case: String,
    pub dnn: f64,
    pub kds: f64,
    pub kenn: f64,
    pub seeds: usize,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut cases: Vec<String> = Vec::new();
    for r in rows {
        if !cases.contains(&r.case) {
            cases.push(r.case.clone());
        }
    }
    cases
        .into_iter()
        .map(|case| {
            let med = |model: &str| {
                let v: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.case == case && r.model == model && r.mse.is_finite())
                    .map(|r| r.mse)
                    .collect();
                (median(&v).unwrap_or(f64::NAN), v.len())
            };
            let (dnn, seeds) = med("DNN");
            SummaryRow {
                dnn,
                kds: med("KDS").0,
                kenn: med("KENN").0,
                seeds,
                case,
            }
        })
        .collect()
}

fn improvement(kenn: f64, other: f64) -> String {
    if other > 0.0 && other.is_finite() && kenn.is_finite() {
        format!("{:+.1}%", 100.0 * (other - kenn) / other)
    } else {
        "-".into()
    }
}

/// Fixed-width table of median test MSE per case.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let width = rows.iter().map(|r| r.case.len()).max().unwrap_or(4).max(4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>12}  {:>12}  {:>12}  {:>9}  {:>9}  {:>5}",
        "Case", "DNN", "KDS", "KENN", "vs DNN", "vs KDS", "seeds"
    );
    let _ = writeln!(out, "{}", "-".repeat(width + 72));
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>12.4}  {:>12.4}  {:>12.4}  {:>9}  {:>9}  {:>5}",
            r.case,
            r.dnn,
            r.kds,
            r.kenn,
            improvement(r.kenn, r.dnn),
            improvement(r.kenn, r.kds),
            r.seeds
        );
    }
    out
}

pub fn slug(label: &str) -> String {
    let mut s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s.trim_matches('_').to_string()
}

/// `target_index,truth,dnn,kds,kenn` for the lowest successful seed.
pub fn predictions_csv(report: &CaseReport) -> Option<String> {
    let run = report.runs.iter().min_by_key(|r| r.seed)?;
    let p = &run.predictions;
    let mut out = String::from("target_index,truth,dnn,kds,kenn\n");
    for i in 0..p.truth.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.target_index[i], p.truth[i], p.dnn[i], p.kds[i], p.kenn[i]
        );
    }
    Some(out)
}

/// Writes `results.csv`, `summary.txt` and one `predictions_<case>.csv`
/// per case into `dir`. Returns the summary table.
pub fn emit_report(reports: &[CaseReport], dir: &Path) -> Result<String> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows = result_rows(reports);
    let path = dir.join("results.csv");
    let f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_csv(f, &rows)?;

    let table = summary_table(&summarize(&rows));
    let path = dir.join("summary.txt");
    fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;

    for r in reports {
        if let Some(csv) = predictions_csv(r) {
            let path = dir.join(format!("predictions_{}.csv", slug(&r.label)));
            fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(table)
}

/// The CSV body with the runtime column blanked, for run-to-run comparison.
pub fn mask_runtime(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|l| match l.rfind(',') {
            Some(i) => &l[..i],
            None => l,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(case: &str, model: &str, seed: u64, mse: f64) -> ResultRow {
        ResultRow {
            case: case.into(),
            model: model.into(),
            seed,
            mse,
            mae: mse / 2.0,
            runtime: 1.5,
        }
    }

    #[test]
    fn csv_has_fixed_columns() {
        let rows = vec![row("a", "DNN", 1, 2.0), row("a", "KDS", 1, 3.0), row("a", "KENN", 1, 1.0)];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "case,model,seed,mse,mae,runtime");
        assert_eq!(lines.count(), 3);
        assert!(write_csv(Vec::new(), &[]).is_err());
    }

    #[test]
    fn csv_round_trips_through_reader() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let rows = vec![row("case 1", "DNN", 3, 0.1 + 0.2), row("case 1", "KENN", 3, f64::NAN)];
        write_csv(fs::File::create(&path).unwrap(), &rows).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back[0], rows[0]);
        assert!(back[1].mse.is_nan());
    }

    #[test]
    fn summary_takes_medians_per_case() {
        let rows = vec![
            row("x", "DNN", 1, 1.0),
            row("x", "DNN", 2, 5.0),
            row("x", "DNN", 3, 2.0),
            row("x", "KDS", 1, 4.0),
            row("x", "KENN", 1, 0.5),
            row("y", "DNN", 1, 9.0),
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].dnn, s[0].kds, s[0].kenn, s[0].seeds), (2.0, 4.0, 0.5, 3));
        assert!(s[1].kenn.is_nan());
        let table = summary_table(&s);
        assert!(table.contains("+75.0%"));
        assert_eq!(table.lines().count(), 4);
    }

    #[test]
    fn masking_drops_runtime() {
        assert_eq!(mask_runtime("a,b,1.5\nc,d,2.0\n"), "a,b\nc,d");
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Case 2: 10% data"), "case_2_10_data");
    }
}
