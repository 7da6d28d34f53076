//! Fusion checkpoints: window geometry, the fitted knowledge system, then a
//! predictor checkpoint.
//!
//! ```text
//! kenn-model 1
//! w 48
//! h 1
//! kds graph
//! ...
//! kenn-predictor 1
//! ...
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kds::{BlockStats, Edge, GraphKds, Kds, KnowledgeGraph, SeasonalArModel, SeasonalRuleConfig, SigmaMode};
use crate::neural::checkpoint::{hex, parse_hex, parse_usizes, read_predictor_lines, Lines};
use crate::neural::write_predictor;

use super::KennModel;

const MAGIC: &str = "kenn-model 1";

fn write_kds<W: Write>(out: &mut W, kds: &Kds) -> std::io::Result<()> {
    match kds {
        Kds::Graph(g) => {
            let graph = &g.graph;
            writeln!(out, "kds graph")?;
            writeln!(out, "period {}", graph.period())?;
            writeln!(out, "threshold {}", hex(graph.threshold()))?;
            writeln!(out, "fallback {}", u8::from(graph.is_fallback()))?;
            writeln!(out, "edges {}", graph.edges().len())?;
            for e in graph.edges() {
                writeln!(
                    out,
                    "{} {} {} {} {}",
                    e.lag,
                    hex(e.pacf),
                    hex(e.delta),
                    hex(e.raw_weight),
                    hex(e.norm_weight)
                )?;
            }
            let r = &g.rule;
            let sigma = match r.sigma {
                SigmaMode::PerBlock => "per_block",
                SigmaMode::Global => "global",
            };
            writeln!(
                out,
                "rule {} {} {} {} {sigma}",
                u8::from(r.enabled),
                hex(r.k_sigma),
                r.block_hours,
                hex(r.blend)
            )?;
            writeln!(
                out,
                "blocks {} {} {}",
                g.stats.period,
                g.stats.block_len,
                g.stats.sigma.len()
            )?;
            for s in &g.stats.sigma {
                writeln!(out, "{}", hex(*s))?;
            }
        }
        Kds::NaiveLast => writeln!(out, "kds naive_last")?,
        Kds::Zero => writeln!(out, "kds zero")?,
        Kds::Noisy {
            inner,
            noise_sd,
            seed,
        } => {
            writeln!(out, "kds noisy {} {seed}", hex(*noise_sd))?;
            write_kds(out, inner)?;
        }
        Kds::SeasonalAr(m) => {
            writeln!(
                out,
                "kds seasonal_ar {} {} {} {}",
                m.period,
                u8::from(m.seasonal_diff),
                m.order(),
                u8::from(m.regularized)
            )?;
            writeln!(out, "{}", hex(m.intercept))?;
            for v in m.coefficients.iter().chain(&m.std_errors) {
                writeln!(out, "{}", hex(*v))?;
            }
        }
    }
    Ok(())
}

fn flag(s: &str) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Checkpoint(format!("bad flag `{s}`"))),
    }
}

fn read_kds<R: BufRead>(lines: &mut Lines<R>) -> Result<Kds> {
    let head = lines.expect("kds")?;
    let (kind, rest) = head
        .split_first()
        .ok_or_else(|| lines.error("missing knowledge-system kind".into()))?;
    match kind.as_str() {
        "graph" => {
            let period = lines.expect_one("period")?;
            let threshold = parse_hex(&lines.expect_one::<String>("threshold")?)?;
            let fallback = flag(&lines.expect_one::<String>("fallback")?)?;
            let n: usize = lines.expect_one("edges")?;
            let mut edges = Vec::with_capacity(n);
            for _ in 0..n {
                let l = lines.next_line()?;
                let parts: Vec<&str> = l.split_whitespace().collect();
                let [lag, pacf, delta, raw, norm] = parts.as_slice() else {
                    return Err(lines.error("edge needs five fields".into()));
                };
                edges.push(Edge {
                    lag: lag
                        .parse()
                        .map_err(|_| lines.error(format!("bad lag `{lag}`")))?,
                    pacf: parse_hex(pacf)?,
                    delta: parse_hex(delta)?,
                    raw_weight: parse_hex(raw)?,
                    norm_weight: parse_hex(norm)?,
                });
            }
            let graph = KnowledgeGraph::from_edges(edges, threshold, period, fallback)
                .map_err(|e| Error::Checkpoint(e.to_string()))?;
            let rule = lines.expect("rule")?;
            let [enabled, k_sigma, block_hours, blend, sigma] = rule.as_slice() else {
                return Err(lines.error("rule needs five fields".into()));
            };
            let rule = SeasonalRuleConfig {
                enabled: flag(enabled)?,
                k_sigma: parse_hex(k_sigma)?,
                block_hours: parse_usizes(std::slice::from_ref(block_hours))?[0],
                blend: parse_hex(blend)?,
                sigma: match sigma.as_str() {
                    "per_block" => SigmaMode::PerBlock,
                    "global" => SigmaMode::Global,
                    other => return Err(lines.error(format!("bad sigma mode `{other}`"))),
                },
            };
            let blocks = parse_usizes(&lines.expect("blocks")?)?;
            let &[bp, block_len, n_sigma] = blocks.as_slice() else {
                return Err(lines.error("blocks needs three counts".into()));
            };
            let stats = BlockStats {
                period: bp,
                block_len,
                sigma: lines.reals(n_sigma)?,
            };
            Ok(Kds::Graph(GraphKds { graph, rule, stats }))
        }
        "naive_last" => Ok(Kds::NaiveLast),
        "zero" => Ok(Kds::Zero),
        "noisy" => {
            let [sd, seed] = rest else {
                return Err(lines.error("noisy needs sd and seed".into()));
            };
            let noise_sd = parse_hex(sd)?;
            let seed = seed
                .parse()
                .map_err(|_| lines.error(format!("bad seed `{seed}`")))?;
            let inner = Box::new(read_kds(lines)?);
            Ok(Kds::Noisy {
                inner,
                noise_sd,
                seed,
            })
        }
        "seasonal_ar" => {
            let nums = parse_usizes(rest)?;
            let &[period, diff, p, regularized] = nums.as_slice() else {
                return Err(lines.error("seasonal_ar needs four fields".into()));
            };
            let intercept = lines.reals(1)?[0];
            let coefficients = lines.reals(p)?;
            let std_errors = lines.reals(p)?;
            Ok(Kds::SeasonalAr(SeasonalArModel {
                period,
                seasonal_diff: diff == 1,
                intercept,
                coefficients,
                std_errors,
                regularized: regularized == 1,
            }))
        }
        other => Err(lines.error(format!("unknown knowledge system `{other}`"))),
    }
}

pub fn write_kenn<W: Write>(out: &mut W, m: &KennModel) -> Result<()> {
    let io = |e| Error::Checkpoint(format!("write failed: {e}"));
    writeln!(out, "{MAGIC}").map_err(io)?;
    writeln!(out, "w {}", m.w).map_err(io)?;
    writeln!(out, "h {}", m.h).map_err(io)?;
    write_kds(out, &m.kds).map_err(io)?;
    write_predictor(out, &m.predictor)
}

pub fn read_kenn<R: BufRead>(reader: R) -> Result<KennModel> {
    let mut lines = Lines::new(reader);
    if lines.next_line()? != MAGIC {
        return Err(lines.error("not a fusion checkpoint".into()));
    }
    let w = lines.expect_one("w")?;
    let h = lines.expect_one("h")?;
    let kds = read_kds(&mut lines)?;
    let predictor = read_predictor_lines(&mut lines)?;
    KennModel::from_parts(predictor, kds, w, h).map_err(|e| Error::Checkpoint(e.to_string()))
}

pub fn save_kenn(m: &KennModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_kenn(&mut w, m)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_kenn(path: impl AsRef<Path>) -> Result<KennModel> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_kenn(BufReader::new(f))
}
