//! Line-oriented text checkpoints. Reals are stored as the hex bit pattern
//! of the f64 so a round trip is bit-exact.
//!
//! ```text
//! kenn-predictor 1
//! arch mlp 4 8 1
//! seed 5
//! params 49
//! 3fd5c28f5c28f5c3
//! ...
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Predictor, PredictorArch};
use crate::error::{Error, Result};

const MAGIC: &str = "kenn-predictor 1";

pub(crate) fn hex(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

pub(crate) fn parse_hex(s: &str) -> Result<f64> {
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|_| Error::Checkpoint(format!("bad real `{s}`")))
}

/// Sequential reader over the non-empty lines of a checkpoint.
pub(crate) struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    pub(crate) fn new(reader: R) -> Self {
        Lines {
            inner: reader.lines(),
            line: 0,
        }
    }

    pub(crate) fn next_line(&mut self) -> Result<String> {
        loop {
            self.line += 1;
            match self.inner.next() {
                None => return Err(Error::Checkpoint("unexpected end of file".into())),
                Some(Err(e)) => return Err(Error::Checkpoint(e.to_string())),
                Some(Ok(l)) if l.trim().is_empty() => continue,
                Some(Ok(l)) => return Ok(l.trim().to_string()),
            }
        }
    }

    /// Next line split on whitespace, required to start with `key`.
    pub(crate) fn expect(&mut self, key: &str) -> Result<Vec<String>> {
        let l = self.next_line()?;
        let mut parts = l.split_whitespace().map(str::to_string);
        match parts.next() {
            Some(k) if k == key => Ok(parts.collect()),
            _ => Err(self.error(format!("expected `{key}`, found `{l}`"))),
        }
    }

    pub(crate) fn expect_one<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.expect(key)?;
        match v.as_slice() {
            [x] => x.parse().map_err(|_| self.error(format!("bad value for `{key}`"))),
            _ => Err(self.error(format!("`{key}` takes one value"))),
        }
    }

    pub(crate) fn reals(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| parse_hex(&self.next_line()?)).collect()
    }

    pub(crate) fn error(&self, msg: String) -> Error {
        Error::Checkpoint(format!("line {}: {msg}", self.line))
    }
}

pub(crate) fn parse_usizes(v: &[String]) -> Result<Vec<usize>> {
    v.iter()
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Checkpoint(format!("bad count `{s}`")))
        })
        .collect()
}

pub fn write_predictor<W: Write>(out: &mut W, p: &Predictor) -> Result<()> {
    let io = |e| Error::Checkpoint(format!("write failed: {e}"));
    writeln!(out, "{MAGIC}").map_err(io)?;
    match &p.arch {
        PredictorArch::Mlp { widths } => {
            let w: Vec<String> = widths.iter().map(ToString::to_string).collect();
            writeln!(out, "arch mlp {}", w.join(" ")).map_err(io)?;
        }
        PredictorArch::Tcn {
            input_len,
            blocks,
            channels,
            kernel_size,
            output_len,
        } => {
            writeln!(
                out,
                "arch tcn {input_len} {blocks} {channels} {kernel_size} {output_len}"
            )
            .map_err(io)?;
        }
    }
    writeln!(out, "seed {}", p.seed).map_err(io)?;
    writeln!(out, "params {}", p.params.len()).map_err(io)?;
    for v in &p.params {
        writeln!(out, "{}", hex(*v)).map_err(io)?;
    }
    Ok(())
}

pub(crate) fn read_predictor_lines<R: BufRead>(lines: &mut Lines<R>) -> Result<Predictor> {
    if lines.next_line()? != MAGIC {
        return Err(lines.error("not a predictor checkpoint".into()));
    }
    let arch = lines.expect("arch")?;
    let arch = match arch.split_first() {
        Some((kind, rest)) if kind == "mlp" => PredictorArch::Mlp {
            widths: parse_usizes(rest)?,
        },
        Some((kind, rest)) if kind == "tcn" => match parse_usizes(rest)?.as_slice() {
            &[input_len, blocks, channels, kernel_size, output_len] => PredictorArch::Tcn {
                input_len,
                blocks,
                channels,
                kernel_size,
                output_len,
            },
            _ => return Err(lines.error("tcn takes five sizes".into())),
        },
        _ => return Err(lines.error("unknown architecture".into())),
    };
    let seed = lines.expect_one("seed")?;
    let n: usize = lines.expect_one("params")?;
    let params = lines.reals(n)?;
    Predictor::from_params(arch, params, seed).map_err(|e| Error::Checkpoint(e.to_string()))
}

pub fn read_predictor<R: BufRead>(reader: R) -> Result<Predictor> {
    read_predictor_lines(&mut Lines::new(reader))
}

pub fn save_predictor(p: &Predictor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_predictor(&mut w, p)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_predictor(path: impl AsRef<Path>) -> Result<Predictor> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_predictor(BufReader::new(f))
}
