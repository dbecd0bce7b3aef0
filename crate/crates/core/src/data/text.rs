//! Sparse `label index:value` text format.
//!
//! One example per line: optional leading whitespace, a label token, then
//! whitespace-separated `index:value` pairs with 1-based, strictly ascending
//! indices. Labels are `+1`, `-1` or `1`; `0` is accepted as negative only
//! when [`ReadOptions::zero_is_negative`] is set. `#` comments are rejected.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::learner::{Label, LabeledExample};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReadOptions {
    pub zero_is_negative: bool,
}

fn err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parse one line; `line_no` is used in error messages only.
pub fn parse_line(line: &str, line_no: u64, opts: ReadOptions) -> Result<LabeledExample> {
    if line.contains('#') {
        return Err(err(line_no, "comments are not supported"));
    }
    let mut tokens = line.split_ascii_whitespace();
    let label = match tokens.next() {
        Some("+1") | Some("1") => Label::Positive,
        Some("-1") => Label::Negative,
        Some("0") if opts.zero_is_negative => Label::Negative,
        Some(other) => return Err(err(line_no, format!("invalid label '{other}'"))),
        None => return Err(err(line_no, "missing label")),
    };
    let mut features: Vec<(u64, f64)> = Vec::new();
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| err(line_no, format!("expected index:value, got '{tok}'")))?;
        let idx: u64 = idx
            .parse()
            .map_err(|_| err(line_no, format!("invalid feature index '{idx}'")))?;
        if idx == 0 {
            return Err(err(line_no, "feature indices are 1-based"));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| err(line_no, format!("invalid feature value '{val}'")))?;
        if !val.is_finite() {
            return Err(err(line_no, format!("non-finite feature value '{val}'")));
        }
        let idx = idx - 1;
        if let Some(&(prev, _)) = features.last() {
            if idx <= prev {
                return Err(err(line_no, "feature indices must be strictly ascending"));
            }
        }
        features.push((idx, val));
    }
    Ok(LabeledExample { features, label })
}

/// Streaming reader; holds one line in memory at a time.
pub struct SparseTextReader<R> {
    inner: R,
    opts: ReadOptions,
    line: String,
    line_no: u64,
    failed: bool,
}

impl<R: BufRead> SparseTextReader<R> {
    pub fn new(inner: R, opts: ReadOptions) -> Self {
        Self {
            inner,
            opts,
            line: String::new(),
            line_no: 0,
            failed: false,
        }
    }

    /// Number of lines consumed so far.
    pub fn line_number(&self) -> u64 {
        self.line_no
    }
}

impl<R: BufRead> Iterator for SparseTextReader<R> {
    type Item = Result<LabeledExample>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        self.line.clear();
        match self.inner.read_line(&mut self.line) {
            Ok(0) => None,
            Ok(_) => {
                self.line_no += 1;
                let r = parse_line(&self.line, self.line_no, self.opts);
                self.failed = r.is_err();
                Some(r)
            }
            Err(e) => {
                self.failed = true;
                Some(Err(Error::Io(e)))
            }
        }
    }
}

pub fn read_sparse_text<R: BufRead>(inner: R, opts: ReadOptions) -> SparseTextReader<R> {
    SparseTextReader::new(inner, opts)
}

/// Write one example, converting indices back to 1-based.
pub fn write_example<W: Write>(mut w: W, e: &LabeledExample) -> Result<()> {
    w.write_all(if e.label == Label::Positive { b"+1" } else { b"-1" })?;
    for &(i, v) in &e.features {
        write!(w, " {}:{}", i + 1, v)?;
    }
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_sparse_text<'a, W: Write>(mut w: W, data: impl IntoIterator<Item = &'a LabeledExample>) -> Result<()> {
    for e in data {
        write_example(&mut w, e)?;
    }
    w.flush()?;
    Ok(())
}
