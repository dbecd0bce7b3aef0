use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::example::Label;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Hinge,
    Logistic,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Hinge => "hinge",
            LossKind::Logistic => "logistic",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hinge" | "svm" => Ok(LossKind::Hinge),
            "logistic" | "logreg" => Ok(LossKind::Logistic),
            other => Err(Error::invalid(format!("unknown loss '{other}' (hinge|logistic)"))),
        }
    }
}

/// Weights of a linear classifier without intercept, plus the settings it was trained with.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
    c: f64,
    loss: LossKind,
    seed: u64,
}

const MODEL_MAGIC: &str = "hashlearn-model v1";

impl LinearModel {
    pub fn new(weights: Vec<f64>, c: f64, loss: LossKind, seed: u64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("C must be positive and finite, got {c}")));
        }
        if weights.is_empty() {
            return Err(Error::invalid("model dimension must be at least 1"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("weights must be finite"));
        }
        Ok(Self { weights, c, loss, seed })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn loss(&self) -> LossKind {
        self.loss
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `w^T x`; features beyond the model dimension contribute nothing.
    pub fn score(&self, features: &[(u64, f64)]) -> f64 {
        features
            .iter()
            .filter_map(|&(i, v)| self.weights.get(i as usize).map(|w| w * v))
            .sum()
    }

    /// `sign(w^T x)`, with an exact zero going to the positive class.
    pub fn predict(&self, features: &[(u64, f64)]) -> Label {
        if self.score(features) >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    /// Text form: a four-line header and one weight per line.
    /// Weights use the shortest decimal that reads back to the same `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{MODEL_MAGIC}")?;
        writeln!(w, "dim {}", self.weights.len())?;
        writeln!(w, "c {}", self.c)?;
        writeln!(w, "loss {}", self.loss)?;
        writeln!(w, "seed {}", self.seed)?;
        for x in &self.weights {
            writeln!(w, "{x}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate().map(|(i, l)| (i as u64 + 1, l));
        let mut next = |what: &str| -> Result<(u64, String)> {
            match lines.next() {
                Some((n, Ok(l))) => Ok((n, l)),
                Some((_, Err(e))) => Err(Error::Io(e)),
                None => Err(Error::format(format!("model file ends before {what}"))),
            }
        };
        let (n, magic) = next("header")?;
        if magic.trim_end() != MODEL_MAGIC {
            return Err(Error::Parse {
                line: n,
                message: "not a hashlearn model file".into(),
            });
        }
        let field = |line: (u64, String), key: &str| -> Result<(u64, String)> {
            let (n, l) = line;
            match l.trim_end().split_once(' ') {
                Some((k, v)) if k == key => Ok((n, v.to_string())),
                _ => Err(Error::Parse {
                    line: n,
                    message: format!("expected '{key} <value>'"),
                }),
            }
        };
        let bad = |n: u64, what: &str| Error::Parse {
            line: n,
            message: format!("invalid {what}"),
        };
        let (n, v) = field(next("dim")?, "dim")?;
        let dim: usize = v.parse().map_err(|_| bad(n, "dim"))?;
        let (n, v) = field(next("c")?, "c")?;
        let c: f64 = v.parse().map_err(|_| bad(n, "C"))?;
        let (n, v) = field(next("loss")?, "loss")?;
        let loss: LossKind = v.parse().map_err(|_| bad(n, "loss"))?;
        let (n, v) = field(next("seed")?, "seed")?;
        let seed: u64 = v.parse().map_err(|_| bad(n, "seed"))?;
        let mut weights = Vec::new();
        for (n, l) in lines {
            let l = l?;
            if weights.len() == dim {
                return Err(Error::Parse {
                    line: n,
                    message: format!("more than {dim} weights"),
                });
            }
            weights.push(l.trim_end().parse::<f64>().map_err(|_| bad(n, "weight"))?);
        }
        if weights.len() != dim {
            return Err(Error::format(format!(
                "expected {dim} weights, found {}",
                weights.len()
            )));
        }
        LinearModel::new(weights, c, loss, seed)
    }
}
