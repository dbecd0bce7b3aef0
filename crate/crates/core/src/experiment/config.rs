use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::SynthSpec;
use crate::error::{Error, Result};
use crate::learner::LossKind;
use crate::sketch::MAX_BITS;

/// How examples are turned into features before training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// b-bit minwise hashing, one-hot expanded.
    Bbit,
    /// Sign-hashed buckets.
    Vw,
    /// Dense random projection with `s = 1`.
    Rp,
    /// The original features, unhashed.
    Raw,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Bbit => "bbit",
            Method::Vw => "vw",
            Method::Rp => "rp",
            Method::Raw => "raw",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bbit" => Ok(Method::Bbit),
            "vw" => Ok(Method::Vw),
            "rp" => Ok(Method::Rp),
            "raw" => Ok(Method::Raw),
            other => Err(Error::invalid(format!("unknown method '{other}' (bbit|vw|rp|raw)"))),
        }
    }
}

/// The grid and data for a train/evaluate or storage-comparison run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Sparse text dataset; when absent `synthetic` is used.
    pub data: Option<PathBuf>,
    pub synthetic: Option<SynthSpec>,
    pub k: Vec<usize>,
    pub b: Vec<u8>,
    pub c: Vec<f64>,
    pub method: Method,
    pub loss: LossKind,
    pub trials: usize,
    pub seed: u64,
    /// Fraction of examples used for training.
    pub split: f64,
    pub epochs: usize,
    pub tolerance: f64,
    pub zero_is_negative: bool,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: None,
            synthetic: None,
            k: vec![200],
            b: vec![8],
            c: vec![1.0],
            method: Method::Bbit,
            loss: LossKind::Hinge,
            trials: 1,
            seed: 0,
            split: 0.5,
            epochs: 200,
            tolerance: 1e-3,
            zero_is_negative: false,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.data.is_none() && self.synthetic.is_none() {
            return Err(Error::invalid("either a dataset path or a synthetic spec is required"));
        }
        if let Some(s) = &self.synthetic {
            s.validate()?;
        }
        if self.k.is_empty() || self.b.is_empty() || self.c.is_empty() {
            return Err(Error::invalid("k, b and C lists must be nonempty"));
        }
        if self.k.contains(&0) {
            return Err(Error::invalid("every k must be at least 1"));
        }
        if let Some(&b) = self.b.iter().find(|&&b| b == 0 || b > MAX_BITS) {
            return Err(Error::invalid(format!("b must be in [1, {MAX_BITS}], got {b}")));
        }
        if let Some(&c) = self.c.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::invalid(format!("C must be positive, got {c}")));
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::invalid(format!("split must be in (0, 1), got {}", self.split)));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            synthetic: Some(SynthSpec {
                n: 10,
                universe_size: 100,
                f_mean: 5,
                class_sep: 0.5,
                seed: 1,
            }),
            ..Default::default()
        }
    }

    #[test]
    fn validation() {
        assert!(base().validate().is_ok());
        assert!(ExperimentConfig::default().validate().is_err());
        assert!(ExperimentConfig { k: vec![], ..base() }.validate().is_err());
        assert!(ExperimentConfig { k: vec![0], ..base() }.validate().is_err());
        assert!(ExperimentConfig { b: vec![17], ..base() }.validate().is_err());
        assert!(ExperimentConfig { c: vec![0.0], ..base() }.validate().is_err());
        assert!(ExperimentConfig { split: 1.0, ..base() }.validate().is_err());
        assert!(ExperimentConfig { trials: 0, ..base() }.validate().is_err());
    }

    #[test]
    fn method_names() {
        for m in [Method::Bbit, Method::Vw, Method::Rp, Method::Raw] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("minhash".parse::<Method>().is_err());
    }
}
