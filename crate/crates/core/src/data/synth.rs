//! Planted-prototype binary classification data.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{Label, LabeledExample};
use crate::rng::StreamFamily;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub universe_size: u64,
    /// Features per example.
    pub f_mean: usize,
    /// Fraction of prototype features each example keeps, in `[0, 1]`.
    pub class_sep: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if self.f_mean == 0 || self.f_mean as u64 > self.universe_size {
            return Err(Error::invalid(format!(
                "need 1 <= f_mean <= D, got f_mean = {} and D = {}",
                self.f_mean, self.universe_size
            )));
        }
        if !(0.0..=1.0).contains(&self.class_sep) {
            return Err(Error::invalid(format!(
                "class_sep must be in [0, 1], got {}",
                self.class_sep
            )));
        }
        Ok(())
    }
}

fn distinct_sample<R: Rng>(rng: &mut R, universe: u64, amount: usize, exclude: &HashSet<u64>) -> Vec<u64> {
    let free = universe - exclude.len() as u64;
    debug_assert!(amount as u64 <= free);
    if free <= 4 * amount as u64 {
        // dense case: enumerate the complement
        let pool: Vec<u64> = (0..universe).filter(|t| !exclude.contains(t)).collect();
        return index::sample(rng, pool.len(), amount)
            .into_iter()
            .map(|i| pool[i])
            .collect();
    }
    let mut chosen = HashSet::with_capacity(amount);
    let mut out = Vec::with_capacity(amount);
    while out.len() < amount {
        let t = rng.gen_range(0..universe);
        if !exclude.contains(&t) && chosen.insert(t) {
            out.push(t);
        }
    }
    out
}

/// Two random prototypes of `f_mean` features. Example `i` has label `+1` for
/// even `i` and `-1` for odd `i`; it keeps `round(class_sep * f_mean)` randomly
/// chosen features of its class prototype and replaces the rest with features
/// drawn uniformly from outside the kept ones.
///
/// Example `i` uses its own random stream, so any example can be regenerated
/// independently of the others.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Vec<LabeledExample>> {
    spec.validate()?;
    let streams = StreamFamily::new(spec.seed);
    let d = spec.universe_size;
    let f = spec.f_mean;
    let mut proto_rng = streams.stream(0);
    let empty = HashSet::new();
    let protos = [
        distinct_sample(&mut proto_rng, d, f, &empty),
        distinct_sample(&mut proto_rng, d, f, &empty),
    ];
    let keep = (spec.class_sep * f as f64).round() as usize;
    let out = (0..spec.n)
        .map(|i| {
            let mut rng = streams.stream(i as u64 + 1);
            let (proto, label) = if i % 2 == 0 {
                (&protos[0], Label::Positive)
            } else {
                (&protos[1], Label::Negative)
            };
            let kept: HashSet<u64> = index::sample(&mut rng, f, keep).into_iter().map(|j| proto[j]).collect();
            let fresh = distinct_sample(&mut rng, d, f - keep, &kept);
            let mut idx: Vec<u64> = kept.into_iter().chain(fresh).collect();
            idx.sort_unstable();
            LabeledExample::binary(&idx, label)
        })
        .collect();
    Ok(out)
}
