//! Monte Carlo checks of the closed-form estimator moments.
//!
//! Random permutations are simulated exactly, not approximated by hashing:
//! either by drawing the images of a set pair's union under `k` uniform
//! permutations of `[0, D)`, or by drawing the pair of minima directly from
//! their joint law via order statistics.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::projection::{
    rp_estimate_inner, rp_project, rp_variance, vw_estimate_inner, vw_hash, vw_variance, BucketHashSpec,
    ProjectionSpec, SparseRealVector,
};
use crate::rng::{unit_f64, StreamFamily};
use crate::sketch::{
    estimate_pb, estimate_resemblance_bbit, estimate_resemblance_full, minwise_sketch, resemblance, truncate_to_b_bits,
    variance_bbit, variance_full, BBitParams, MinwiseHasher, MinwiseSketch, SparseBinarySet,
};

/// Images of a contiguous support under `k` independent uniform permutations of `[0, D)`.
///
/// Only the support is materialized; a uniform permutation restricted to it is
/// a uniformly random injection into `[0, D)`, drawn here by rejection.
pub struct PartialPermutations {
    universe_size: u64,
    support: Range<u64>,
    images: Vec<u64>,
}

impl PartialPermutations {
    pub fn sample<R: RngCore>(k: usize, universe_size: u64, support: Range<u64>, rng: &mut R) -> Result<Self> {
        let width = support.end.saturating_sub(support.start);
        if k == 0 || width == 0 || support.end > universe_size {
            return Err(Error::invalid("need k >= 1 and a nonempty support inside the universe"));
        }
        if universe_size > 1 << 32 {
            return Err(Error::invalid("universe too large for a rejection bitmap"));
        }
        let mut taken = vec![0u64; universe_size.div_ceil(64) as usize];
        let mut images = Vec::with_capacity(k * width as usize);
        for _ in 0..k {
            let row = images.len();
            while images.len() - row < width as usize {
                let v = rng.gen_range(0..universe_size);
                let (w, bit) = ((v / 64) as usize, 1u64 << (v % 64));
                if taken[w] & bit == 0 {
                    taken[w] |= bit;
                    images.push(v);
                }
            }
            for &v in &images[row..] {
                taken[(v / 64) as usize] = 0;
            }
        }
        Ok(Self {
            universe_size,
            support,
            images,
        })
    }

    fn width(&self) -> usize {
        (self.support.end - self.support.start) as usize
    }
}

impl MinwiseHasher for PartialPermutations {
    fn num_hashes(&self) -> usize {
        self.images.len() / self.width()
    }

    fn universe_size(&self) -> u64 {
        self.universe_size
    }

    /// Only defined for `t` inside the support.
    #[inline]
    fn hash(&self, j: usize, t: u64) -> u64 {
        self.images[j * self.width() + (t - self.support.start) as usize]
    }
}

/// Minimum of `f` distinct values drawn uniformly from `[0, pool)`, by inverse
/// transform on its survival function `prod_{i<m} (pool - i - f) / (pool - i)`.
pub fn min_of_distinct(pool: u64, f: u64, u: f64) -> u64 {
    debug_assert!(f >= 1 && f <= pool);
    let mut surv = 1.0f64;
    let mut m = 0u64;
    loop {
        surv *= (pool - m - f) as f64 / (pool - m) as f64;
        if u >= surv {
            return m;
        }
        m += 1;
    }
}

/// A pair of sets described by their overlap structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SetPair {
    pub universe_size: u64,
    pub only_first: u64,
    pub only_second: u64,
    pub shared: u64,
}

impl SetPair {
    /// Sizes `f1`, `f2` with the intersection chosen to get as close to `target` resemblance as integers allow.
    pub fn with_resemblance(universe_size: u64, f1: u64, f2: u64, target: f64) -> Result<Self> {
        if f1 == 0 || f2 == 0 || f1 + f2 > universe_size + f1.min(f2) {
            return Err(Error::invalid("set sizes do not fit in the universe"));
        }
        if !(0.0..=1.0).contains(&target) {
            return Err(Error::invalid("resemblance must be in [0, 1]"));
        }
        let a = (target * (f1 + f2) as f64 / (1.0 + target)).round() as u64;
        let a = a.min(f1.min(f2));
        let pair = Self {
            universe_size,
            only_first: f1 - a,
            only_second: f2 - a,
            shared: a,
        };
        if pair.union() > universe_size {
            return Err(Error::invalid("union exceeds the universe"));
        }
        Ok(pair)
    }

    pub fn f1(&self) -> u64 {
        self.only_first + self.shared
    }

    pub fn f2(&self) -> u64 {
        self.only_second + self.shared
    }

    pub fn union(&self) -> u64 {
        self.only_first + self.only_second + self.shared
    }

    pub fn resemblance(&self) -> f64 {
        self.shared as f64 / self.union() as f64
    }

    /// Concrete sets `[0, f1)` and `[f1 - a, f1 - a + f2)`, whose union is `[0, U)`.
    pub fn sets(&self) -> (SparseBinarySet, SparseBinarySet) {
        let s1 = (0..self.f1()).collect();
        let s2 = (self.only_first..self.only_first + self.f2()).collect();
        (
            SparseBinarySet::new(s1, self.universe_size).expect("valid range"),
            SparseBinarySet::new(s2, self.universe_size).expect("valid range"),
        )
    }

    /// One draw of `(min pi(S1), min pi(S2))` for a uniform permutation `pi`.
    pub fn sample_minima<R: RngCore>(&self, rng: &mut R) -> (u64, u64) {
        let d = self.universe_size;
        let m = min_of_distinct(d, self.union(), unit_f64(rng.next_u64()));
        let owner = rng.gen_range(0..self.union());
        if owner < self.shared {
            return (m, m);
        }
        let rest = d - m - 1;
        let u = unit_f64(rng.next_u64());
        if owner < self.shared + self.only_first {
            (m, m + 1 + min_of_distinct(rest, self.f2(), u))
        } else {
            (m + 1 + min_of_distinct(rest, self.f1(), u), m)
        }
    }
}

/// The closed forms that can be checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum McFormula {
    /// Variance `R(1-R)/k` of the full minwise estimator.
    MinwiseVariance,
    /// b-bit collision probability `C1 + (1 - C2) R`.
    BBitCollision,
    /// Variance of the b-bit resemblance estimator.
    BBitVariance,
    /// Random-projection inner-product variance.
    ProjectionVariance,
    /// Sign-hashed bucket inner-product variance.
    VwVariance,
}

impl McFormula {
    pub const ALL: [McFormula; 5] = [
        McFormula::MinwiseVariance,
        McFormula::BBitCollision,
        McFormula::BBitVariance,
        McFormula::ProjectionVariance,
        McFormula::VwVariance,
    ];

    /// Short command-line id.
    pub fn id(self) -> &'static str {
        match self {
            McFormula::MinwiseVariance => "eq2",
            McFormula::BBitCollision => "thm1",
            McFormula::BBitVariance => "eq8",
            McFormula::ProjectionVariance => "eq14",
            McFormula::VwVariance => "eq18",
        }
    }

    fn alias(self) -> &'static str {
        match self {
            McFormula::MinwiseVariance => "minwise-variance",
            McFormula::BBitCollision => "bbit-collision",
            McFormula::BBitVariance => "bbit-variance",
            McFormula::ProjectionVariance => "rp-variance",
            McFormula::VwVariance => "vw-variance",
        }
    }
}

impl fmt::Display for McFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for McFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        McFormula::ALL
            .into_iter()
            .find(|f| f.id() == s || f.alias() == s)
            .ok_or_else(|| Error::invalid(format!("unknown formula '{s}' (eq2|thm1|eq8|eq14|eq18)")))
    }
}

/// Inputs for [`mc_verify`]; fields irrelevant to a formula are ignored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McParams {
    pub universe_size: u64,
    /// Sparsity `f / D` of each set, for the b-bit checks.
    pub sparsity: f64,
    /// Set size for the full minwise check.
    pub set_size: u64,
    pub resemblance: f64,
    pub k: usize,
    pub bits: u8,
    pub s: f64,
    /// Nonzeros per vector for the projection checks.
    pub nnz: usize,
}

impl McParams {
    pub fn defaults_for(formula: McFormula) -> Self {
        let base = Self {
            universe_size: 1 << 16,
            sparsity: 1e-3,
            set_size: 60,
            resemblance: 0.5,
            k: 100,
            bits: 1,
            s: 1.0,
            nnz: 20,
        };
        match formula {
            McFormula::MinwiseVariance => base,
            McFormula::BBitCollision | McFormula::BBitVariance => Self {
                universe_size: 1 << 20,
                ..base
            },
            McFormula::ProjectionVariance | McFormula::VwVariance => Self { k: 64, ..base },
        }
    }
}

/// One empirical-vs-closed-form comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct McCheck {
    pub quantity: String,
    pub empirical: f64,
    pub closed_form: f64,
    /// Absolute or relative error, as named by `criterion`.
    pub error: f64,
    pub criterion: String,
    pub passed: bool,
}

impl McCheck {
    fn mean(quantity: &str, samples: &[f64], truth: f64) -> Self {
        let (mean, var) = mean_var(samples);
        let se = (var / samples.len() as f64).sqrt();
        let err = (mean - truth).abs();
        McCheck {
            quantity: quantity.into(),
            empirical: mean,
            closed_form: truth,
            error: err,
            criterion: format!("|mean - truth| < 3 SE = {:.3e}", 3.0 * se),
            passed: err <= 3.0 * se,
        }
    }

    fn variance(quantity: &str, samples: &[f64], truth: f64, rel_tol: f64) -> Self {
        let (_, var) = mean_var(samples);
        let rel = if truth == 0.0 {
            var.abs()
        } else {
            (var - truth).abs() / truth
        };
        McCheck {
            quantity: quantity.into(),
            empirical: var,
            closed_form: truth,
            error: rel,
            criterion: format!("relative error < {rel_tol}"),
            passed: rel < rel_tol,
        }
    }

    fn absolute(quantity: &str, empirical: f64, truth: f64, tol: f64) -> Self {
        let err = (empirical - truth).abs();
        McCheck {
            quantity: quantity.into(),
            empirical,
            closed_form: truth,
            error: err,
            criterion: format!("absolute error < {tol}"),
            passed: err < tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McReport {
    pub formula: McFormula,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<McCheck>,
}

impl McReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for McReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "formula {} trials {} seed {}", self.formula, self.trials, self.seed)?;
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: empirical {:.6e} closed-form {:.6e} error {:.3e} ({})",
                if c.passed { "PASS" } else { "FAIL" },
                c.quantity,
                c.empirical,
                c.closed_form,
                c.error,
                c.criterion
            )?;
        }
        Ok(())
    }
}

/// Sample mean and unbiased sample variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Relative tolerance on Monte Carlo variances.
pub const VARIANCE_REL_TOL: f64 = 0.10;
/// Absolute tolerance on the b-bit collision probability.
pub const COLLISION_ABS_TOL: f64 = 0.01;

fn per_trial<F>(trials: usize, seed: u64, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, u64) -> Result<f64> + Sync,
{
    let streams = StreamFamily::new(seed);
    (0..trials as u64)
        .into_par_iter()
        .map(|t| f(&mut streams.stream(t), t))
        .collect()
}

/// A random pair of sparse real vectors sharing half their support.
pub fn random_vector_pair(universe_size: u64, nnz: usize, seed: u64) -> Result<(SparseRealVector, SparseRealVector)> {
    if nnz == 0 || 2 * nnz as u64 > universe_size {
        return Err(Error::invalid("nnz must be in [1, D/2]"));
    }
    let mut rng = StreamFamily::new(seed).stream(u64::MAX);
    let support = rand::seq::index::sample(&mut rng, universe_size as usize, nnz + nnz / 2);
    let mut ids: Vec<u64> = support.into_iter().map(|i| i as u64).collect();
    let overlap = nnz / 2;
    let mut draw = |ids: &[u64]| -> Result<SparseRealVector> {
        let mut e: Vec<(u64, f64)> = ids
            .iter()
            .map(|&i| {
                let v: f64 = rng.gen_range(0.1..1.0);
                (i, if rng.gen::<bool>() { v } else { -v })
            })
            .collect();
        e.sort_unstable_by_key(|p| p.0);
        SparseRealVector::new(e, universe_size)
    };
    let first = draw(&ids[..nnz])?;
    ids.drain(..nnz - overlap);
    let second = draw(&ids)?;
    Ok((first, second))
}

/// Run the Monte Carlo check of `formula`.
pub fn mc_verify(formula: McFormula, params: &McParams, trials: usize, seed: u64) -> Result<McReport> {
    if trials < 2 {
        return Err(Error::invalid("need at least 2 trials"));
    }
    let p = *params;
    let checks = match formula {
        McFormula::MinwiseVariance => {
            let pair = SetPair::with_resemblance(p.universe_size, p.set_size, p.set_size, p.resemblance)?;
            let (s1, s2) = pair.sets();
            let r = resemblance(&s1, &s2)?;
            let est = per_trial(trials, seed, |rng, _| {
                let perms = PartialPermutations::sample(p.k, p.universe_size, 0..pair.union(), rng)?;
                estimate_resemblance_full(&minwise_sketch(&s1, &perms)?, &minwise_sketch(&s2, &perms)?)
            })?;
            vec![
                McCheck::mean("mean of R_M", &est, r),
                McCheck::variance("variance of R_M", &est, variance_full(r, p.k), VARIANCE_REL_TOL),
            ]
        }
        McFormula::BBitCollision | McFormula::BBitVariance => {
            let f = ((p.sparsity * p.universe_size as f64).round() as u64).max(1);
            let pair = SetPair::with_resemblance(p.universe_size, f, f, p.resemblance)?;
            let r = pair.resemblance();
            let params = BBitParams::new(pair.f1(), pair.f2(), p.universe_size, p.bits)?;
            let pb_hat = per_trial(trials, seed, |rng, _| {
                let (z1, z2): (Vec<u64>, Vec<u64>) = (0..p.k).map(|_| pair.sample_minima(rng)).unzip();
                let m1 = MinwiseSketch::from_values(z1, p.universe_size)?;
                let m2 = MinwiseSketch::from_values(z2, p.universe_size)?;
                estimate_pb(&truncate_to_b_bits(&m1, p.bits)?, &truncate_to_b_bits(&m2, p.bits)?)
            })?;
            if formula == McFormula::BBitCollision {
                let (mean, _) = mean_var(&pb_hat);
                vec![McCheck::absolute(
                    "P_b",
                    mean,
                    params.collision_probability(r),
                    COLLISION_ABS_TOL,
                )]
            } else {
                let r_hat = pb_hat
                    .iter()
                    .map(|&ph| estimate_resemblance_bbit(ph, &params).map(|e| e.value))
                    .collect::<Result<Vec<_>>>()?;
                vec![
                    McCheck::mean("mean of R_b", &r_hat, r),
                    McCheck::variance(
                        "variance of R_b",
                        &r_hat,
                        variance_bbit(r, &params, p.k),
                        VARIANCE_REL_TOL,
                    ),
                ]
            }
        }
        McFormula::ProjectionVariance => {
            let (u1, u2) = random_vector_pair(p.universe_size, p.nnz, seed)?;
            let truth = u1.dot(&u2);
            let est = per_trial(trials, seed, |_, t| {
                let spec = ProjectionSpec::new(p.k, p.s, crate::rng::derive_seed(seed, t))?;
                rp_estimate_inner(&rp_project(&u1, &spec), &rp_project(&u2, &spec))
            })?;
            vec![
                McCheck::mean("mean of a_rp", &est, truth),
                McCheck::variance(
                    "variance of a_rp",
                    &est,
                    rp_variance(&u1, &u2, p.s, p.k)?,
                    VARIANCE_REL_TOL,
                ),
            ]
        }
        McFormula::VwVariance => {
            let (u1, u2) = random_vector_pair(p.universe_size, p.nnz, seed)?;
            let truth = u1.dot(&u2);
            let est = per_trial(trials, seed, |_, t| {
                let s = crate::rng::derive_seed(seed, t);
                let spec = BucketHashSpec::with_s(p.k, s, s ^ 0x9e37_79b9_7f4a_7c15, p.s)?;
                vw_estimate_inner(&vw_hash(&u1, &spec), &vw_hash(&u2, &spec))
            })?;
            let mut checks = vec![
                McCheck::mean("mean of a_vw", &est, truth),
                McCheck::variance(
                    "variance of a_vw",
                    &est,
                    vw_variance(&u1, &u2, p.s, p.k)?,
                    VARIANCE_REL_TOL,
                ),
            ];
            if p.s == 1.0 {
                let vw = vw_variance(&u1, &u2, 1.0, p.k)?;
                let rp = rp_variance(&u1, &u2, 1.0, p.k)?;
                checks.push(McCheck {
                    quantity: "closed-form vw variance vs rp variance at s = 1".into(),
                    empirical: vw,
                    closed_form: rp,
                    error: (vw - rp).abs(),
                    criterion: "exact equality".into(),
                    passed: vw == rp,
                });
            }
            checks
        }
    };
    Ok(McReport {
        formula,
        trials,
        seed,
        checks,
    })
}
