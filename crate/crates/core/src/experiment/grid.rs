//! Train/evaluate sweeps and the equal-storage comparison.

use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use rand::seq::SliceRandom;

use crate::codec::{expand_bbit, to_example};
use crate::data::{generate_synthetic, read_sparse_text, ReadOptions};
use crate::error::{Error, Result};
use crate::learner::{evaluate_accuracy, train_sweep, LabeledExample, TrainConfig};
use crate::projection::{rp_project, vw_hash, BucketHashSpec, ProjectionSpec};
use crate::rng::{derive_seed, StreamFamily};
use crate::sketch::{minwise_sketch, truncate_to_b_bits, MinwiseSketch, TwoUniversalHashFamily};

use super::config::{ExperimentConfig, Method};

/// Bits charged per VW bucket under the two accountings.
pub const VW_BITS_WIDE: u64 = 32;
pub const VW_BITS_NARROW: u64 = 16;

/// A loaded dataset and its dimensionality.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub examples: Vec<LabeledExample>,
    pub universe_size: u64,
}

/// Load trial `trial`'s data. A file is read once and shared by every trial;
/// synthetic data is regenerated per trial from a derived seed.
pub fn load_dataset(config: &ExperimentConfig, trial: usize) -> Result<Dataset> {
    if let Some(path) = &config.data {
        let file = File::open(path).map_err(|e| Error::with_path(path, e))?;
        let opts = ReadOptions {
            zero_is_negative: config.zero_is_negative,
        };
        let examples = read_sparse_text(BufReader::new(file), opts)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.in_file(path))?;
        let universe_size = examples.iter().filter_map(|e| e.max_index()).max().map_or(1, |m| m + 1);
        return Ok(Dataset {
            examples,
            universe_size,
        });
    }
    let spec = config
        .synthetic
        .as_ref()
        .ok_or_else(|| Error::invalid("either a dataset path or a synthetic spec is required"))?;
    let mut spec = *spec;
    spec.seed = derive_seed(spec.seed, trial as u64);
    Ok(Dataset {
        examples: generate_synthetic(&spec)?,
        universe_size: spec.universe_size,
    })
}

/// Random train/test split of `n` items. Errors if either side would be empty.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_train = (fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::Degenerate(format!(
            "split {fraction} of {n} examples leaves an empty train or test set"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut StreamFamily::new(seed).stream(0));
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

/// Features in a learner-ready space and its dimension.
struct Featurized {
    train: Vec<LabeledExample>,
    test: Vec<LabeledExample>,
    dim: usize,
}

fn map_split<F>(train: &[LabeledExample], test: &[LabeledExample], dim: usize, f: F) -> Result<Featurized>
where
    F: Fn(&LabeledExample) -> Result<LabeledExample>,
{
    Ok(Featurized {
        train: train.iter().map(&f).collect::<Result<_>>()?,
        test: test.iter().map(&f).collect::<Result<_>>()?,
        dim,
    })
}

fn checked_dim(dim: u64) -> Result<usize> {
    usize::try_from(dim)
        .ok()
        .filter(|&d| d <= crate::learner::MAX_DIM)
        .ok_or_else(|| Error::invalid(format!("feature dimension {dim} is too large to train on")))
}

fn featurize_vw(train: &[LabeledExample], test: &[LabeledExample], d: u64, k: usize, seed: u64) -> Result<Featurized> {
    let spec = BucketHashSpec::new(k, derive_seed(seed, 1), derive_seed(seed, 2))?;
    map_split(train, test, k, |e| {
        let g = vw_hash(&e.to_sparse_real(d)?, &spec);
        LabeledExample::new(g.sparse_entries(), e.label)
    })
}

fn featurize_rp(train: &[LabeledExample], test: &[LabeledExample], d: u64, k: usize, seed: u64) -> Result<Featurized> {
    let spec = ProjectionSpec::new(k, 1.0, derive_seed(seed, 3))?;
    map_split(train, test, k, |e| {
        let v = rp_project(&e.to_sparse_real(d)?, &spec);
        let feats = v
            .values
            .iter()
            .enumerate()
            .filter(|p| *p.1 != 0.0)
            .map(|(i, &x)| (i as u64, x))
            .collect();
        LabeledExample::new(feats, e.label)
    })
}

/// Full minwise sketches at `k`, one per example, for prefix reuse across smaller `k` and every `b`.
fn full_sketches(data: &[LabeledExample], d: u64, k: usize, seed: u64) -> Result<Vec<MinwiseSketch>> {
    let family = TwoUniversalHashFamily::new(k, d, derive_seed(seed, 0))?;
    data.iter()
        .enumerate()
        .map(|(index, e)| {
            e.to_binary_set(d)
                .and_then(|s| minwise_sketch(&s, &family))
                .map_err(|source| Error::Record {
                    index,
                    source: Box::new(source),
                })
        })
        .collect()
}

fn bbit_examples(full: &[MinwiseSketch], labels: &[LabeledExample], k: usize, bits: u8) -> Result<Vec<LabeledExample>> {
    full.iter()
        .zip(labels)
        .map(|(m, e)| {
            let prefix = MinwiseSketch::from_values(m.values()[..k].to_vec(), m.universe_size())?;
            Ok(to_example(&expand_bbit(&truncate_to_b_bits(&prefix, bits)?), e.label))
        })
        .collect()
}

/// One cell of a sweep, averaged over trials.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub method: Method,
    /// Absent for the unhashed baseline.
    pub k: Option<usize>,
    /// Present only for b-bit hashing.
    pub b: Option<u8>,
    pub c: f64,
    /// Held-out accuracy per trial.
    pub accuracies: Vec<f64>,
    pub load_seconds: f64,
    pub preprocess_seconds: f64,
    pub train_seconds: f64,
}

impl GridRow {
    pub fn accuracy(&self) -> f64 {
        self.accuracies.iter().sum::<f64>() / self.accuracies.len() as f64
    }

    pub fn accuracy_sd(&self) -> f64 {
        let n = self.accuracies.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.accuracy();
        (self.accuracies.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1) as f64).sqrt()
    }
}

/// Unmerged results for one trial: `(method, k, b) -> per-C (accuracy, train time)` plus timings.
struct Cell {
    method: Method,
    k: Option<usize>,
    b: Option<u8>,
    preprocess_seconds: f64,
    per_c: Vec<(f64, f64)>,
}

/// Evaluate every `(k, b)` of `method` for each C in `cs` on one trial.
fn run_trial(
    config: &ExperimentConfig,
    method: Method,
    ks: &[usize],
    cs: &[f64],
    trial: usize,
) -> Result<(f64, Vec<Cell>)> {
    let t0 = Instant::now();
    let data = load_dataset(config, trial)?;
    let load_seconds = t0.elapsed().as_secs_f64();
    let seed = derive_seed(config.seed, trial as u64);
    let (tr, te) = split_indices(data.examples.len(), config.split, seed)?;
    let train: Vec<LabeledExample> = tr.iter().map(|&i| data.examples[i].clone()).collect();
    let test: Vec<LabeledExample> = te.iter().map(|&i| data.examples[i].clone()).collect();
    let d = data.universe_size;
    let base = TrainConfig {
        c: 1.0,
        loss: config.loss,
        seed,
        max_epochs: config.epochs,
        tolerance: config.tolerance,
    };
    let fit = |f: &Featurized| -> Result<Vec<(f64, f64)>> {
        let t = Instant::now();
        let reports = train_sweep(&f.train, f.dim, cs, &base)?;
        let per = t.elapsed().as_secs_f64() / cs.len() as f64;
        reports
            .iter()
            .map(|r| Ok((evaluate_accuracy(&r.model, &f.test)?, per)))
            .collect()
    };

    let mut cells = Vec::new();
    match method {
        Method::Bbit => {
            let k_max = *ks.iter().max().expect("nonempty k list");
            let t = Instant::now();
            let full_train = full_sketches(&train, d, k_max, seed)?;
            let full_test = full_sketches(&test, d, k_max, seed)?;
            let sketch_seconds = t.elapsed().as_secs_f64();
            for &k in ks {
                for &b in &config.b {
                    let t = Instant::now();
                    let f = Featurized {
                        train: bbit_examples(&full_train, &train, k, b)?,
                        test: bbit_examples(&full_test, &test, k, b)?,
                        dim: checked_dim((k as u64) << b)?,
                    };
                    let preprocess_seconds = sketch_seconds + t.elapsed().as_secs_f64();
                    cells.push(Cell {
                        method,
                        k: Some(k),
                        b: Some(b),
                        preprocess_seconds,
                        per_c: fit(&f)?,
                    });
                }
            }
        }
        Method::Vw | Method::Rp => {
            for &k in ks {
                let t = Instant::now();
                let f = if method == Method::Vw {
                    featurize_vw(&train, &test, d, k, seed)?
                } else {
                    featurize_rp(&train, &test, d, k, seed)?
                };
                cells.push(Cell {
                    method,
                    k: Some(k),
                    b: None,
                    preprocess_seconds: t.elapsed().as_secs_f64(),
                    per_c: fit(&f)?,
                });
            }
        }
        Method::Raw => {
            let f = Featurized {
                train,
                test,
                dim: checked_dim(d)?,
            };
            cells.push(Cell {
                method,
                k: None,
                b: None,
                preprocess_seconds: 0.0,
                per_c: fit(&f)?,
            });
        }
    }
    Ok((load_seconds, cells))
}

fn sweep(config: &ExperimentConfig, method: Method, ks: &[usize], cs: &[f64]) -> Result<Vec<GridRow>> {
    config.validate()?;
    let mut rows: Vec<GridRow> = Vec::new();
    for trial in 0..config.trials {
        let (load, cells) = run_trial(config, method, ks, cs, trial)?;
        let mut at = 0;
        for cell in cells {
            for (&c, &(acc, secs)) in cs.iter().zip(&cell.per_c) {
                if trial == 0 {
                    rows.push(GridRow {
                        method: cell.method,
                        k: cell.k,
                        b: cell.b,
                        c,
                        accuracies: Vec::with_capacity(config.trials),
                        load_seconds: 0.0,
                        preprocess_seconds: 0.0,
                        train_seconds: 0.0,
                    });
                }
                let row = &mut rows[at];
                row.accuracies.push(acc);
                row.load_seconds += load / config.trials as f64;
                row.preprocess_seconds += cell.preprocess_seconds / config.trials as f64;
                row.train_seconds += secs / config.trials as f64;
                at += 1;
            }
        }
    }
    Ok(rows)
}

/// The full `k x b x C` grid for `config.method` (`k x C` for methods without `b`;
/// `C` alone for the unhashed baseline), in grid order.
pub fn train_eval(config: &ExperimentConfig) -> Result<Vec<GridRow>> {
    sweep(config, config.method, &config.k, &config.c)
}

/// Best-C accuracy of one configuration at its storage cost.
#[derive(Clone, Debug, PartialEq)]
pub struct StorageRow {
    pub method: Method,
    pub k: Option<usize>,
    pub b: Option<u8>,
    /// `b * k` for b-bit sketches, `32 * k` for VW; absent for the baseline.
    pub bits_per_example: Option<u64>,
    /// As `bits_per_example` but charging 16 bits per VW bucket.
    pub bits_per_example_16: Option<u64>,
    pub best_c: f64,
    pub accuracy: f64,
}

fn best(rows: &[GridRow]) -> Vec<StorageRow> {
    let mut out: Vec<StorageRow> = Vec::new();
    for r in rows {
        let acc = r.accuracy();
        let same = out
            .last_mut()
            .filter(|o| o.k == r.k && o.b == r.b && o.method == r.method);
        match same {
            Some(o) => {
                if acc > o.accuracy {
                    o.accuracy = acc;
                    o.best_c = r.c;
                }
            }
            None => {
                let (wide, narrow) = match (r.method, r.k, r.b) {
                    (Method::Bbit, Some(k), Some(b)) => (Some(b as u64 * k as u64), Some(b as u64 * k as u64)),
                    (Method::Vw, Some(k), _) => (Some(VW_BITS_WIDE * k as u64), Some(VW_BITS_NARROW * k as u64)),
                    (Method::Rp, Some(k), _) => (Some(VW_BITS_WIDE * k as u64), Some(VW_BITS_NARROW * k as u64)),
                    _ => (None, None),
                };
                out.push(StorageRow {
                    method: r.method,
                    k: r.k,
                    b: r.b,
                    bits_per_example: wide,
                    bits_per_example_16: narrow,
                    best_c: r.c,
                    accuracy: acc,
                });
            }
        }
    }
    out
}

/// Bucket counts matching each b-bit budget `b * k` under both VW accountings.
pub fn vw_bucket_grid(ks: &[usize], bs: &[u8]) -> Vec<usize> {
    let mut out: Vec<usize> = ks
        .iter()
        .flat_map(|&k| bs.iter().map(move |&b| b as u64 * k as u64))
        .flat_map(|bits| [bits / VW_BITS_WIDE, bits / VW_BITS_NARROW])
        .filter(|&k| k > 0)
        .map(|k| k as usize)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// b-bit hashing over `k x b`, VW at the matching budgets, and the unhashed
/// baseline, each at its best C from `config.c`.
pub fn compare_storage(config: &ExperimentConfig) -> Result<Vec<StorageRow>> {
    let mut rows = best(&sweep(config, Method::Bbit, &config.k, &config.c)?);
    let vw_k = vw_bucket_grid(&config.k, &config.b);
    if !vw_k.is_empty() {
        rows.extend(best(&sweep(config, Method::Vw, &vw_k, &config.c)?));
    }
    rows.extend(best(&sweep(config, Method::Raw, &[1], &config.c)?));
    Ok(rows)
}
