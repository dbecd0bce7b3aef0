use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;
use rayon::prelude::*;

use hashlearn::codec::{compress_expanded_with_vw, expand_bbit, to_example};
use hashlearn::data::{
    combined_universe, compute_stats, expand_combinations, generate_synthetic, read_sparse_text, write_sparse_text,
    DatasetStats, ReadOptions, StatsAccumulator, DEFAULT_TRIPLE_MODULUS,
};
use hashlearn::experiment::{
    compare_storage, load_dataset, mc_verify, train_eval, write_grid_csv, write_storage_csv, Dataset, ExperimentConfig,
    McParams,
};
use hashlearn::learner::{evaluate_accuracy, train, LabeledExample, LinearModel, TrainConfig};
use hashlearn::projection::BucketHashSpec;
use hashlearn::rng::derive_seed;
use hashlearn::sketch::{minwise_sketch, truncate_to_b_bits, SketchFile, SketchHeader, TwoUniversalHashFamily};

mod cli;
mod config_file;

use cli::{Cli, Command, ExpandArgs, ExperimentArgs, McArgs};
use config_file::LoadedConfig;

/// A usage or validation failure; exits with status 1.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<hashlearn::Error>() {
            return if e.is_io() { EXIT_IO } else { EXIT_VALIDATION };
        }
        if cause.is::<io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_VALIDATION
}

fn main() -> ExitCode {
    let args: Vec<OsString> = std::env::args_os().collect();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

struct Session {
    argv: Vec<OsString>,
    config: Option<LoadedConfig>,
}

impl Session {
    /// CSV header lines recording the command line, the config file and the merged settings.
    fn provenance(&self, effective: &ExperimentConfig) -> Result<Vec<String>> {
        let argv: Vec<String> = self
            .argv
            .iter()
            .skip(1)
            .map(|a| a.to_string_lossy().into_owned())
            .collect();
        let mut out = vec![format!("command: hashlearn {}", argv.join(" "))];
        if let Some(c) = &self.config {
            out.push(format!("config file: {}", c.path.display()));
            out.extend(c.text.lines().map(|l| format!("config: {l}")));
        }
        let toml = toml::to_string(effective).context("serializing configuration")?;
        out.extend(
            toml.lines()
                .filter(|l| !l.is_empty())
                .map(|l| format!("effective: {l}")),
        );
        Ok(out)
    }
}

fn run(argv: Vec<OsString>) -> Result<()> {
    let (expanded, config) = config_file::expand_args(argv.clone())?;
    let cli = match Cli::try_parse_from(&expanded) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            return Err(invalid(
                e.render()
                    .to_string()
                    .trim_end()
                    .trim_start_matches("error: ")
                    .to_string(),
            ))
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring threads")?;
    }
    let ctx = Session { argv, config };
    match cli.command {
        Command::Sketch {
            exp,
            universe,
            no_labels,
        } => cmd_sketch(&exp, universe, no_labels),
        Command::Expand(a) => cmd_expand(&a),
        Command::Train { exp, model, dim } => cmd_train(&exp, &model, dim),
        Command::Eval { exp, model: Some(m) } => cmd_eval_model(&exp, &m),
        Command::Eval { exp, model: None } => cmd_train_eval(&ctx, &exp),
        Command::McVerify(a) => cmd_mc_verify(&a),
        Command::Compare { exp } => cmd_compare(&ctx, &exp),
        Command::Synth { synth, output } => {
            let data = generate_synthetic(&synth.spec())?;
            write_text(output.as_deref(), &data)
        }
        Command::Stats { data, zero_is_negative } => cmd_stats(&data, zero_is_negative),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).map_err(|e| hashlearn::Error::with_path(path, e))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).map_err(|e| hashlearn::Error::with_path(path, e))?;
    Ok(BufReader::new(f))
}

fn write_text(output: Option<&Path>, data: &[LabeledExample]) -> Result<()> {
    match output {
        Some(p) => {
            let mut w = create(p)?;
            write_sparse_text(&mut w, data).map_err(|e| e.in_file(p))?;
            w.flush().map_err(|e| hashlearn::Error::with_path(p, e))?;
        }
        None => write_sparse_text(io::stdout().lock(), data)?,
    }
    Ok(())
}

fn read_text(path: &Path, zero_is_negative: bool) -> Result<Vec<LabeledExample>> {
    let opts = ReadOptions { zero_is_negative };
    let data = read_sparse_text(open(path)?, opts)
        .collect::<hashlearn::Result<Vec<_>>>()
        .map_err(|e| e.in_file(path))
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(data)
}

/// The dataset named by `exp`: its file, or a single synthetic draw.
fn load_single(config: &ExperimentConfig) -> Result<Dataset> {
    match &config.synthetic {
        Some(spec) if config.data.is_none() => Ok(Dataset {
            examples: generate_synthetic(spec)?,
            universe_size: spec.universe_size,
        }),
        _ => Ok(load_dataset(config, 0)?),
    }
}

fn single<T: Copy + fmt::Display>(name: &str, v: &[T]) -> Result<T> {
    match v {
        [x] => Ok(*x),
        _ => Err(invalid(format!("--{name} takes a single value for this command"))),
    }
}

fn print_stats(s: &DatasetStats) {
    println!("examples {}", s.n);
    println!("dimension {}", s.universe_size);
    println!("nnz median {}", s.nnz_median);
    println!("nnz mean {}", s.nnz_mean);
}

fn cmd_sketch(exp: &ExperimentArgs, universe: Option<u64>, no_labels: bool) -> Result<()> {
    let config = exp.to_config();
    config.validate()?;
    let k = single("k", &config.k)?;
    let bits = single("b", &config.b)?;
    let output = config.output.clone().ok_or_else(|| invalid("--output is required"))?;

    let t0 = Instant::now();
    let mut data = load_single(&config)?;
    let load_seconds = t0.elapsed().as_secs_f64();
    if let Some(d) = universe {
        if d < data.universe_size && config.data.is_some() {
            return Err(invalid(format!("--universe {d} is below the largest feature index")));
        }
        data.universe_size = d;
    }
    let stats = compute_stats(&data.examples)?;

    let t1 = Instant::now();
    let header = SketchHeader {
        universe_size: data.universe_size,
        k: u32::try_from(k).map_err(|_| invalid("k too large"))?,
        bits,
        seed: config.seed,
    };
    header.validate()?;
    let family = TwoUniversalHashFamily::new(k, data.universe_size, config.seed)?;
    let sketches = data
        .examples
        .par_iter()
        .enumerate()
        .map(|(index, e)| {
            e.to_binary_set(data.universe_size)
                .and_then(|s| minwise_sketch(&s, &family))
                .and_then(|m| truncate_to_b_bits(&m, bits))
                .map_err(|source| hashlearn::Error::Record {
                    index,
                    source: Box::new(source),
                })
        })
        .collect::<hashlearn::Result<Vec<_>>>()?;
    let labels = (!no_labels).then(|| data.examples.iter().map(|e| e.label).collect());
    let file = SketchFile::new(header, sketches, labels)?;
    let preprocess_seconds = t1.elapsed().as_secs_f64();

    let mut w = create(&output)?;
    file.write_to(&mut w).map_err(|e| e.in_file(&output))?;
    w.flush().map_err(|e| hashlearn::Error::with_path(&output, e))?;

    print_stats(&stats);
    println!("payload bits {}", file.payload_bits());
    println!("load seconds {load_seconds:.6}");
    println!("preprocess seconds {preprocess_seconds:.6}");
    Ok(())
}

fn cmd_expand(a: &ExpandArgs) -> Result<()> {
    if a.combinations {
        let data = read_text(&a.input, a.zero_is_negative)?;
        let d = match a.universe {
            Some(d) => d,
            None => compute_stats(&data)?.universe_size,
        };
        let triples = a.triples_mod.map(|m| if m == 0 { DEFAULT_TRIPLE_MODULUS } else { m });
        combined_universe(d, triples.is_some())?;
        let out = data
            .par_iter()
            .map(|e| {
                let s = expand_combinations(&e.to_binary_set(d)?, triples)?;
                Ok(LabeledExample::binary(s.indices(), e.label))
            })
            .collect::<hashlearn::Result<Vec<_>>>()?;
        return write_text(a.output.as_deref(), &out);
    }

    let file = SketchFile::read_from(open(&a.input)?)
        .map_err(|e| e.in_file(&a.input))
        .with_context(|| format!("reading {}", a.input.display()))?;
    let labels = file
        .labels
        .as_ref()
        .ok_or_else(|| invalid(format!("{} has no labels to expand with", a.input.display())))?;
    let spec = match a.vw_buckets {
        Some(k) => Some(BucketHashSpec::new(k, derive_seed(a.seed, 1), derive_seed(a.seed, 2))?),
        None => None,
    };
    let out = file
        .sketches
        .par_iter()
        .zip(labels)
        .map(|(s, &label)| {
            let e = expand_bbit(s);
            match &spec {
                Some(spec) => LabeledExample::new(compress_expanded_with_vw(&e, spec)?.sparse_entries(), label),
                None => Ok(to_example(&e, label)),
            }
        })
        .collect::<hashlearn::Result<Vec<_>>>()?;
    write_text(a.output.as_deref(), &out)
}

fn train_config(config: &ExperimentConfig) -> Result<TrainConfig> {
    Ok(TrainConfig {
        c: single("c", &config.c)?,
        loss: config.loss,
        seed: config.seed,
        max_epochs: config.epochs,
        tolerance: config.tolerance,
    })
}

fn cmd_train(exp: &ExperimentArgs, model_path: &Path, dim: Option<usize>) -> Result<()> {
    let config = exp.to_config();
    config.validate()?;
    let data = load_single(&config)?;
    let dim = match dim {
        Some(d) => d,
        None => usize::try_from(data.universe_size).map_err(|_| invalid("dimension too large"))?,
    };
    let report = train(&data.examples, dim, &train_config(&config)?)?;
    let mut w = create(model_path)?;
    report.model.write_to(&mut w).map_err(|e| e.in_file(model_path))?;
    w.flush().map_err(|e| hashlearn::Error::with_path(model_path, e))?;
    println!(
        "objective {}",
        report.objective_history.last().copied().unwrap_or(f64::NAN)
    );
    println!("epochs {}", report.epochs);
    println!("duality gap {}", report.duality_gap);
    println!("converged {}", report.converged);
    println!("train accuracy {}", evaluate_accuracy(&report.model, &data.examples)?);
    Ok(())
}

fn cmd_eval_model(exp: &ExperimentArgs, model_path: &Path) -> Result<()> {
    let config = exp.to_config();
    let file = open(model_path)?;
    let model = LinearModel::read_from(file)
        .map_err(|e| e.in_file(model_path))
        .with_context(|| format!("reading {}", model_path.display()))?;
    let data = load_single(&config)?;
    println!("accuracy {}", evaluate_accuracy(&model, &data.examples)?);
    Ok(())
}

fn emit(path: Option<&PathBuf>, f: impl FnOnce(&mut dyn Write) -> hashlearn::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w).map_err(|e| e.in_file(p))?;
            w.flush().map_err(|e| hashlearn::Error::with_path(p, e))?;
        }
        None => f(&mut io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_train_eval(ctx: &Session, exp: &ExperimentArgs) -> Result<()> {
    let config = exp.to_config();
    config.validate()?;
    let rows = train_eval(&config)?;
    let prov = ctx.provenance(&config)?;
    emit(config.output.as_ref(), |w| write_grid_csv(w, &prov, &rows))
}

fn cmd_compare(ctx: &Session, exp: &ExperimentArgs) -> Result<()> {
    let config = exp.to_config();
    config.validate()?;
    let rows = compare_storage(&config)?;
    let prov = ctx.provenance(&config)?;
    emit(config.output.as_ref(), |w| {
        write_storage_csv(w, &prov, config.trials, &rows)
    })
}

/// Fewest trials accepted by `mc-verify`.
const MIN_MC_TRIALS: usize = 1000;

fn cmd_mc_verify(a: &McArgs) -> Result<()> {
    if a.trials < MIN_MC_TRIALS {
        return Err(invalid(format!("--trials must be at least {MIN_MC_TRIALS}")));
    }
    let d = McParams::defaults_for(a.formula);
    let params = McParams {
        universe_size: a.universe.unwrap_or(d.universe_size),
        sparsity: a.sparsity.unwrap_or(d.sparsity),
        set_size: a.set_size.unwrap_or(d.set_size),
        resemblance: a.resemblance.unwrap_or(d.resemblance),
        k: a.k.unwrap_or(d.k),
        bits: a.b.unwrap_or(d.bits),
        s: a.s.unwrap_or(d.s),
        nnz: a.nnz.unwrap_or(d.nnz),
    };
    let report = mc_verify(a.formula, &params, a.trials, a.seed)?;
    print!("{report}");
    println!(
        "{}",
        if report.passed() {
            "overall PASS"
        } else {
            "overall FAIL"
        }
    );
    Ok(())
}

fn cmd_stats(path: &Path, zero_is_negative: bool) -> Result<()> {
    let t0 = Instant::now();
    let mut acc = StatsAccumulator::default();
    for e in read_sparse_text(open(path)?, ReadOptions { zero_is_negative }) {
        acc.push(
            &e.map_err(|e| e.in_file(path))
                .with_context(|| format!("reading {}", path.display()))?,
        );
    }
    let stats = acc.finish()?;
    print_stats(&stats);
    println!("load seconds {:.6}", t0.elapsed().as_secs_f64());
    Ok(())
}
