use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use hashlearn::data::SynthSpec;
use hashlearn::experiment::{ExperimentConfig, McFormula, Method};
use hashlearn::learner::LossKind;

#[derive(Debug, Parser)]
#[command(
    name = "hashlearn",
    version,
    about = "b-bit minwise hashing for large-scale linear learning"
)]
pub struct Cli {
    /// TOML file of default flag values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = "HASHLEARN_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write b-bit minwise sketches of a dataset to a binary sketch file.
    Sketch {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Universe size D; defaults to the largest feature index.
        #[arg(long)]
        universe: Option<u64>,
        /// Omit the label section; the file is then exactly header plus records.
        #[arg(long)]
        no_labels: bool,
    },
    /// Expand a sketch file into one-hot sparse text, or add feature combinations to sparse text.
    Expand(ExpandArgs),
    /// Train one model and save it.
    Train {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Where to write the model.
        #[arg(long)]
        model: PathBuf,
        /// Weight vector length; defaults to the largest feature index.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Evaluate a saved model, or without `--model` run the train/evaluate grid and emit CSV.
    Eval {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Check a closed-form moment against Monte Carlo simulation.
    McVerify(McArgs),
    /// Compare b-bit hashing against VW at equal storage and emit CSV.
    Compare {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Generate planted-prototype synthetic data as sparse text.
    Synth {
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print dataset statistics.
    Stats {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        zero_is_negative: bool,
    },
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub synth_n: Option<usize>,
    #[arg(long)]
    pub synth_universe: Option<u64>,
    /// Features per example.
    #[arg(long)]
    pub synth_f: Option<usize>,
    /// Fraction of prototype features each example keeps.
    #[arg(long)]
    pub synth_sep: Option<f64>,
    #[arg(long)]
    pub synth_seed: Option<u64>,
}

impl SynthArgs {
    fn any(&self) -> bool {
        self.synth_n.is_some()
            || self.synth_universe.is_some()
            || self.synth_f.is_some()
            || self.synth_sep.is_some()
            || self.synth_seed.is_some()
    }

    /// Spec with unset fields at their defaults.
    pub fn spec(&self) -> SynthSpec {
        SynthSpec {
            n: self.synth_n.unwrap_or(10_000),
            universe_size: self.synth_universe.unwrap_or(1 << 20),
            f_mean: self.synth_f.unwrap_or(100),
            class_sep: self.synth_sep.unwrap_or(0.5),
            seed: self.synth_seed.unwrap_or(0),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Sparse text dataset.
    #[arg(long, conflicts_with_all = ["synth_n", "synth_universe", "synth_f", "synth_sep", "synth_seed"])]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Comma-separated sketch sizes.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    pub k: Option<Vec<usize>>,
    /// Comma-separated bit widths.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    pub b: Option<Vec<u8>>,
    /// Comma-separated penalty values.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    pub c: Option<Vec<f64>>,
    /// bbit, vw, rp or raw.
    #[arg(long)]
    pub method: Option<Method>,
    /// hinge or logistic.
    #[arg(long)]
    pub loss: Option<LossKind>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of examples used for training.
    #[arg(long)]
    pub split: Option<f64>,
    /// Maximum passes over the data per model.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Relative duality-gap stopping tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Read label 0 as negative.
    #[arg(long)]
    pub zero_is_negative: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl ExperimentArgs {
    pub fn to_config(&self) -> ExperimentConfig {
        let d = ExperimentConfig::default();
        ExperimentConfig {
            data: self.data.clone(),
            synthetic: self.synth.any().then(|| self.synth.spec()),
            k: self.k.clone().unwrap_or(d.k),
            b: self.b.clone().unwrap_or(d.b),
            c: self.c.clone().unwrap_or(d.c),
            method: self.method.unwrap_or(d.method),
            loss: self.loss.unwrap_or(d.loss),
            trials: self.trials.unwrap_or(d.trials),
            seed: self.seed.unwrap_or(d.seed),
            split: self.split.unwrap_or(d.split),
            epochs: self.epochs.unwrap_or(d.epochs),
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            zero_is_negative: self.zero_is_negative,
            output: self.output.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    /// Sketch file, or sparse text with `--combinations`.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Sign-hash the expanded vectors into this many buckets.
    #[arg(long, conflicts_with = "combinations")]
    pub vw_buckets: Option<usize>,
    /// Seed for `--vw-buckets`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Append pairwise feature products to sparse text.
    #[arg(long)]
    pub combinations: bool,
    /// Also append three-way products, keeping one in this many.
    #[arg(long, requires = "combinations")]
    pub triples_mod: Option<u64>,
    /// Universe size of the text input; defaults to the largest feature index.
    #[arg(long, requires = "combinations")]
    pub universe: Option<u64>,
    #[arg(long)]
    pub zero_is_negative: bool,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// eq2, thm1, eq8, eq14 or eq18.
    #[arg(long)]
    pub formula: McFormula,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub b: Option<u8>,
    #[arg(long)]
    pub resemblance: Option<f64>,
    #[arg(long)]
    pub universe: Option<u64>,
    /// Set sparsity f/D for the b-bit checks.
    #[arg(long)]
    pub sparsity: Option<f64>,
    /// Set size for the full minwise check.
    #[arg(long)]
    pub set_size: Option<u64>,
    /// Projection sparsity parameter.
    #[arg(long)]
    pub s: Option<f64>,
    /// Nonzeros per vector for the projection checks.
    #[arg(long)]
    pub nnz: Option<usize>,
}
