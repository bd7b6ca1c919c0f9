//! `concentratable`: compute, sample and verify Concentratable Entanglement.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "concentratable", version, about = "Concentratable Entanglement via the parallelized SWAP test")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute CE for one or more qubit subsets.
    Ce(CeArgs),
    /// Print the exact SWAP-test outcome distribution.
    Dist(DistArgs),
    /// Sample SWAP-test shots and estimate CE.
    Sample(SampleArgs),
    /// Run the randomized property suite.
    Verify(VerifyArgs),
    /// Tabulate C_GHZ - C_W for n = 4..n_max.
    Compare(CompareArgs),
    /// Run the test, then check the singlets it leaves behind.
    Distill(DistillArgs),
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct StateArgs {
    /// GHZ state on N qubits.
    #[arg(long, value_name = "N")]
    pub ghz: Option<usize>,
    /// W state on N qubits.
    #[arg(long, value_name = "N")]
    pub w: Option<usize>,
    /// Haar-random state on N qubits (see --haar-seed).
    #[arg(long, value_name = "N")]
    pub haar: Option<usize>,
    /// State file: {"n": N, "amplitudes": [[re, im], ...]}.
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
#[group(required = false, multiple = false)]
pub struct SubsetArgs {
    /// Subset as a label mask, bit k = qubit k (decimal, 0b or 0x).
    #[arg(long, value_name = "MASK")]
    pub subset_mask: Option<String>,
    /// Canonical subset {0, .., c-1}.
    #[arg(long, value_name = "C")]
    pub cardinality: Option<usize>,
    /// One canonical subset per cardinality 1..=n.
    #[arg(long)]
    pub all_cardinalities: bool,
    /// Every nonempty subset.
    #[arg(long)]
    pub all_subsets: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Auto,
    Purity,
    Distribution,
    EvenWeight,
    Shots,
}

#[derive(Args, Debug)]
pub struct CeArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Seed for --haar.
    #[arg(long, default_value_t = 0)]
    pub haar_seed: u64,
    #[command(flatten)]
    pub subset: SubsetArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Estimate from this many shots (implies --method shots).
    #[arg(long, requires = "seed")]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 0)]
    pub haar_seed: u64,
    /// Tested qubits as a label mask (default: all).
    #[arg(long, value_name = "MASK")]
    pub subset_mask: Option<String>,
    /// Fail unless every odd-weight outcome has zero probability.
    #[arg(long)]
    pub check_odd_zero: bool,
    /// Drop zero-probability rows.
    #[arg(long)]
    pub nonzero: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 0)]
    pub haar_seed: u64,
    /// Tested qubits as a label mask (default: all).
    #[arg(long, value_name = "MASK")]
    pub subset_mask: Option<String>,
    #[arg(long)]
    pub shots: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Restrict to the named properties (repeatable).
    #[arg(long = "property", value_name = "NAME")]
    pub properties: Vec<String>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 6)]
    pub max_qubits: usize,
    /// Perturbation sizes for the error bound (repeatable).
    #[arg(long = "epsilon", value_name = "EPS")]
    pub epsilons: Vec<f64>,
    /// Base seed; trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DistillArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 0)]
    pub haar_seed: u64,
    /// Tested qubits as a label mask (default: all).
    #[arg(long, value_name = "MASK")]
    pub subset_mask: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    #[arg(long)]
    pub seed: u64,
    /// Post-select this outcome instead of sampling (first tested qubit leftmost).
    #[arg(long, value_name = "BITS")]
    pub outcome: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = commands::apply_env() {
        return report(f);
    }
    let result = match cli.command {
        Command::Ce(a) => commands::ce(a),
        Command::Dist(a) => commands::dist(a),
        Command::Sample(a) => commands::sample(a),
        Command::Verify(a) => commands::verify(a),
        Command::Compare(a) => commands::compare(a),
        Command::Distill(a) => commands::distill(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    eprintln!("error: {}", f.message);
    ExitCode::from(f.code)
}
