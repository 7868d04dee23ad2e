use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "mol", version, about = "Universal Markov order estimation for symbolic sequences")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Master seed (defaults to $MOL_SEED, then 0).
    #[arg(long, global = true, env = "MOL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Never changes the output.
    #[arg(long, global = true, default_value_t = 0)]
    #[serde(skip)]
    pub jobs: usize,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout (`simulate` writes PATH.json and PATH.csv).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendName {
    Ppm,
    Lz78,
}

impl BackendName {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendName::Ppm => "ppm",
            BackendName::Lz78 => "lz78",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct InputOpts {
    /// Split input on whitespace instead of reading bytes.
    #[arg(long)]
    pub tokens: bool,
    /// JSON array of tokens fixing the alphabet.
    #[arg(long, value_name = "FILE")]
    pub alphabet: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Estimate Markov orders of input files.
    Estimate(EstimateArgs),
    /// Empirical entropy profile and optional mutual-information profile.
    Profile(ProfileArgs),
    /// Consistency experiment on a simulated source.
    Simulate(SimulateArgs),
    /// Run invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = BackendName::Ppm)]
    pub backend: BackendName,
    /// Evaluate every PPM order literally.
    #[arg(long)]
    pub ppm_exact: bool,
    /// Also report the Krichevsky-Trofimov order.
    #[arg(long)]
    pub kt: bool,
    /// Also report the Merhav-Gutman-Ziv order with this threshold.
    #[arg(long, value_name = "LAMBDA")]
    pub mgz: Option<f64>,
    /// Order test `M:alpha` with the selected backend.
    #[arg(long, value_name = "M:ALPHA", value_parser = parse_ram)]
    pub ram: Option<(usize, f64)>,
    #[command(flatten)]
    pub input: InputOpts,
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    pub file: PathBuf,
    /// Largest order (default: maximal repetition length + 1, capped at n - 1).
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Block lengths for the mutual-information profile.
    #[arg(long, value_delimiter = ',')]
    pub blocks: Vec<usize>,
    #[arg(long, value_enum, default_value_t = BackendName::Ppm)]
    pub backend: BackendName,
    #[arg(long)]
    pub ppm_exact: bool,
    #[command(flatten)]
    pub input: InputOpts,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Markov order of the source (default: 1 for chains, 0 with --iid).
    #[arg(long)]
    pub order: Option<usize>,
    /// Binary order-1 chain with this staying probability.
    #[arg(long, conflicts_with_all = ["iid"])]
    pub sticky: Option<f64>,
    /// i.i.d. source with these symbol probabilities.
    #[arg(long, value_delimiter = ',')]
    pub iid: Vec<f64>,
    /// Alphabet size of a random chain.
    #[arg(long, default_value_t = 2)]
    pub alphabet_size: usize,
    /// Dirichlet concentration of a random chain.
    #[arg(long, default_value_t = 1.0)]
    pub concentration: f64,
    /// Seed of a random chain's transition table.
    #[arg(long, default_value_t = 0)]
    pub source_seed: u64,
    /// Sample lengths.
    #[arg(long = "n", value_delimiter = ',', required = true)]
    pub lengths: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ppm")]
    pub backend: Vec<BackendName>,
    #[arg(long)]
    pub ppm_exact: bool,
    #[arg(long)]
    pub kt: bool,
    #[arg(long, value_name = "LAMBDA")]
    pub mgz: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Suites to run (default: all): forms, ppm-closed, shift, drop, blocks,
    /// monotone, hsum, replen, shifted-code, repcap, kt-order, order-rate,
    /// kraft, ppm-gap, mi-bound.
    #[arg(long, value_delimiter = ',')]
    pub suite: Vec<String>,
    /// Exhaustive budget: all binary strings of length 1..=N.
    #[arg(long = "n", default_value_t = 10)]
    pub max_n: usize,
    /// Number of random cases per suite.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    #[arg(long, default_value_t = 2000)]
    pub random_max_n: usize,
    #[arg(long, default_value_t = 4)]
    pub random_max_d: usize,
    /// Negative control: check Kraft sums of the code H = -1.
    #[arg(long, hide = true)]
    pub faulty_backend: bool,
}

fn parse_ram(s: &str) -> Result<(usize, f64), String> {
    let (m, a) = s.split_once(':').ok_or_else(|| format!("expected M:ALPHA, got `{s}`"))?;
    let m = m.parse().map_err(|e| format!("order `{m}`: {e}"))?;
    let a = a.parse().map_err(|e| format!("alpha `{a}`: {e}"))?;
    Ok((m, a))
}
