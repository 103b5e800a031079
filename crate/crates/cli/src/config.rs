use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dilute_cw::asymptotics::Variant;
use dilute_cw::exact::Moment;
use dilute_cw::TestFunction;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "dilute-cw", version, about = "Ising model on dilute directed Erdős–Rényi graphs")]
pub struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "DILUTE_CW_THREADS")]
    pub threads: Option<usize>,

    /// Output file; standard output when absent. Run metadata goes to `<out>.meta.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// Everything that determines the primary output. Serialized into every
/// artifact as the config echo and accepted back by `serde_json`.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Sample a graph and write it in the text format.
    GraphSample(GraphSampleArgs),
    /// Enumerate all configurations of one graph.
    ExactPartition(ExactPartitionArgs),
    /// Annealed first (and second) moment from the exact coefficients.
    ExactMoments(MomentArgs),
    /// Brute-force disorder average for tiny N.
    ExactOracle(OracleArgs),
    /// Large-N prediction for log E Z next to the exact value.
    AsymPredict(PredictArgs),
    /// Taylor coefficients of F(p, .) and the scaled remainders.
    SeriesCheck(SeriesArgs),
    /// Glauber chains on one graph; emits the samples as CSV.
    McmcRun(McmcArgs),
    /// Many graphs, many chains, distances to the limiting normal law.
    CltExperiment(CltArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GraphSample(_) => "graph-sample",
            Command::ExactPartition(_) => "exact-partition",
            Command::ExactMoments(_) => "exact-moments",
            Command::ExactOracle(_) => "exact-oracle",
            Command::AsymPredict(_) => "asym-predict",
            Command::SeriesCheck(_) => "series-check",
            Command::McmcRun(_) => "mcmc-run",
            Command::CltExperiment(_) => "clt-experiment",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GraphSampleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExactPartitionArgs {
    /// Required unless `--graph` is given.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// Graph file; sampled from `--seed` when absent.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit the magnetization law as `atom,weight` CSV instead of JSON.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MomentArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// one, gauss, cosine or bump(center,width).
    #[arg(long, default_value = "one")]
    pub g: TestFunction,
    /// Also compute the second moment and the variance ratio.
    #[arg(long)]
    pub second: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OracleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value = "one")]
    pub g: TestFunction,
    /// first or second.
    #[arg(long, default_value = "first")]
    pub moment: Moment,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value = "one")]
    pub g: TestFunction,
    /// a, b or c.
    #[arg(long, default_value = "c")]
    pub variant: Variant,
    /// Emit `n,exact,predicted,ratio_minus_one` CSV for N = 2, 4, 8, ... up to `--n`.
    #[arg(long)]
    pub curve: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SeriesArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    /// Number of Taylor coefficients, at most 16.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct McmcArgs {
    /// Required unless `--graph` is given.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Graph seed; also the default source of the chain seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub chain_seed: Option<u64>,
    /// Total sweeps per chain; default burn-in plus 1000 retained samples.
    #[arg(long)]
    pub sweeps: Option<u64>,
    /// Default `ceil(10 sqrt(N))`.
    #[arg(long)]
    pub burnin: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub thin: u64,
    #[arg(long, default_value_t = 1)]
    pub replicas: u32,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CltArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 10)]
    pub graphs: u64,
    /// Master graph seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub chain_seed: Option<u64>,
    #[arg(long)]
    pub sweeps: Option<u64>,
    #[arg(long)]
    pub burnin: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub thin: u64,
    #[arg(long, default_value_t = 4)]
    pub replicas: u32,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Also write every retained sample as CSV to this file.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
}
