//! `qknit` command-line front end: partition, verify, budget and bench.

pub mod bench;
pub mod commands;
pub mod input;
pub mod report;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qknit_core::model::ModelError;
use qknit_core::solve::SolveError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;
pub const EXIT_GROUPED: i32 = 4;
pub const EXIT_DEVIATION: i32 = 5;

/// Pipeline stage that produced an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Args,
    Parse,
    Encode,
    Solve,
    Decode,
    Load,
    Validate,
    Knit,
    Io,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Args => "args",
            Stage::Parse => "parse",
            Stage::Encode => "encode",
            Stage::Solve => "solve",
            Stage::Decode => "decode",
            Stage::Load => "load",
            Stage::Validate => "validate",
            Stage::Knit => "knit",
            Stage::Io => "io",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub stage: Stage,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn new(stage: Stage, message: impl Into<String>) -> Self {
        CliError {
            stage,
            message: message.into(),
            exit_code: EXIT_ERROR,
        }
    }

    pub fn with_exit(mut self, code: i32) -> Self {
        self.exit_code = code;
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.stage.name(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        let stage = match &e {
            SolveError::Model(ModelError::InconsistentModel(_)) => Stage::Decode,
            SolveError::Model(_) => Stage::Encode,
            SolveError::Solver(_) | SolveError::TooLarge { .. } => Stage::Solve,
        };
        CliError::new(stage, e.to_string())
    }
}

pub(crate) fn write_file(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::new(Stage::Io, format!("{}: {e}", path.display())))
}

#[derive(Debug, Parser)]
#[command(name = "qknit", version, about = "Minimal-overhead quantum circuit partitioning with gate and wire cuts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find a minimal-overhead partitioning and write a JSON report.
    Partition(PartitionArgs),
    /// Knit a reported solution on the simulator and compare with the uncut circuit.
    Verify(VerifyArgs),
    /// Largest cut counts that fit a sampling budget.
    Budget(BudgetArgs),
    /// Sweep generated circuits over capacities and cut modes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    /// Internal exact search when the graph is small enough, else the external solver.
    Auto,
    Internal,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Samples,
    Qubits,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: SolverChoice,
    /// Solver command line; defaults to $QKNIT_SMT_SOLVER, then `z3 -in`.
    #[arg(long, value_name = "CMD")]
    pub solver_cmd: Option<String>,
    /// Keep one solver process and tighten the bound incrementally.
    #[arg(long)]
    pub incremental: bool,
    /// Wall-clock limit in seconds.
    #[arg(long, value_name = "SECONDS")]
    pub timeout: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BudgetFlags {
    /// Maximum total number of samples.
    #[arg(long, value_name = "B", conflicts_with_all = ["freq", "runtime"])]
    pub budget_shots: Option<f64>,
    /// Sampling rate, e.g. `1e6`, `1MHz`.
    #[arg(long, value_name = "HZ")]
    pub freq: Option<String>,
    /// Runtime, e.g. `86400`, `1d`, `12h`.
    #[arg(long, value_name = "SECONDS")]
    pub runtime: Option<String>,
    /// Shots the uncut circuit needs.
    #[arg(long, value_name = "S0", default_value_t = 8000.0)]
    pub base_shots: f64,
    /// Drop the sampling budget entirely.
    #[arg(long, conflicts_with_all = ["budget_shots", "freq", "runtime"])]
    pub no_budget: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PartitionArgs {
    /// Circuit file (.json or .qasm).
    #[arg(long = "in", value_name = "FILE", required_unless_present = "gen", conflicts_with = "gen")]
    pub input: Option<PathBuf>,
    /// Generated circuit: ghz:N, qaoa:N[:FRAC[:SEED[:LAYERS]]], hea:N[:LAYERS[:SEED]], bridge:L:M:KW:KV.
    #[arg(long, value_name = "NAME[:PARAMS]")]
    pub gen: Option<String>,
    #[arg(long, value_name = "N")]
    pub partitions: Option<usize>,
    #[arg(long, value_name = "Q", conflicts_with = "reduce_factor")]
    pub max_qubits: Option<usize>,
    /// Capacity is ceil(width / d * (1 + ancilla-frac)).
    #[arg(long, value_name = "D")]
    pub reduce_factor: Option<f64>,
    #[arg(long, value_name = "F", default_value_t = 0.0, requires = "reduce_factor")]
    pub ancilla_frac: f64,
    #[command(flatten)]
    pub budget: BudgetFlags,
    #[arg(long, value_name = "K")]
    pub max_cuts: Option<usize>,
    #[arg(long, value_name = "S")]
    pub max_overhead: Option<f64>,
    /// Forbid gate cuts.
    #[arg(long)]
    pub wire_only: bool,
    /// No classical communication between partitions.
    #[arg(long)]
    pub no_cc: bool,
    /// No ancilla qubits for Bell pairs.
    #[arg(long)]
    pub no_ancilla: bool,
    #[arg(long, value_enum, default_value = "samples")]
    pub objective: ObjectiveArg,
    /// Fix every vertex of a qubit to a partition, as QUBIT:PARTITION.
    #[arg(long, value_name = "Q:P")]
    pub pin: Vec<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_name = "FILE")]
    pub smt2_out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub dot_out: Option<PathBuf>,
    /// Write the input circuit as JSON, e.g. to verify a generated circuit later.
    #[arg(long, value_name = "FILE")]
    pub circuit_out: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Report written by `partition`.
    #[arg(long, value_name = "FILE")]
    pub solution: PathBuf,
    /// Pauli string, character k acting on qubit k.
    #[arg(long, value_name = "PAULIS")]
    pub observable: String,
    /// Also print a sampled estimate with this many shots.
    #[arg(long, value_name = "N")]
    pub shots: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    #[arg(long, value_delimiter = ',', default_value = "1kHz,1MHz,1GHz")]
    pub freq: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1d")]
    pub runtime: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "bell_group,nine_pow,sixteen_pow")]
    pub families: Vec<String>,
    #[arg(long, default_value_t = 8000.0)]
    pub base_shots: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Suites with optional size ranges: ghz:4..8, qaoa:4..8, hea:4..6, bridge.
    #[arg(long, value_delimiter = ',', default_value = "ghz:4..8")]
    pub suite: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub reduce_factors: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub ancilla_fracs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "combined,wire-only")]
    pub modes: Vec<String>,
    /// Seeds for the randomized generators.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    /// Extra-edge fraction of the QAOA graphs.
    #[arg(long, default_value_t = 0.5)]
    pub qaoa_frac: f64,
    #[command(flatten)]
    pub budget: BudgetFlags,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: SolverChoice,
    #[arg(long, value_name = "CMD")]
    pub solver_cmd: Option<String>,
    /// Per-instance limit in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    /// Fill the time column.
    #[arg(long)]
    pub timings: bool,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Partition(a) => commands::partition(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Budget(a) => commands::budget(&a),
        Command::Bench(a) => bench::run(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qknit: {e}");
            e.exit_code
        }
    }
}
