//! `balance` — data-cap-aware bitrate selection from the command line.
//!
//! Exit codes: 0 success, 2 usage errors, 3 infeasible budget, 4 invalid
//! input or configuration, 5 internal failure.

mod commands;

use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand, ValueEnum};

use balance_core::{Error, PenaltyConfig, PenaltyMethod, SlackBits, SweepParams};

#[derive(Parser)]
#[command(name = "balance", version, about = "Data-cap-aware video bitrate selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pick per-segment quality levels for one data cap
    Solve(SolveArgs),
    /// Measure valid/optimal sampling probability across caps
    Sweep(SweepArgs),
    /// Tabulate the energy surface of a two-segment instance
    Landscape(LandscapeArgs),
    /// Compare adaptive selection against fixed quality ladders
    Ladder(LadderArgs),
    /// Grid-search the rational penalty constants
    Tune(TuneArgs),
    /// Emit the penalized model as JSON for external samplers
    ExportQubo(ExportArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Builtin {
    /// Two-segment, four-level demonstration table
    Reference,
}

/// Where the segment table comes from.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputOpts {
    /// Segment table file (.csv or .json)
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Built-in instance
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
}

#[derive(Args)]
struct BudgetOpts {
    /// Data cap in MB
    #[arg(long, value_name = "MB")]
    dmax: f64,
    /// Quantization unit in MB for slack and exact-solver arithmetic
    #[arg(long, value_name = "MB", default_value_t = balance_core::DEFAULT_UNIT_MB)]
    unit: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Slack,
    Dpa,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SweepMethodArg {
    Slack,
    Dpa,
    Both,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SlackBitsArg {
    /// ceil(log2(U)) bits
    Compact,
    /// ceil(log2(U+1)) bits — covers every residual
    Full,
}

#[derive(Args)]
struct PenaltyOpts {
    /// One-hot constraint weight (default: twice the table's best VMAF)
    #[arg(long, value_name = "W")]
    lambda0: Option<f64>,
    /// Slack penalty weight (default: twice the table's best VMAF)
    #[arg(long, value_name = "W")]
    lambda1: Option<f64>,
    /// Linear coefficient of the rational penalty
    #[arg(long, value_name = "W", default_value_t = balance_core::DEFAULT_MU1)]
    mu1: f64,
    /// Quadratic coefficient of the rational penalty
    #[arg(long, value_name = "W", default_value_t = balance_core::DEFAULT_MU2)]
    mu2: f64,
    /// Cap-to-threshold ratio of the rational penalty (> 1)
    #[arg(long, value_name = "R", default_value_t = balance_core::DEFAULT_MU3)]
    mu3: f64,
    /// Slack register sizing
    #[arg(long, value_enum, default_value_t = SlackBitsArg::Compact)]
    slack_bits: SlackBitsArg,
}

impl PenaltyOpts {
    fn config(&self, method: PenaltyMethod) -> PenaltyConfig {
        let base = match method {
            PenaltyMethod::Slack => PenaltyConfig::slack(),
            PenaltyMethod::Dpa => PenaltyConfig::dpa(),
        };
        PenaltyConfig {
            lambda0: self.lambda0,
            lambda1: self.lambda1,
            mu1: self.mu1,
            mu2: self.mu2,
            mu3: self.mu3,
            slack_bits: match self.slack_bits {
                SlackBitsArg::Compact => SlackBits::Compact,
                SlackBitsArg::Full => SlackBits::Full,
            },
            ..base
        }
    }
}

#[derive(Args)]
struct SamplerOpts {
    /// Annealing chains per trial
    #[arg(long, default_value_t = 1000)]
    shots: usize,
    /// Independent trials averaged into each reported cell
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Temperature steps per chain
    #[arg(long, default_value_t = balance_core::solvers::DEFAULT_SWEEPS)]
    sweeps: usize,
    /// Master seed; every reported cell derives its own stream from it
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Worker threads (0 = one per core)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

impl SamplerOpts {
    fn params(&self) -> SweepParams {
        SweepParams {
            shots: self.shots,
            trials: self.trials,
            sweeps: self.sweeps,
            seed: self.seed,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputOpts {
    /// Report file (stdout when omitted; writes are atomic)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    /// Exhaustive enumeration of the penalized model
    Exact,
    /// Seeded simulated annealing
    Anneal,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    budget: BudgetOpts,
    /// Budget encoding
    #[arg(long, value_enum, default_value_t = MethodArg::Dpa)]
    method: MethodArg,
    #[command(flatten)]
    penalty: PenaltyOpts,
    #[arg(long, value_enum, default_value_t = SolverArg::Exact)]
    solver: SolverArg,
    /// Annealing chains (annealing solver only)
    #[arg(long, default_value_t = 1000)]
    shots: usize,
    /// Temperature steps per chain (annealing solver only)
    #[arg(long, default_value_t = balance_core::solvers::DEFAULT_SWEEPS)]
    sweeps: usize,
    /// Sampler seed (annealing solver only)
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Worker threads (0 = one per core)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Result file (stdout when omitted); always JSON
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Caps in MB (default: 8 evenly spaced over the instance's usage range)
    #[arg(long, value_name = "MB,...", value_delimiter = ',')]
    caps: Option<Vec<f64>>,
    /// Quantization unit in MB
    #[arg(long, value_name = "MB", default_value_t = balance_core::DEFAULT_UNIT_MB)]
    unit: f64,
    /// Budget encoding(s) to measure
    #[arg(long, value_enum, default_value_t = SweepMethodArg::Both)]
    method: SweepMethodArg,
    #[command(flatten)]
    penalty: PenaltyOpts,
    #[command(flatten)]
    sampler: SamplerOpts,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct LandscapeArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    budget: BudgetOpts,
    /// Budget encoding
    #[arg(long, value_enum, default_value_t = MethodArg::Dpa)]
    method: MethodArg,
    #[command(flatten)]
    penalty: PenaltyOpts,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct LadderArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Caps in MB (default: 8 evenly spaced over the instance's usage range)
    #[arg(long, value_name = "MB,...", value_delimiter = ',')]
    caps: Option<Vec<f64>>,
    /// Quantization unit in MB
    #[arg(long, value_name = "MB", default_value_t = balance_core::DEFAULT_UNIT_MB)]
    unit: f64,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    budget: BudgetOpts,
    /// JSON file with `mu1`, `mu2`, `mu3` arrays (default: 3x3x3 grid
    /// bracketing the built-in constants)
    #[arg(long, value_name = "PATH")]
    grid_file: Option<PathBuf>,
    #[command(flatten)]
    sampler: SamplerOpts,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    input: InputOpts,
    #[command(flatten)]
    budget: BudgetOpts,
    /// Budget encoding
    #[arg(long, value_enum, default_value_t = MethodArg::Dpa)]
    method: MethodArg,
    #[command(flatten)]
    penalty: PenaltyOpts,
    /// Model file (stdout when omitted); always JSON
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible { .. } => 3,
        Error::Parse { .. }
        | Error::NonRectangular { .. }
        | Error::BadVariant { .. }
        | Error::BadTable(_)
        | Error::BadBudget(_)
        | Error::BadConfig(_)
        | Error::LandscapeShape(_)
        | Error::TooManyVars { .. }
        | Error::TooLarge(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => 4,
        _ => 5,
    }
}

fn configure_threads(jobs: usize) {
    if jobs > 0 {
        // Ignore "already initialized": only the first configuration wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => {
            configure_threads(args.jobs);
            commands::solve(&args)
        }
        Command::Sweep(args) => {
            configure_threads(args.sampler.jobs);
            commands::sweep(&args)
        }
        Command::Landscape(args) => commands::landscape(&args),
        Command::Ladder(args) => commands::ladder(&args),
        Command::Tune(args) => {
            configure_threads(args.sampler.jobs);
            commands::tune(&args)
        }
        Command::ExportQubo(args) => commands::export_qubo(&args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        process::exit(exit_code(&e));
    }
}
