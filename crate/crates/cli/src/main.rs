mod commands;
mod svg;
mod trace_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const EXIT_FAILED: u8 = 1;
pub const EXIT_MAX_ITERATIONS: u8 = 2;
pub const EXIT_SOLVER_FAILURE: u8 = 3;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;
pub const EXIT_NO_INPUT: u8 = 66;
pub const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(
    name = "lpoa",
    version,
    about = "Polyhedral outer approximation of convex vector optimization problems in l_p norms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the algorithm once and write its trace.
    Run(RunArgs),
    /// Run a problem over several values of p and tabulate the fitted rates.
    Sweep(SweepArgs),
    /// Check the lemma inequalities on a trace, or run the l_p self-test.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
pub struct SolverArgs {
    /// Absolute accuracy of each subproblem's optimal value.
    #[arg(long, default_value_t = 1e-7)]
    pub objective_tol: f64,
    /// Allowed variational-inequality defect of each support point.
    #[arg(long, default_value_t = 1e-6)]
    pub vi_tol: f64,
    /// Iteration cap.
    #[arg(long = "max-iters", default_value_t = 1000)]
    pub max_iters: usize,
    /// Seed for pair subsampling; defaults to $LPOA_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct RunArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub eps: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Trace path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Log-log convergence plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub problem: String,
    /// Comma-separated exponents.
    #[arg(long, value_delimiter = ',', default_values_t = [1.25, 1.5, 2.0, 3.0, 4.0, 8.0])]
    pub p_list: Vec<f64>,
    /// Tolerance; each problem has its own default.
    #[arg(long)]
    pub eps: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = "sweep")]
    pub out_dir: PathBuf,
    /// Combined plot of all runs.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Parallel runs; all cores when omitted.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Args)]
#[group(required = true, multiple = false, args = ["trace", "self_test"])]
pub struct VerifyArgs {
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Sampled checks of the l_p gradient, moduli and Hanner inequalities.
    #[arg(long)]
    pub self_test: bool,
    /// Deviation parameter.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let code = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Verify(a) => commands::verify(a),
    };
    ExitCode::from(code)
}
