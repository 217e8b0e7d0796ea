//! `porosplit`: runs, sweeps and convergence studies for the Biot solver.

mod commands;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "porosplit",
    version,
    about = "Fixed-stress space-time solver for Biot poroelasticity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario; writes report.csv, snapshots.csv and field plots.
    Solve(SolveArgs),
    /// Run a scenario once per tuning multiple; writes sweep.csv.
    SweepOmega(SweepArgs),
    /// Repeat a sweep while varying one discretization parameter; writes study.csv.
    Study(StudyArgs),
    /// Convergence rates against manufactured solutions; writes rates.csv.
    Mms(MmsArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Solve each slab as one coupled system instead of iterating.
    #[arg(long)]
    monolithic: bool,
    /// Skip the SVG field plots.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Multiples of the optimal tuning parameter, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    omega: Vec<f64>,
    /// Concurrent runs; defaults to the number of CPUs.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    common: Common,
    /// mesh-level, time-step, space-degree or time-scheme.
    #[arg(long)]
    vary: String,
    /// Values of the varied parameter, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    /// Tuning multiples; defaults to the one in the config.
    #[arg(long, value_delimiter = ',')]
    omega: Vec<f64>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MmsAxis {
    Time,
    Space,
}

#[derive(Args)]
struct MmsArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Time scheme, e.g. dG(0) or cGP(1).
    #[arg(long, default_value = "cGP(1)")]
    scheme: String,
    /// Pressure degree s.
    #[arg(long, default_value_t = 0)]
    degree: usize,
    /// Refine in time (slab counts) or space (cells per side).
    #[arg(long, value_enum, default_value = "time")]
    vary: MmsAxis,
    /// Refinement sequence; defaults to 8,16,32,64 in time and 4,8,16,32 in space.
    #[arg(long, value_delimiter = ',')]
    values: Vec<usize>,
}

fn jobs(n: Option<usize>) -> usize {
    n.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("POROSPLIT_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => {
            commands::solve(&a.common.config, &a.common.out, a.monolithic, !a.no_plots)
        }
        Command::SweepOmega(a) => {
            commands::sweep(&a.common.config, &a.common.out, &a.omega, jobs(a.jobs))
        }
        Command::Study(a) => commands::study(
            &a.common.config,
            &a.common.out,
            &a.vary,
            &a.values,
            &a.omega,
            jobs(a.jobs),
        ),
        Command::Mms(a) => {
            let space = matches!(a.vary, MmsAxis::Space);
            commands::mms(&a.out, &a.scheme, a.degree, space, &a.values)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("porosplit: some runs did not converge");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("porosplit: {e:#}");
            ExitCode::from(2)
        }
    }
}
