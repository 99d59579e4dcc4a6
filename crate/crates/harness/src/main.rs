use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use cmawm_harness::config::{self, Algorithm, FileConfig, Overrides};
use cmawm_harness::output;
use cmawm_harness::{aggregate, run_trials, Outcome};

#[derive(Parser)]
#[command(
    name = "cmawm",
    version,
    about = "Run and summarize margin CMA-ES benchmark trials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials and write a run directory.
    Run(RunArgs),
    /// Aggregate one or more trials CSV files into a summary CSV.
    Summarize {
        /// Trials CSV files or run directories.
        #[arg(long = "in", required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the long-format plot data here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with the same fields; flags given here win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    algo: Option<Algorithm>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n_co: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Budget is N times this many evaluations.
    #[arg(long)]
    budget_mult: Option<f64>,
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    eig_floor: Option<f64>,
    #[arg(long)]
    no_postprocess: bool,
    /// Elitist only: move the mean to the raw sample instead of its encoding.
    #[arg(long)]
    ablate_mean_v: bool,
    /// Write per-iteration traces.
    #[arg(long)]
    trace: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

fn run(args: RunArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let overrides = Overrides {
        algo: args.algo,
        problem: args.problem,
        dim: args.dim,
        n_co: args.n_co,
        trials: args.trials,
        seed: args.seed,
        budget_mult: args.budget_mult,
        target: args.target,
        eig_floor: args.eig_floor,
        no_postprocess: args.no_postprocess,
        ablate_mean_v: args.ablate_mean_v,
        trace: args.trace,
        out: args.out,
        jobs: args.jobs,
    };
    let matrix = config::resolve(file, overrides)?;
    let mut records = Vec::new();
    for cell in &matrix.cells {
        log::info!(
            "running {} on {} N={} ({} trials)",
            cell.algo,
            cell.problem,
            cell.dim,
            cell.trials
        );
        records.extend(run_trials(cell, matrix.jobs)?);
    }
    let summary = output::write_run(&matrix.out, &matrix.cells, &records)?;
    for row in &summary {
        println!(
            "{} {} N={}: success {}/{}, adjusted median {}",
            row.algo,
            row.problem,
            row.dim,
            row.successes,
            row.trials,
            row.adjusted_median
                .map_or("n/a".to_owned(), |v| format!("{v:.1}"))
        );
    }
    Ok(())
}

fn summarize(input: Vec<PathBuf>, out: PathBuf, plot: Option<PathBuf>) -> Result<()> {
    let mut outcomes = Vec::new();
    for path in input {
        let path = if path.is_dir() {
            path.join(output::TRIALS_FILE)
        } else {
            path
        };
        let rows = output::read_trials(&path)?;
        outcomes.extend(rows.iter().map(Outcome::from));
    }
    let summary = aggregate(&outcomes);
    output::write_summary(&out, &summary).context("writing summary")?;
    if let Some(plot) = plot {
        output::write_plot(&plot, &summary).context("writing plot data")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Summarize { input, out, plot } => summarize(input, out, plot),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
