use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use drl_core::drl::Aggregation;
use drl_core::harness::{self, ExperimentConfig};
use drl_core::par;

#[derive(Parser)]
#[command(name = "drl", version, about = "Distributed robust learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when neither this nor `output_path` is set.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Export one generated dataset as CSV.
    Gen {
        #[command(flatten)]
        common: Common,
        /// Schedule entry to generate.
        #[arg(long, default_value_t = 0)]
        lambda_index: usize,
        #[arg(long, default_value_t = 0)]
        repetition: usize,
    },
    /// One DRL run; writes every node estimate followed by both aggregates.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        lambda_index: usize,
        #[arg(long, default_value_t = 0)]
        repetition: usize,
    },
    /// Sweep the λ schedule over all configured methods.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Overrides `repetitions`.
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Tabulate α and C_α for the standard β* values.
    Table1 {
        #[command(flatten)]
        common: Common,
    },
    /// Compare DRL and averaging under latency and communication errors.
    Faults {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        repetitions: Option<usize>,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let path = common.config.as_ref().context("--config is required for this command")?;
    let mut config = ExperimentConfig::from_file(path)?;
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_path = Some(out.clone());
    }
    Ok(config)
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    let mut w = writer(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn with_repetitions(mut config: ExperimentConfig, reps: Option<usize>) -> Result<ExperimentConfig> {
    if let Some(r) = reps {
        config.repetitions = r;
    }
    config.validate()?;
    Ok(config)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Gen { common, lambda_index, repetition } => {
            let config = load(&common)?;
            let dataset = config.generate(lambda_index, repetition)?;
            let mut w = writer(config.output_path.as_deref())?;
            dataset.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Run { common, lambda_index, repetition } => {
            let config = load(&common)?;
            let Some(entry) = config.lambda_schedule.get(lambda_index) else {
                bail!("no schedule entry {lambda_index}");
            };
            let dataset = config.generate(lambda_index, repetition)?;
            let seed = config.fault_seed(lambda_index, repetition);
            let run = config.run_drl(&dataset, entry.lambda, &config.faults, seed)?;
            let avg = run.reaggregate(Aggregation::Average, &config.median)?;
            let mut w = writer(config.output_path.as_deref())?;
            for e in &run.faulted_estimates {
                writeln!(w, "{}", e.to_csv_row())?;
            }
            writeln!(w, "{}", run.aggregate.to_csv_row())?;
            writeln!(w, "{}", avg.aggregate.to_csv_row())?;
            w.flush()?;
            eprintln!(
                "lambda={} k={} drl_error={:.6} avg_error={:.6} comm_bytes={} late={:?} corrupted={:?} broken={:?}",
                entry.lambda,
                run.k(),
                harness::relative_error(&dataset, &run.aggregate)?,
                harness::relative_error(&dataset, &avg.aggregate)?,
                run.comm_bytes,
                run.late_nodes,
                run.comm_corrupted,
                run.broken_nodes,
            );
        }
        Command::Sweep { common, repetitions } => {
            let config = with_repetitions(load(&common)?, repetitions)?;
            let report = harness::run_sweep(&config)?;
            emit(config.output_path.as_deref(), &report.to_csv())?;
        }
        Command::Table1 { common } => {
            let out = common.out.clone().or(match &common.config {
                Some(_) => load(&common)?.output_path,
                None => None,
            });
            emit(out.as_deref(), &harness::run_table1()?)?;
        }
        Command::Faults { common, repetitions } => {
            let config = with_repetitions(load(&common)?, repetitions)?;
            let report = harness::run_fault_study(&config)?;
            emit(config.output_path.as_deref(), &report.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match par::with_threads(par::threads_from_env(), || execute(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
