use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use genex::harness::{
    export_ecdf, expand_cells, load_manifest, load_runs, persist, render_table, run_experiment, run_seed,
    worker_count, EcdfGroup, ExperimentSpec, TableMode, MANIFEST_FILE, RUNS_FILE,
};
use genex::MappingSpec;

/// Genotype compression and expansion experiments.
#[derive(Debug, Parser)]
#[command(name = "genex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute every run described by a config file.
    Run {
        config: PathBuf,
        /// Results directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Full-scale budget factor (100000) and 50 instances per cell.
        #[arg(long)]
        paper_scale: bool,
    },
    /// Print a comparison table against the `def` mapping.
    Table {
        results: PathBuf,
        #[arg(long, default_value = "benchmark")]
        mode: TableMode,
        /// Reference mapping code.
        #[arg(long, default_value = "def")]
        reference: MappingSpec,
    },
    /// Print ECDF data (CSV) for a function category or `all`.
    Ecdf {
        results: PathBuf,
        #[arg(long)]
        group: EcdfGroup,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Show the seeds behind a results directory.
    SeedInfo { results: PathBuf },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, paper_scale } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut spec = ExperimentSpec::from_toml_str(&text).with_context(|| format!("in {}", config.display()))?;
            if paper_scale {
                spec.paper_scale();
            }
            let workers = worker_count()?;
            let cells = expand_cells(&spec).len();
            eprintln!(
                "running {cells} cells x {} instances on {workers} workers",
                spec.execution.instances_per_cell
            );
            let records = run_experiment(&spec, workers)?;
            persist(&out, &spec, &text, &records).with_context(|| format!("writing {}", out.display()))?;
            let failures = records.iter().filter(|r| !r.is_ok()).count();
            eprintln!(
                "wrote {} records ({failures} failed) to {}",
                records.len(),
                out.join(RUNS_FILE).display()
            );
            if failures > 0 {
                anyhow::bail!("{failures} runs failed; see the message column of {RUNS_FILE}");
            }
        }
        Command::Table { results, mode, reference } => {
            let records = load_runs(&results).with_context(|| format!("reading {}", results.display()))?;
            print!("{}", render_table(&records, mode, reference)?);
        }
        Command::Ecdf { results, group, out } => {
            let records = load_runs(&results).with_context(|| format!("reading {}", results.display()))?;
            let csv = export_ecdf(&records, group)?;
            match out {
                Some(path) => fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
        }
        Command::SeedInfo { results } => {
            let m = load_manifest(&results).with_context(|| format!("reading {MANIFEST_FILE} in {}", results.display()))?;
            let records = load_runs(&results)?;
            println!("master_seed = {}", m.master_seed);
            println!("instances_per_cell = {}", m.instances_per_cell);
            println!("budget_factor = {}", m.budget_factor);
            println!("cells = {}", m.cells);
            println!("records = {} ({} failed)", m.records, m.failures);
            for r in records.iter().filter(|r| r.instance == 0) {
                println!(
                    "cell {} {} {}/{}: first run seed {}",
                    r.cell,
                    r.problem,
                    r.algorithm,
                    r.mapping,
                    run_seed(m.master_seed, r.cell, 0)
                );
            }
        }
    }
    Ok(())
}
