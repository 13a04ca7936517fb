//! Expands an experiment into cells and executes the run matrix.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolvers::{run, Algorithm};
use crate::genotype::{derive_seed, RngStream};
use crate::mapping::MappingSpec;
use crate::neural::{make_dataset, Architecture, NnProblem, Task};
use crate::problems::{FunctionId, Objective, ProblemInstance};
use crate::puf::{generate_crps, PufProblem};
use crate::stats::ECDF_TARGET_COUNT;

use super::config::{ExperimentSpec, ProblemSpec};
use super::records::{read_runs, write_runs, ProblemKind, RunRecord, RunStatus};

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "GENEX_WORKERS";
pub const RUNS_FILE: &str = "runs.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

// Seed-derivation tags, kept apart so streams never collide.
const TAG_INSTANCE: u64 = 1;
const TAG_CRPS: u64 = 2;
const TAG_RUN: u64 = 3;
const DATASET_SEED: u64 = 0x6e6e_6461_7461;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemVariant {
    Benchmark { function: FunctionId, dimension: usize },
    Puf { stages: usize, crps: usize },
    Nn { task: Task, architecture: Architecture, dataset_size: usize },
}

impl ProblemVariant {
    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemVariant::Benchmark { .. } => ProblemKind::Benchmark,
            ProblemVariant::Puf { .. } => ProblemKind::Puf,
            ProblemVariant::Nn { .. } => ProblemKind::Nn,
        }
    }

    pub fn name(&self) -> String {
        match self {
            ProblemVariant::Benchmark { function, .. } => function.name().to_string(),
            ProblemVariant::Puf { stages, crps } => format!("puf-{stages}-{crps}"),
            ProblemVariant::Nn { task, architecture, .. } => format!("nn-{task}-{architecture}"),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            ProblemVariant::Benchmark { dimension, .. } => *dimension,
            ProblemVariant::Puf { stages, .. } => stages + 1,
            ProblemVariant::Nn { architecture, .. } => architecture.parameter_count(),
        }
    }

    fn category(&self) -> Option<String> {
        match self {
            ProblemVariant::Benchmark { function, .. } => Some(function.category().name().to_string()),
            _ => None,
        }
    }

    /// Build the objective for one instance. Instances depend only on the
    /// master seed and instance index, so every mapping and algorithm sees
    /// the same problem.
    pub fn instantiate(&self, master_seed: u64, instance: usize) -> Result<Box<dyn Objective + Send>> {
        let idx = instance as u64;
        Ok(match self {
            ProblemVariant::Benchmark { function, dimension } => Box::new(ProblemInstance::new(
                *function,
                *dimension,
                derive_seed(master_seed, &[TAG_INSTANCE, idx]),
            )?),
            ProblemVariant::Puf { stages, crps } => {
                let mut rng = RngStream::derive(master_seed, &[TAG_CRPS, *stages as u64, *crps as u64, idx]);
                Box::new(PufProblem::new(generate_crps(*stages, *crps, &mut rng)?.0))
            }
            ProblemVariant::Nn { task, architecture, dataset_size } => {
                let task_index = match task {
                    Task::F1 => 1,
                    Task::F2 => 2,
                    Task::F3 => 3,
                };
                let mut rng = RngStream::derive(DATASET_SEED, &[task_index]);
                Box::new(NnProblem::new(*architecture, make_dataset(*task, *dataset_size, &mut rng)?)?)
            }
        })
    }
}

/// One (problem, algorithm, mapping) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub problem: ProblemVariant,
    pub budget: u64,
    pub algorithm_label: String,
    pub algorithm: Algorithm,
    pub mapping: MappingSpec,
}

/// Cells in problem-major, then algorithm, then mapping order.
pub fn expand_cells(spec: &ExperimentSpec) -> Vec<Cell> {
    let mut variants = Vec::new();
    for p in &spec.problems {
        match p {
            ProblemSpec::Benchmark { functions, dimensions, .. } => {
                for &function in functions {
                    for &dimension in dimensions {
                        variants.push((p, ProblemVariant::Benchmark { function, dimension }));
                    }
                }
            }
            ProblemSpec::Puf { stages, crps, .. } => variants.push((
                p,
                ProblemVariant::Puf {
                    stages: *stages,
                    crps: *crps,
                },
            )),
            ProblemSpec::Nn {
                task,
                architecture,
                dataset_size,
                ..
            } => variants.push((
                p,
                ProblemVariant::Nn {
                    task: *task,
                    architecture: *architecture,
                    dataset_size: *dataset_size,
                },
            )),
        }
    }
    let mut cells = Vec::new();
    for (p, variant) in variants {
        let budget = p.budget(variant.dimension(), spec.execution.budget_factor);
        for alg in &spec.algorithms {
            for &mapping in &spec.mappings {
                cells.push(Cell {
                    index: cells.len(),
                    problem: variant.clone(),
                    budget,
                    algorithm_label: alg.label.clone(),
                    algorithm: alg.algorithm.clone(),
                    mapping,
                });
            }
        }
    }
    cells
}

pub fn run_seed(master_seed: u64, cell: usize, instance: usize) -> u64 {
    derive_seed(master_seed, &[TAG_RUN, cell as u64, instance as u64])
}

fn execute(cell: &Cell, master_seed: u64, instance: usize) -> RunRecord {
    let seed = run_seed(master_seed, cell.index, instance);
    let mut record = RunRecord {
        cell: cell.index,
        problem_kind: cell.problem.kind(),
        problem: cell.problem.name(),
        dimension: cell.problem.dimension(),
        category: cell.problem.category(),
        algorithm: cell.algorithm_label.clone(),
        mapping: cell.mapping,
        instance,
        seed,
        budget: cell.budget,
        evals: 0,
        final_fitness: None,
        hit: false,
        status: RunStatus::Failed,
        message: String::new(),
        first_hits: vec![None; ECDF_TARGET_COUNT],
    };
    let outcome = cell.problem.instantiate(master_seed, instance).and_then(|mut objective| {
        let trace = run(&cell.algorithm, cell.mapping, objective.as_mut(), cell.budget, seed)?;
        if trace.evals != objective.eval_count() {
            return Err(Error::InvalidState(format!(
                "optimizer counted {} evaluations, objective saw {}",
                trace.evals,
                objective.eval_count()
            )));
        }
        Ok(trace)
    });
    match outcome {
        Ok(trace) => {
            record.evals = trace.evals;
            record.final_fitness = Some(trace.final_best);
            record.hit = trace.hit;
            record.status = RunStatus::Ok;
            record.first_hits = trace.target_hits;
        }
        Err(e) => record.message = e.to_string(),
    }
    record
}

/// Worker count from [`WORKERS_ENV`], defaulting to the available cores.
pub fn worker_count() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::config(WORKERS_ENV, format!("expected a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Execute every cell `instances_per_cell` times. Records come back in
/// cell/instance order whatever the completion order. Failed runs are kept
/// with a failure status.
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<Vec<RunRecord>> {
    let cells = expand_cells(spec);
    if cells.is_empty() {
        return Err(Error::invalid("experiment has no cells"));
    }
    let n = spec.execution.instances_per_cell;
    let jobs: Vec<(&Cell, usize)> = cells.iter().flat_map(|c| (0..n).map(move |i| (c, i))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidState(format!("cannot start worker pool: {e}")))?;
    let master = spec.execution.master_seed;
    Ok(pool.install(|| jobs.par_iter().map(|&(c, i)| execute(c, master, i)).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub genex_version: String,
    pub master_seed: u64,
    pub instances_per_cell: usize,
    pub budget_factor: u64,
    pub cells: usize,
    pub records: usize,
    pub failures: usize,
    /// The config text the run was started from.
    pub config: String,
}

/// Write `runs.csv` and `manifest.toml` into `dir`.
pub fn persist(dir: &Path, spec: &ExperimentSpec, config_text: &str, records: &[RunRecord]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut buf = Vec::new();
    write_runs(&mut buf, records)?;
    fs::write(dir.join(RUNS_FILE), buf)?;
    let manifest = Manifest {
        genex_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: spec.execution.master_seed,
        instances_per_cell: spec.execution.instances_per_cell,
        budget_factor: spec.execution.budget_factor,
        cells: expand_cells(spec).len(),
        records: records.len(),
        failures: records.iter().filter(|r| !r.is_ok()).count(),
        config: config_text.to_string(),
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::InvalidState(format!("manifest: {e}")))?;
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

/// Accepts a results directory or a path to its `runs.csv`.
pub fn runs_path(results: &Path) -> PathBuf {
    if results.is_dir() {
        results.join(RUNS_FILE)
    } else {
        results.to_path_buf()
    }
}

pub fn load_runs(results: &Path) -> Result<Vec<RunRecord>> {
    read_runs(fs::File::open(runs_path(results))?)
}

pub fn load_manifest(results: &Path) -> Result<Manifest> {
    let dir = if results.is_dir() {
        results.to_path_buf()
    } else {
        results.parent().map(Path::to_path_buf).unwrap_or_default()
    };
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        line: 0,
        message: format!("{MANIFEST_FILE}: {}", e.message()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> ExperimentSpec {
        ExperimentSpec::from_toml_str(text).unwrap()
    }

    const SMALL: &str = r#"
[execution]
master_seed = 3
instances_per_cell = 3
budget_factor = 100

[[problems]]
kind = "benchmark"
functions = ["sphere", "bent-cigar"]
dimensions = [2]

[mappings]
codes = ["def", "com-seq"]

[[algorithms]]
kind = "ga"
population_size = 20
"#;

    #[test]
    fn cell_matrix_and_records() {
        let s = spec(SMALL);
        let cells = expand_cells(&s);
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[1].mapping.to_string(), "com-seq");
        assert_eq!(cells[0].budget, 200);
        let records = run_experiment(&s, 2).unwrap();
        assert_eq!(records.len(), 12);
        for (k, r) in records.iter().enumerate() {
            assert_eq!((r.cell, r.instance), (k / 3, k % 3));
            assert!(r.is_ok(), "{}", r.message);
            assert_eq!(r.evals, 200);
            assert_eq!(r.hit, r.final_fitness.unwrap() <= 1e-8);
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let s = spec(SMALL);
        assert_eq!(run_experiment(&s, 1).unwrap(), run_experiment(&s, 3).unwrap());
    }

    #[test]
    fn instances_are_shared_across_mappings() {
        let v = ProblemVariant::Benchmark {
            function: FunctionId::Sphere,
            dimension: 3,
        };
        let mut a = v.instantiate(9, 2).unwrap();
        let mut b = v.instantiate(9, 2).unwrap();
        let mut c = v.instantiate(9, 3).unwrap();
        let x = [0.5, -1.0, 2.0];
        assert_eq!(a.evaluate(&x).unwrap(), b.evaluate(&x).unwrap());
        assert_ne!(a.evaluate(&x).unwrap(), c.evaluate(&x).unwrap());
    }

    #[test]
    fn failures_are_marked_not_dropped() {
        let mut s = spec(SMALL);
        // A budget below the population size passes validation only when
        // forced here; the run itself reports the failure.
        if let ProblemSpec::Benchmark { budget, .. } = &mut s.problems[0] {
            *budget = Some(5);
        }
        let records = run_experiment(&s, 1).unwrap();
        assert_eq!(records.len(), 12);
        assert!(records.iter().all(|r| r.status == RunStatus::Failed && !r.message.is_empty()));
    }

    #[test]
    fn persisted_files_roundtrip() {
        let s = spec(SMALL);
        let records = run_experiment(&s, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        persist(dir.path(), &s, SMALL, &records).unwrap();
        assert_eq!(load_runs(dir.path()).unwrap(), records);
        let m = load_manifest(dir.path()).unwrap();
        assert_eq!((m.master_seed, m.records, m.cells, m.failures), (3, 12, 4, 0));
        assert_eq!(m.config, SMALL);
    }
}
