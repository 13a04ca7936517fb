//! Experiment runner: config parsing, seeded run matrices, the CSV result
//! store and paper-style reports.

mod config;
mod records;
mod report;
mod runner;

pub use config::{
    AlgorithmSpec, Execution, ExperimentSpec, ProblemSpec, DESK_BUDGET_FACTOR, DESK_DIMENSIONS, DESK_INSTANCES,
    PAPER_BUDGET_FACTOR, PAPER_INSTANCES,
};
pub use records::{read_runs, write_runs, ProblemKind, RunRecord, RunStatus, RUNS_HEADER};
pub use report::{export_ecdf, fmt_sci, fmt_sig4, render_table, EcdfGroup, Table, TableCell, TableMode, TableRow, ECDF_HEADER};
pub use runner::{
    expand_cells, load_manifest, load_runs, persist, run_experiment, run_seed, runs_path, worker_count, Cell, Manifest,
    ProblemVariant, MANIFEST_FILE, RUNS_FILE, WORKERS_ENV,
};
