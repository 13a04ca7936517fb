//! Experiment description parsed from TOML.
//!
//! Parsing walks the document by hand so every diagnostic carries the
//! dotted path of the offending key (`problems[1].dimensions`).

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::evolvers::{Algorithm, DeConfig, GaConfig};
use crate::mapping::MappingSpec;
use crate::neural::{Architecture, Task, DEFAULT_DATASET_SIZE};
use crate::problems::FunctionId;

pub const DESK_DIMENSIONS: [usize; 2] = [2, 5];
pub const DESK_BUDGET_FACTOR: u64 = 10_000;
pub const DESK_INSTANCES: usize = 30;
pub const PAPER_BUDGET_FACTOR: u64 = 100_000;
pub const PAPER_INSTANCES: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub master_seed: u64,
    pub instances_per_cell: usize,
    /// Evaluations per phenotype dimension, unless a problem sets `budget`.
    pub budget_factor: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Benchmark {
        functions: Vec<FunctionId>,
        dimensions: Vec<usize>,
        budget: Option<u64>,
    },
    Puf {
        stages: usize,
        crps: usize,
        budget: Option<u64>,
    },
    Nn {
        task: Task,
        architecture: Architecture,
        dataset_size: usize,
        budget: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub label: String,
    pub algorithm: Algorithm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub execution: Execution,
    pub problems: Vec<ProblemSpec>,
    pub mappings: Vec<MappingSpec>,
    pub algorithms: Vec<AlgorithmSpec>,
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.message().to_string()))?;
        let root = Section::new(String::new(), &root);
        root.allow(&["execution", "problems", "mappings", "algorithms"])?;

        let exec = root.table("execution")?;
        exec.allow(&["master_seed", "instances_per_cell", "budget_factor"])?;
        let execution = Execution {
            master_seed: exec.require("master_seed")?,
            instances_per_cell: exec.get("instances_per_cell")?.unwrap_or(DESK_INSTANCES),
            budget_factor: exec.get("budget_factor")?.unwrap_or(DESK_BUDGET_FACTOR),
        };
        if execution.instances_per_cell == 0 {
            return Err(exec.error("instances_per_cell", "must be at least 1"));
        }
        if execution.budget_factor == 0 {
            return Err(exec.error("budget_factor", "must be at least 1"));
        }

        let problems = root
            .array_of_tables("problems")?
            .iter()
            .map(parse_problem)
            .collect::<Result<Vec<_>>>()?;

        let maps = root.table("mappings")?;
        maps.allow(&["codes"])?;
        let codes: Vec<String> = maps.require("codes")?;
        if codes.is_empty() {
            return Err(maps.error("codes", "must list at least one mapping"));
        }
        let mut mappings = Vec::with_capacity(codes.len());
        for (i, code) in codes.iter().enumerate() {
            let m: MappingSpec = code
                .parse()
                .map_err(|e: Error| maps.error(&format!("codes[{i}]"), e.to_string()))?;
            if mappings.contains(&m) {
                return Err(maps.error(&format!("codes[{i}]"), format!("duplicate mapping `{code}`")));
            }
            mappings.push(m);
        }

        let mut algorithms: Vec<AlgorithmSpec> = Vec::new();
        for section in root.array_of_tables("algorithms")? {
            let alg = parse_algorithm(&section)?;
            if algorithms.iter().any(|a| a.label == alg.label) {
                return Err(section.error("name", format!("duplicate algorithm label `{}`", alg.label)));
            }
            algorithms.push(alg);
        }

        let spec = ExperimentSpec {
            execution,
            problems,
            mappings,
            algorithms,
        };
        spec.check_budgets()?;
        Ok(spec)
    }

    /// Switch to the full-scale budget factor and instance count.
    pub fn paper_scale(&mut self) {
        self.execution.budget_factor = PAPER_BUDGET_FACTOR;
        self.execution.instances_per_cell = PAPER_INSTANCES;
    }

    fn check_budgets(&self) -> Result<()> {
        let largest = self
            .algorithms
            .iter()
            .map(|a| a.algorithm.population_size() as u64)
            .max()
            .unwrap_or(0);
        for (i, p) in self.problems.iter().enumerate() {
            for dim in p.phenotype_dimensions() {
                let budget = p.budget(dim, self.execution.budget_factor);
                if budget < largest {
                    let key = if p.explicit_budget().is_some() {
                        format!("problems[{i}].budget")
                    } else {
                        "execution.budget_factor".to_string()
                    };
                    return Err(Error::config(
                        key,
                        format!("budget {budget} is below the population size {largest}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::Benchmark { .. } => "benchmark",
            ProblemSpec::Puf { .. } => "puf",
            ProblemSpec::Nn { .. } => "nn",
        }
    }

    pub fn explicit_budget(&self) -> Option<u64> {
        match self {
            ProblemSpec::Benchmark { budget, .. }
            | ProblemSpec::Puf { budget, .. }
            | ProblemSpec::Nn { budget, .. } => *budget,
        }
    }

    /// Evaluation budget for a phenotype of `dimension` genes.
    pub fn budget(&self, dimension: usize, factor: u64) -> u64 {
        self.explicit_budget()
            .unwrap_or(dimension as u64 * factor)
    }

    fn phenotype_dimensions(&self) -> Vec<usize> {
        match self {
            ProblemSpec::Benchmark { dimensions, .. } => dimensions.clone(),
            ProblemSpec::Puf { stages, .. } => vec![stages + 1],
            ProblemSpec::Nn { architecture, .. } => vec![architecture.parameter_count()],
        }
    }
}

fn parse_problem(s: &Section<'_>) -> Result<ProblemSpec> {
    let kind: String = s.require("kind")?;
    let budget: Option<u64> = s.get("budget")?;
    if budget == Some(0) {
        return Err(s.error("budget", "must be at least 1"));
    }
    match kind.as_str() {
        "benchmark" => {
            s.allow(&["kind", "functions", "dimensions", "budget"])?;
            let names: Vec<String> = s.require("functions")?;
            let functions = if names.len() == 1 && names[0] == "all" {
                FunctionId::ALL.to_vec()
            } else {
                names
                    .iter()
                    .enumerate()
                    .map(|(i, n)| {
                        n.parse::<FunctionId>()
                            .map_err(|e| s.error(&format!("functions[{i}]"), e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            if functions.is_empty() {
                return Err(s.error("functions", "must list at least one function"));
            }
            let dimensions: Vec<usize> = s.get("dimensions")?.unwrap_or(DESK_DIMENSIONS.to_vec());
            if dimensions.is_empty() {
                return Err(s.error("dimensions", "must list at least one dimension"));
            }
            for (i, &d) in dimensions.iter().enumerate() {
                if d < 2 {
                    return Err(s.error(&format!("dimensions[{i}]"), "dimensions start at 2"));
                }
            }
            Ok(ProblemSpec::Benchmark {
                functions,
                dimensions,
                budget,
            })
        }
        "puf" => {
            s.allow(&["kind", "stages", "crps", "budget"])?;
            let stages: usize = s.require("stages")?;
            let crps: usize = s.require("crps")?;
            if stages == 0 {
                return Err(s.error("stages", "must be at least 1"));
            }
            if crps == 0 {
                return Err(s.error("crps", "must be at least 1"));
            }
            Ok(ProblemSpec::Puf { stages, crps, budget })
        }
        "nn" => {
            s.allow(&["kind", "task", "architecture", "dataset_size", "budget"])?;
            let task: String = s.require("task")?;
            let task: Task = task.parse().map_err(|e: Error| s.error("task", e.to_string()))?;
            let arch: String = s.require("architecture")?;
            let architecture: Architecture =
                arch.parse().map_err(|e: Error| s.error("architecture", e.to_string()))?;
            if architecture.input != task.inputs() {
                return Err(s.error(
                    "architecture",
                    format!("task {task} needs {} inputs, architecture has {}", task.inputs(), architecture.input),
                ));
            }
            let dataset_size = s.get("dataset_size")?.unwrap_or(DEFAULT_DATASET_SIZE);
            Ok(ProblemSpec::Nn {
                task,
                architecture,
                dataset_size,
                budget,
            })
        }
        other => Err(s.error("kind", format!("unknown problem kind `{other}` (benchmark, puf, nn)"))),
    }
}

fn parse_algorithm(s: &Section<'_>) -> Result<AlgorithmSpec> {
    let kind: String = s.require("kind")?;
    let algorithm = match kind.as_str() {
        "ga" => {
            s.allow(&["kind", "name", "population_size", "mutation_probability", "sbx_eta", "blx_alpha", "bga_range"])?;
            let d = GaConfig::default();
            let bga: Option<Vec<f64>> = s.get("bga_range")?;
            let bga_range = match bga.as_deref() {
                None => d.bga_range,
                Some(&[lo, hi]) => (lo, hi),
                Some(_) => return Err(s.error("bga_range", "expected two numbers")),
            };
            let cfg = GaConfig {
                population_size: s.get("population_size")?.unwrap_or(d.population_size),
                mutation_probability: s.get("mutation_probability")?.unwrap_or(d.mutation_probability),
                sbx_eta: s.get("sbx_eta")?.unwrap_or(d.sbx_eta),
                blx_alpha: s.get("blx_alpha")?.unwrap_or(d.blx_alpha),
                bga_range,
            };
            Algorithm::Ga(cfg)
        }
        "de" => {
            s.allow(&["kind", "name", "population_size", "f", "cr"])?;
            let d = DeConfig::default();
            Algorithm::De(DeConfig {
                population_size: s.get("population_size")?.unwrap_or(d.population_size),
                f: s.get("f")?.unwrap_or(d.f),
                cr: s.get("cr")?.unwrap_or(d.cr),
            })
        }
        other => return Err(s.error("kind", format!("unknown algorithm `{other}` (ga, de)"))),
    };
    algorithm
        .validate()
        .map_err(|e| s.error("kind", e.to_string()))?;
    let label = s.get::<String>("name")?.unwrap_or(kind);
    if label.is_empty() || label.contains([',', '/', '\n']) {
        return Err(s.error("name", "labels must be non-empty without `,` `/` or newlines"));
    }
    Ok(AlgorithmSpec { label, algorithm })
}

struct Section<'a> {
    path: String,
    table: &'a Table,
}

impl<'a> Section<'a> {
    fn new(path: String, table: &'a Table) -> Self {
        Section { path, table }
    }

    fn key(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn error(&self, key: &str, message: impl Into<String>) -> Error {
        Error::config(self.key(key), message)
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.table.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(self.error(k, "unknown key")),
            None => Ok(()),
        }
    }

    fn get<T: FromToml>(&self, key: &str) -> Result<Option<T>> {
        self.table
            .get(key)
            .map(|v| T::from_toml(v).map_err(|m| self.error(key, m)))
            .transpose()
    }

    fn require<T: FromToml>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| self.error(key, "missing required key"))
    }

    fn table(&self, key: &str) -> Result<Section<'a>> {
        match self.table.get(key) {
            Some(Value::Table(t)) => Ok(Section::new(self.key(key), t)),
            Some(_) => Err(self.error(key, "expected a table")),
            None => Err(self.error(key, "missing required section")),
        }
    }

    fn array_of_tables(&self, key: &str) -> Result<Vec<Section<'a>>> {
        let items = match self.table.get(key) {
            Some(Value::Array(items)) => items,
            Some(_) => return Err(self.error(key, "expected an array of tables")),
            None => return Err(self.error(key, "missing required section")),
        };
        if items.is_empty() {
            return Err(self.error(key, "must contain at least one entry"));
        }
        items
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::Table(t) => Ok(Section::new(self.key(&format!("{key}[{i}]")), t)),
                _ => Err(self.error(&format!("{key}[{i}]"), "expected a table")),
            })
            .collect()
    }
}

trait FromToml: Sized {
    fn from_toml(v: &Value) -> std::result::Result<Self, String>;
}

impl FromToml for u64 {
    fn from_toml(v: &Value) -> std::result::Result<Self, String> {
        match v {
            Value::Integer(i) => u64::try_from(*i).map_err(|_| format!("expected a non-negative integer, got {i}")),
            other => Err(format!("expected an integer, got {}", other.type_str())),
        }
    }
}

impl FromToml for usize {
    fn from_toml(v: &Value) -> std::result::Result<Self, String> {
        let n = u64::from_toml(v)?;
        usize::try_from(n).map_err(|_| format!("{n} is too large"))
    }
}

impl FromToml for f64 {
    fn from_toml(v: &Value) -> std::result::Result<Self, String> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            other => Err(format!("expected a number, got {}", other.type_str())),
        }
    }
}

impl FromToml for String {
    fn from_toml(v: &Value) -> std::result::Result<Self, String> {
        match v {
            Value::String(s) => Ok(s.clone()),
            other => Err(format!("expected a string, got {}", other.type_str())),
        }
    }
}

impl<T: FromToml> FromToml for Vec<T> {
    fn from_toml(v: &Value) -> std::result::Result<Self, String> {
        match v {
            Value::Array(items) => items
                .iter()
                .enumerate()
                .map(|(i, item)| T::from_toml(item).map_err(|m| format!("element {i}: {m}")))
                .collect(),
            other => Err(format!("expected an array, got {}", other.type_str())),
        }
    }
}
