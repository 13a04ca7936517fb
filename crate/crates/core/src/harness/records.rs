//! Flat per-run result rows and their CSV form.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mapping::MappingSpec;
use crate::stats::ECDF_TARGET_COUNT;

pub const RUNS_HEADER: [&str; 16] = [
    "cell",
    "problem_kind",
    "problem",
    "dimension",
    "category",
    "algorithm",
    "mapping",
    "instance",
    "seed",
    "budget",
    "evals",
    "final_fitness",
    "hit",
    "status",
    "message",
    "first_hits",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Benchmark,
    Puf,
    Nn,
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Benchmark => "benchmark",
            ProblemKind::Puf => "puf",
            ProblemKind::Nn => "nn",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "benchmark" => Ok(ProblemKind::Benchmark),
            "puf" => Ok(ProblemKind::Puf),
            "nn" => Ok(ProblemKind::Nn),
            _ => Err(Error::invalid(format!("unknown problem kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Ok,
    Failed,
}

/// One optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub cell: usize,
    pub problem_kind: ProblemKind,
    /// Function name, `puf-<stages>-<crps>` or `nn-<task>-<arch>`.
    pub problem: String,
    /// Phenotype length.
    pub dimension: usize,
    /// Landscape category for benchmark rows.
    pub category: Option<String>,
    pub algorithm: String,
    pub mapping: MappingSpec,
    pub instance: usize,
    pub seed: u64,
    pub budget: u64,
    pub evals: u64,
    /// `None` for failed runs.
    pub final_fitness: Option<f64>,
    pub hit: bool,
    pub status: RunStatus,
    /// Failure diagnostic, empty otherwise.
    pub message: String,
    /// First evaluation reaching each ECDF target.
    pub first_hits: Vec<Option<u64>>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }

    /// Configuration label used in tables and ECDF files.
    pub fn config_label(&self) -> String {
        format!("{}/{}", self.algorithm, self.mapping)
    }
}

fn fmt_hits(hits: &[Option<u64>]) -> String {
    let parts: Vec<String> = hits
        .iter()
        .map(|h| h.map_or_else(|| "-".to_string(), |e| e.to_string()))
        .collect();
    parts.join(";")
}

/// Write records in the given order. Floats use shortest round-trip form.
pub fn write_runs<W: Write>(writer: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(RUNS_HEADER)?;
    for r in records {
        w.write_record([
            r.cell.to_string(),
            r.problem_kind.to_string(),
            r.problem.clone(),
            r.dimension.to_string(),
            r.category.clone().unwrap_or_default(),
            r.algorithm.clone(),
            r.mapping.to_string(),
            r.instance.to_string(),
            r.seed.to_string(),
            r.budget.to_string(),
            r.evals.to_string(),
            r.final_fitness.map(|f| format!("{f:e}")).unwrap_or_default(),
            u8::from(r.hit).to_string(),
            match r.status {
                RunStatus::Ok => "ok".to_string(),
                RunStatus::Failed => "failed".to_string(),
            },
            r.message.clone(),
            fmt_hits(&r.first_hits),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T>
where
    T::Err: fmt::Display,
{
    let raw = rec.get(i).unwrap_or_default();
    raw.parse().map_err(|e: T::Err| Error::Parse {
        line,
        message: format!("column `{}`: {e} (value `{raw}`)", RUNS_HEADER[i]),
    })
}

pub fn read_runs<R: Read>(reader: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(RUNS_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", RUNS_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse { line, message };
        let status = match &row[13] {
            "ok" => RunStatus::Ok,
            "failed" => RunStatus::Failed,
            other => return Err(parse_err(format!("column `status`: unknown value `{other}`"))),
        };
        let final_fitness = match &row[11] {
            "" if status == RunStatus::Failed => None,
            _ => {
                let f: f64 = field(&row, 11, line)?;
                if f.is_nan() {
                    return Err(parse_err("column `final_fitness`: NaN".into()));
                }
                Some(f)
            }
        };
        let hit = match &row[12] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(format!("column `hit`: expected 0 or 1, got `{other}`"))),
        };
        let first_hits = row[15]
            .split(';')
            .map(|p| match p {
                "-" => Ok(None),
                _ => p
                    .parse::<u64>()
                    .map(Some)
                    .map_err(|e| parse_err(format!("column `first_hits`: {e} (value `{p}`)"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if first_hits.len() != ECDF_TARGET_COUNT {
            return Err(parse_err(format!(
                "column `first_hits`: {} entries, expected {ECDF_TARGET_COUNT}",
                first_hits.len()
            )));
        }
        let category = match &row[4] {
            "" => None,
            c => Some(c.to_string()),
        };
        out.push(RunRecord {
            cell: field(&row, 0, line)?,
            problem_kind: field(&row, 1, line)?,
            problem: row[2].to_string(),
            dimension: field(&row, 3, line)?,
            category,
            algorithm: row[5].to_string(),
            mapping: field(&row, 6, line)?,
            instance: field(&row, 7, line)?,
            seed: field(&row, 8, line)?,
            budget: field(&row, 9, line)?,
            evals: field(&row, 10, line)?,
            final_fitness,
            hit,
            status,
            message: row[14].to_string(),
            first_hits,
        });
    }
    Ok(out)
}
