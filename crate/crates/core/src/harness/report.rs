//! Comparison tables and ECDF data files built from run records.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mapping::MappingSpec;
use crate::problems::FunctionCategory;
use crate::stats::{ecdf, summarize, verdict, SampleSet, StatVerdict, Summary};

use super::records::{ProblemKind, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMode {
    /// Median with hit count: `3.37e-09 (31)`.
    Benchmark,
    /// Median and standard deviation: `295.8±78.33`.
    PlusMinus,
}

impl FromStr for TableMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "benchmark" => Ok(TableMode::Benchmark),
            "pm" => Ok(TableMode::PlusMinus),
            _ => Err(Error::invalid(format!("unknown table mode `{s}` (benchmark, pm)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub summary: Summary,
    /// `None` in the reference column.
    pub verdict: Option<StatVerdict>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub cells: Vec<Option<TableCell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Mapping codes; the reference comes first.
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "| problem |")?;
        for c in &self.columns {
            write!(f, " {c} |")?;
        }
        write!(f, "\n|---|")?;
        for _ in &self.columns {
            write!(f, "---|")?;
        }
        writeln!(f)?;
        for row in &self.rows {
            write!(f, "| {} |", row.label)?;
            for cell in &row.cells {
                write!(f, " {} |", cell.as_ref().map_or("n/a", |c| c.text.as_str()))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Scientific notation with two decimals and a two-digit signed exponent.
pub fn fmt_sci(x: f64) -> String {
    let s = format!("{x:.2e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

/// Four significant digits, switching to scientific form for very small or
/// large magnitudes.
pub fn fmt_sig4(x: f64) -> String {
    if x == 0.0 {
        return "0.000".into();
    }
    let a = x.abs();
    if !(1e-3..1e5).contains(&a) {
        return fmt_sci(x);
    }
    let mut decimals = (3 - a.log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into the next power of ten (9.9996 -> 10.000).
    let digits = s.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if digits > 4 && decimals > 0 {
        decimals -= 1;
        return format!("{x:.decimals$}");
    }
    s
}

fn row_label(r: &RunRecord) -> String {
    match r.problem_kind {
        ProblemKind::Benchmark => format!("{} {}D {}", r.problem, r.dimension, r.algorithm),
        _ => format!("{} {}", r.problem, r.algorithm),
    }
}

/// One row per (problem, dimension, algorithm), one column per mapping.
/// Candidate cells carry the verdict against `reference`.
pub fn render_table(records: &[RunRecord], mode: TableMode, reference: MappingSpec) -> Result<Table> {
    let ok: Vec<&RunRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let mut columns: Vec<MappingSpec> = Vec::new();
    let mut row_keys: Vec<(String, usize, String)> = Vec::new();
    for r in &ok {
        if !columns.contains(&r.mapping) {
            columns.push(r.mapping);
        }
        let key = (r.problem.clone(), r.dimension, r.algorithm.clone());
        if !row_keys.contains(&key) {
            row_keys.push(key);
        }
    }
    let Some(pos) = columns.iter().position(|m| *m == reference) else {
        return Err(Error::invalid(format!("no successful runs for reference mapping `{reference}`")));
    };
    columns.remove(pos);
    columns.insert(0, reference);

    let mut rows = Vec::new();
    for key in row_keys {
        let in_row: Vec<&&RunRecord> = ok
            .iter()
            .filter(|r| (&r.problem, r.dimension, &r.algorithm) == (&key.0, key.1, &key.2))
            .collect();
        let sample = |m: MappingSpec| -> Option<Vec<f64>> {
            let v: Vec<f64> = in_row
                .iter()
                .filter(|r| r.mapping == m)
                .filter_map(|r| r.final_fitness)
                .collect();
            (!v.is_empty()).then_some(v)
        };
        let label = row_label(in_row[0]);
        let reference_values = sample(reference)
            .ok_or_else(|| Error::invalid(format!("row `{label}` has no reference runs")))?;
        let reference_set = SampleSet::new(reference.to_string(), reference_values)?;
        let mut cells = Vec::new();
        for (ci, &m) in columns.iter().enumerate() {
            let Some(values) = sample(m) else {
                cells.push(None);
                continue;
            };
            let summary = summarize(&values, 0.0)?;
            let v = if ci == 0 {
                None
            } else {
                Some(verdict(&SampleSet::new(m.to_string(), values)?, &reference_set)?)
            };
            let mut text = match mode {
                TableMode::Benchmark => format!("{} ({})", fmt_sci(summary.median), summary.hits),
                TableMode::PlusMinus => format!("{}±{}", fmt_sig4(summary.median), fmt_sig4(summary.std_dev)),
            };
            if let Some(v) = &v {
                write!(text, " {}", v.symbol).expect("writing to a String cannot fail");
            }
            cells.push(Some(TableCell {
                summary,
                verdict: v,
                text,
            }));
        }
        rows.push(TableRow { label, cells });
    }
    Ok(Table {
        columns: columns.iter().map(ToString::to_string).collect(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcdfGroup {
    All,
    Category(FunctionCategory),
}

impl FromStr for EcdfGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            Ok(EcdfGroup::All)
        } else {
            s.parse().map(EcdfGroup::Category)
        }
    }
}

pub const ECDF_HEADER: &str = "config,dimension,evaluations,proportion";

/// ECDF series per configuration and dimension over the benchmark runs in
/// `group`. Each series starts at `(0, 0)`.
pub fn export_ecdf(records: &[RunRecord], group: EcdfGroup) -> Result<String> {
    let bench: Vec<&RunRecord> = records
        .iter()
        .filter(|r| r.problem_kind == ProblemKind::Benchmark && r.is_ok())
        .collect();
    if bench.is_empty() {
        return Err(Error::invalid("ECDF export needs successful benchmark records"));
    }
    let selected: Vec<&RunRecord> = bench
        .into_iter()
        .filter(|r| match group {
            EcdfGroup::All => true,
            EcdfGroup::Category(c) => r.category.as_deref() == Some(c.name()),
        })
        .collect();
    if selected.is_empty() {
        return Err(Error::invalid("no benchmark records in the requested group"));
    }
    let mut series: Vec<(String, usize)> = Vec::new();
    for r in &selected {
        let key = (r.config_label(), r.dimension);
        if !series.contains(&key) {
            series.push(key);
        }
    }
    let mut out = String::from(ECDF_HEADER);
    out.push('\n');
    for (config, dim) in series {
        let runs: Vec<Vec<Option<u64>>> = selected
            .iter()
            .filter(|r| r.config_label() == config && r.dimension == dim)
            .map(|r| r.first_hits.clone())
            .collect();
        writeln!(out, "{config},{dim},0,0").expect("writing to a String cannot fail");
        for (evals, p) in ecdf(&runs)? {
            writeln!(out, "{config},{dim},{evals},{p}").expect("writing to a String cannot fail");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::records::RunStatus;
    use crate::stats::{Symbol, ECDF_TARGET_COUNT};

    fn rec(problem: &str, mapping: &str, fitness: f64) -> RunRecord {
        RunRecord {
            cell: 0,
            problem_kind: ProblemKind::Benchmark,
            problem: problem.into(),
            dimension: 2,
            category: Some("separable".into()),
            algorithm: "ga".into(),
            mapping: mapping.parse().unwrap(),
            instance: 0,
            seed: 0,
            budget: 10,
            evals: 10,
            final_fitness: Some(fitness),
            hit: fitness <= 1e-8,
            status: RunStatus::Ok,
            message: String::new(),
            first_hits: vec![None; ECDF_TARGET_COUNT],
        }
    }

    #[test]
    fn number_formats() {
        assert_eq!(fmt_sci(3.37e-9), "3.37e-09");
        assert_eq!(fmt_sci(0.0), "0.00e+00");
        assert_eq!(fmt_sci(123.0), "1.23e+02");
        assert_eq!(fmt_sig4(295.8), "295.8");
        assert_eq!(fmt_sig4(78.3312), "78.33");
        assert_eq!(fmt_sig4(1053.0), "1053");
        assert_eq!(fmt_sig4(9.9996), "10.00");
        assert_eq!(fmt_sig4(0.12345), "0.1235");
    }

    #[test]
    fn benchmark_cells_and_verdicts() {
        let mut records = Vec::new();
        for i in 0..10 {
            records.push(rec("sphere", "def", 1e-9 * (i as f64 + 1.0)));
            records.push(rec("sphere", "com-seq", 1.0 + i as f64));
            records.push(rec("sphere", "exp-s-2", 1e-9 * (i as f64 + 1.0)));
        }
        let t = render_table(&records, TableMode::Benchmark, MappingSpec::Identity).unwrap();
        assert_eq!(t.columns, ["def", "com-seq", "exp-s-2"]);
        let row = &t.rows[0];
        assert_eq!(row.label, "sphere 2D ga");
        assert_eq!(row.cells[0].as_ref().unwrap().text, "5.50e-09 (10)");
        assert_eq!(row.cells[1].as_ref().unwrap().text, "5.50e+00 (0) -");
        assert_eq!(row.cells[2].as_ref().unwrap().verdict.unwrap().symbol, Symbol::Same);
        let shown = t.to_string();
        assert!(shown.starts_with("| problem | def | com-seq | exp-s-2 |"));
    }

    #[test]
    fn reference_only_and_missing_reference() {
        let records: Vec<_> = (0..5).map(|i| rec("sphere", "def", i as f64)).collect();
        let t = render_table(&records, TableMode::PlusMinus, MappingSpec::Identity).unwrap();
        assert_eq!(t.rows[0].cells.len(), 1);
        assert!(!t.rows[0].cells[0].as_ref().unwrap().text.contains(['+', '=']));
        let others: Vec<_> = (0..5).map(|i| rec("sphere", "com-alt", i as f64)).collect();
        assert!(render_table(&others, TableMode::Benchmark, MappingSpec::Identity).is_err());
    }

    #[test]
    fn ecdf_export_rules() {
        let mut r = rec("sphere", "def", 0.0);
        r.first_hits = vec![Some(7); ECDF_TARGET_COUNT];
        let out = export_ecdf(&[r.clone()], EcdfGroup::All).unwrap();
        assert_eq!(out, format!("{ECDF_HEADER}\nga/def,2,0,0\nga/def,2,7,1\n"));
        let weak = EcdfGroup::Category(FunctionCategory::MultimodalWeak);
        assert!(export_ecdf(&[r.clone()], weak).is_err());
        r.problem_kind = ProblemKind::Puf;
        assert!(export_ecdf(&[r], EcdfGroup::All).is_err());
        assert!("separable".parse::<EcdfGroup>().is_ok());
        assert!("nope".parse::<EcdfGroup>().is_err());
    }
}
