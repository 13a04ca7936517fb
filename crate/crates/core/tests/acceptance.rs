//! Acceptance suite. Prints one line per criterion.
//!
//! Criteria 1-3, 9 and 10 are deterministic and decide the exit status.
//! Criteria 4-8 are seeded optimizer campaigns; their outcome is reported
//! as measured but does not fail the run.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use genex::evolvers::run;
use genex::genotype::RngStream;
use genex::harness::{
    export_ecdf, persist, render_table, run_experiment, worker_count, EcdfGroup, ExperimentSpec, RunRecord,
    TableMode, MANIFEST_FILE, RUNS_FILE,
};
use genex::mapping::{CompressStrategy, ExpandStrategy};
use genex::puf::{generate_crps, puf_fitness, respond, Challenge};
use genex::stats::{ecdf, ecdf_targets, mann_whitney_one_sided, verdict, Alternative, SampleSet, Symbol};
use genex::{Bounds, Genotype, MappingSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(u32, &str, bool, Check); 10] = [
        (1, "mapping correctness", true, mapping_correctness),
        (2, "PUF model correctness", true, puf_correctness),
        (3, "statistics correctness", true, statistics_correctness),
        (4, "compression significantly worse on separable 2D", false, compression_worse),
        (5, "def/exp hit rate on 2D sphere", false, separable_hits),
        (6, "summation expansion on multimodal-adequate 2D", false, expansion_multimodal),
        (7, "DE on 32-stage PUF", false, puf_de),
        (8, "GA on NN task f1", false, nn_ga),
        (9, "harness reproducibility and accounting", true, harness_reproducible),
        (10, "ECDF integrity", true, ecdf_integrity),
    ];
    let filter: Vec<u32> = std::env::var("GENEX_CRITERIA")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut backbone_failed = false;
    let mut passed = 0;
    let mut ran = 0;
    for (n, name, backbone, check) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] criterion {n}: {name} ({:.1}s) {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
        if result.pass {
            passed += 1;
        } else if backbone {
            backbone_failed = true;
        }
    }
    println!("{passed}/{ran} criteria passed");
    if backbone_failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn mapping_correctness() -> Outcome {
    let mut rng = RngStream::new(1);
    let b = Bounds::SYMMETRIC_FIVE;
    let mut worst: f64 = 0.0;
    for strategy in [CompressStrategy::Sequential, CompressStrategy::Alternating] {
        let m = MappingSpec::Compress { strategy };
        for _ in 0..1_000 {
            let x = [rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)];
            let back = m.decode(&m.encode_compressed(&x, b).unwrap(), 2, b).unwrap();
            for k in 0..2 {
                worst = worst.max((back[k] - x[k]).abs());
            }
        }
    }
    let roundtrip_ok = worst <= 1e-7;

    // Wide bounds so nothing is clipped; the oracle folds left to right.
    let wide = Bounds::new(-1e9, 1e9).unwrap();
    let mut expansion_ok = true;
    for i in 0..10_000 {
        let factor = 2 + i % 3;
        let strategy = if i % 2 == 0 { ExpandStrategy::Summation } else { ExpandStrategy::Multiplication };
        let genes: Vec<f64> = (0..factor).map(|_| rng.uniform(-100.0, 100.0)).collect();
        let expect = match strategy {
            ExpandStrategy::Summation => genes.iter().fold(0.0, |a, g| a + g),
            ExpandStrategy::Multiplication => genes.iter().fold(1.0, |a, g| a * g),
        };
        let m = MappingSpec::Expand { strategy, factor };
        let got = m.decode(&Genotype::new(genes).unwrap(), 1, wide).unwrap();
        expansion_ok &= got == [expect];
    }

    // String oracle: slice the 16 digits directly.
    let digits = "1234567890123456";
    let gene = Genotype::new(vec![0.1234567890123456]).unwrap();
    let seq_expect: Vec<f64> = [&digits[..8], &digits[8..]]
        .iter()
        .map(|s| format!("0.{s}").parse().unwrap())
        .collect();
    let odd: String = digits.chars().step_by(2).collect();
    let even: String = digits.chars().skip(1).step_by(2).collect();
    let alt_expect: Vec<f64> = [odd, even].iter().map(|s| format!("0.{s}").parse().unwrap()).collect();
    let seq = MappingSpec::Compress {
        strategy: CompressStrategy::Sequential,
    }
    .decode(&gene, 2, Bounds::UNIT)
    .unwrap();
    let alt = MappingSpec::Compress {
        strategy: CompressStrategy::Alternating,
    }
    .decode(&gene, 2, Bounds::UNIT)
    .unwrap();
    let examples_ok = seq == seq_expect && alt == alt_expect;

    outcome(
        roundtrip_ok && expansion_ok && examples_ok,
        format!(
            "roundtrip max error {worst:.2e}; expansion exact: {expansion_ok}; digit examples {seq:?} {alt:?}"
        ),
    )
}

fn oracle_response(w: &[f64], bits: &[u8]) -> u8 {
    let n = bits.len();
    let mut dot = w[n];
    for i in 0..n {
        let phi: f64 = bits[i..].iter().map(|&c| 1.0 - 2.0 * f64::from(c)).product();
        dot += w[i] * phi;
    }
    u8::from(dot <= 0.0)
}

fn puf_correctness() -> Outcome {
    let mut rng = RngStream::new(2);
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    let mut flips_ok = true;
    for n in 1..=10usize {
        let w: Vec<f64> = (0..=n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let neg: Vec<f64> = w.iter().map(|v| -v).collect();
        for code in 0u32..(1 << n) {
            let bits: Vec<u8> = (0..n).map(|i| (code >> i & 1) as u8).collect();
            let c = Challenge::new(bits.clone()).unwrap();
            let r = respond(&w, &c).unwrap();
            checked += 1;
            if r != oracle_response(&w, &bits) {
                mismatches += 1;
            }
            flips_ok &= respond(&neg, &c).unwrap() == 1 - r;
        }
    }
    let (crps, hidden) = generate_crps(32, 2_000, &mut rng).unwrap();
    let scaled_ok = [0.1, 1.0, 7.0].iter().all(|&a| {
        let w: Vec<f64> = hidden.iter().map(|v| v * a).collect();
        puf_fitness(&w, &crps).unwrap() == 0
    });
    outcome(
        mismatches == 0 && flips_ok && scaled_ok,
        format!("{mismatches} oracle mismatches over {checked} challenges; negation flips: {flips_ok}; scaled hidden model fits: {scaled_ok}"),
    )
}

fn permutation_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let rank = |x: f64| {
        let less = pooled.iter().filter(|&&y| y < x).count() as f64;
        let eq = pooled.iter().filter(|&&y| y == x).count() as f64;
        less + (eq + 1.0) / 2.0
    };
    let ranks: Vec<f64> = pooled.iter().map(|&x| rank(x)).collect();
    let observed: f64 = ranks[..a.len()].iter().sum();
    let (mut hit, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        total += 1;
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if s <= observed + 1e-9 {
            hit += 1;
        }
    }
    hit as f64 / total as f64
}

fn statistics_correctness() -> Outcome {
    let mut rng = RngStream::new(3);
    let mut worst: f64 = 0.0;
    let mut same_ok = true;
    for _ in 0..200 {
        let n1 = 1 + rng.index(8);
        let n2 = 1 + rng.index(8);
        // Small integer support makes ties common.
        let draw = |rng: &mut RngStream, n: usize| -> Vec<f64> { (0..n).map(|_| rng.index(6) as f64).collect() };
        let a = draw(&mut rng, n1);
        let b = draw(&mut rng, n2);
        let sa = SampleSet::new("a", a.clone()).unwrap();
        let sb = SampleSet::new("b", b.clone()).unwrap();
        let p = mann_whitney_one_sided(&sa, &sb, Alternative::Less).unwrap();
        worst = worst.max((p - permutation_p(&a, &b)).abs());
        same_ok &= verdict(&sa, &sa).unwrap().symbol == Symbol::Same;
    }
    let lo = SampleSet::new("lo", vec![1.0, 2.0, 3.0]).unwrap();
    let hi = SampleSet::new("hi", vec![10.0, 11.0, 12.0]).unwrap();
    let analytic = mann_whitney_one_sided(&lo, &hi, Alternative::Less).unwrap();
    let analytic_ok = (analytic - 0.05).abs() < 1e-12;
    outcome(
        worst <= 1e-9 && same_ok && analytic_ok,
        format!("max deviation from permutation oracle {worst:.1e}; p({{1,2,3}} vs {{10,11,12}}) = {analytic}; verdict(x,x) always '=': {same_ok}"),
    )
}

fn campaign(text: &str) -> Vec<RunRecord> {
    let spec = ExperimentSpec::from_toml_str(text).unwrap();
    let records = run_experiment(&spec, worker_count().unwrap()).unwrap();
    assert!(records.iter().all(RunRecord::is_ok), "a run failed");
    records
}

fn benchmark_config(seed: u64, functions: &[&str], codes: &[&str], instances: usize) -> String {
    let quote = |v: &[&str]| v.iter().map(|s| format!("\"{s}\"")).collect::<Vec<_>>().join(", ");
    format!(
        "[execution]\nmaster_seed = {seed}\ninstances_per_cell = {instances}\n\n\
         [[problems]]\nkind = \"benchmark\"\nfunctions = [{}]\ndimensions = [2]\nbudget = 20000\n\n\
         [mappings]\ncodes = [{}]\n\n[[algorithms]]\nkind = \"ga\"\n",
        quote(functions),
        quote(codes)
    )
}

/// (row label, column code) -> (symbol text, median, hits)
fn cell(records: &[RunRecord], mode: TableMode, row: &str, column: &str) -> (Option<Symbol>, f64, usize) {
    let t = render_table(records, mode, MappingSpec::Identity).unwrap();
    let r = t.rows.iter().find(|r| r.label.starts_with(row)).expect("row present");
    let c = t.columns.iter().position(|c| c == column).expect("column present");
    let cell = r.cells[c].as_ref().expect("cell present");
    (cell.verdict.map(|v| v.symbol), cell.summary.median, cell.summary.hits)
}

fn compression_worse() -> Outcome {
    let records = campaign(&benchmark_config(1, &["sphere", "rastrigin-sep"], &["def", "com-seq", "com-alt"], 30));
    let mut ok = true;
    let mut parts = Vec::new();
    for f in ["sphere", "rastrigin-sep"] {
        for m in ["com-seq", "com-alt"] {
            let (sym, median, _) = cell(&records, TableMode::Benchmark, f, m);
            ok &= sym == Some(Symbol::Worse);
            parts.push(format!("{f}/{m} {} median {median:.2e}", sym.map_or("?".into(), |s| s.to_string())));
        }
    }
    outcome(ok, parts.join("; "))
}

fn separable_hits() -> Outcome {
    let records = campaign(&benchmark_config(1, &["sphere"], &["def", "exp-s-2", "exp-s-3"], 30));
    let mut ok = true;
    let mut parts = Vec::new();
    for m in ["def", "exp-s-2", "exp-s-3"] {
        let (_, _, hits) = cell(&records, TableMode::Benchmark, "sphere", m);
        ok &= hits >= 27;
        parts.push(format!("{m} {hits}/30"));
    }
    outcome(ok, format!("hits: {}", parts.join(", ")))
}

fn expansion_multimodal() -> Outcome {
    let mut seeds_passed = 0;
    let mut parts = Vec::new();
    for seed in [1, 2, 3] {
        let records = campaign(&benchmark_config(seed, &["rastrigin-rot", "schaffers-f7"], &["def", "exp-s-2"], 30));
        let mut symbols_ok = true;
        let mut median_ok = false;
        let mut syms = String::new();
        for f in ["rastrigin-rot", "schaffers-f7"] {
            let (sym, exp_median, _) = cell(&records, TableMode::Benchmark, f, "exp-s-2");
            let (_, def_median, _) = cell(&records, TableMode::Benchmark, f, "def");
            symbols_ok &= matches!(sym, Some(Symbol::Better | Symbol::Same));
            median_ok |= exp_median <= def_median;
            syms.push_str(&sym.map_or("?".into(), |s| s.to_string()));
        }
        let pass = symbols_ok && median_ok;
        seeds_passed += usize::from(pass);
        parts.push(format!("seed {seed}: [{syms}] {}", if pass { "pass" } else { "fail" }));
    }
    outcome(seeds_passed >= 2, format!("{} ({seeds_passed}/3 seeds, need 2)", parts.join(", ")))
}

fn puf_de() -> Outcome {
    let text = "[execution]\nmaster_seed = 1\ninstances_per_cell = 15\n\n\
                [[problems]]\nkind = \"puf\"\nstages = 32\ncrps = 2000\nbudget = 200000\n\n\
                [mappings]\ncodes = [\"def\", \"exp-s-2\", \"com-seq\", \"com-alt\"]\n\n\
                [[algorithms]]\nkind = \"de\"\n";
    let records = campaign(text);
    let m = |code: &str| cell(&records, TableMode::PlusMinus, "puf", code);
    let (_, def, _) = m("def");
    let (_, exp, _) = m("exp-s-2");
    let (seq_sym, seq, _) = m("com-seq");
    let (_, alt, _) = m("com-alt");
    let primary = exp <= def && seq >= 5.0 * def && alt >= 5.0 * def;
    let fallback = seq_sym == Some(Symbol::Worse);
    let branch = if primary {
        "primary margin holds"
    } else if fallback {
        "margin fails at desk budget; fallback verdict(com-seq vs def) = '-' holds"
    } else {
        "margin and fallback both fail"
    };
    outcome(
        primary || fallback,
        format!("medians def {def}, exp-s-2 {exp}, com-seq {seq}, com-alt {alt}; {branch}"),
    )
}

fn nn_ga() -> Outcome {
    let text = "[execution]\nmaster_seed = 1\ninstances_per_cell = 15\n\n\
                [[problems]]\nkind = \"nn\"\ntask = \"f1\"\narchitecture = \"1-5-3-1\"\nbudget = 100000\n\n\
                [mappings]\ncodes = [\"def\", \"exp-s-2\"]\n\n\
                [[algorithms]]\nkind = \"ga\"\n";
    let records = campaign(text);
    let t = render_table(&records, TableMode::PlusMinus, MappingSpec::Identity).unwrap();
    let exp = t.rows[0].cells[1].as_ref().unwrap();
    let v = exp.verdict.unwrap();
    outcome(
        v.symbol == Symbol::Better,
        format!(
            "def {} vs exp-s-2 {} (one-sided p = {:.3})",
            t.rows[0].cells[0].as_ref().unwrap().text,
            exp.text,
            v.p_better
        ),
    )
}

const REPRO_CONFIG: &str = r#"
[execution]
master_seed = 99
instances_per_cell = 4
budget_factor = 500

[[problems]]
kind = "benchmark"
functions = ["sphere", "schwefel", "ellipsoid-rot"]
dimensions = [2, 3]

[[problems]]
kind = "puf"
stages = 8
crps = 200
budget = 2000

[[problems]]
kind = "nn"
task = "f2"
architecture = "2-5-3-1"
budget = 2000

[mappings]
codes = ["def", "exp-s-2", "exp-m-2", "com-seq", "com-alt"]

[[algorithms]]
kind = "ga"
population_size = 30

[[algorithms]]
kind = "de"
population_size = 30
"#;

fn harness_reproducible() -> Outcome {
    let spec = ExperimentSpec::from_toml_str(REPRO_CONFIG).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run_experiment(&spec, 1).unwrap();
    let second = run_experiment(&spec, worker_count().unwrap().max(2)).unwrap();
    persist(a.path(), &spec, REPRO_CONFIG, &first).unwrap();
    persist(b.path(), &spec, REPRO_CONFIG, &second).unwrap();
    let identical = [RUNS_FILE, MANIFEST_FILE]
        .iter()
        .all(|f| std::fs::read(a.path().join(f)).unwrap() == std::fs::read(b.path().join(f)).unwrap());

    // Independent recount: rerun a sample of records against fresh
    // objectives and compare with their counters.
    let cells = genex::harness::expand_cells(&spec);
    let mut accounting_ok = first.iter().all(|r| r.is_ok() && r.evals == r.budget);
    for r in first.iter().step_by(7) {
        let c = &cells[r.cell];
        let mut objective = c.problem.instantiate(spec.execution.master_seed, r.instance).unwrap();
        let trace = run(&c.algorithm, c.mapping, objective.as_mut(), c.budget, r.seed).unwrap();
        accounting_ok &= trace.evals == objective.eval_count()
            && trace.evals == r.evals
            && Some(trace.final_best) == r.final_fitness;
    }
    outcome(
        identical && accounting_ok,
        format!("{} records; byte-identical outputs: {identical}; eval counters agree: {accounting_ok}", first.len()),
    )
}

fn ecdf_integrity() -> Outcome {
    let targets = ecdf_targets();
    let ladder_ok = targets.len() == 51
        && targets[0] == 100.0
        && targets[50] == 1e-8
        && targets
            .iter()
            .enumerate()
            .all(|(k, t)| (t.log10() - (2.0 - 0.2 * k as f64)).abs() < 1e-12);

    // One run: targets 0-9 first reached at evaluation 5, 10-19 at 50.
    let mut fixture = vec![None; 51];
    fixture[..10].fill(Some(5));
    fixture[10..20].fill(Some(50));
    let fixture_ok = ecdf(&[fixture]).unwrap() == vec![(5, 10.0 / 51.0), (50, 20.0 / 51.0)];

    let spec = ExperimentSpec::from_toml_str(REPRO_CONFIG).unwrap();
    let records = run_experiment(&spec, worker_count().unwrap()).unwrap();
    let mut curves_ok = true;
    let mut series = 0;
    for group in ["all", "separable", "high-conditioning-unimodal", "multimodal-weak"] {
        let csv = export_ecdf(&records, group.parse::<EcdfGroup>().unwrap()).unwrap();
        let mut last: Option<(String, u64, f64)> = None;
        for line in csv.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let key = format!("{},{}", f[0], f[1]);
            let evals: u64 = f[2].parse().unwrap();
            let p: f64 = f[3].parse().unwrap();
            curves_ok &= (0.0..=1.0).contains(&p);
            match &last {
                Some((k, e, q)) if *k == key => curves_ok &= evals > *e && p >= *q,
                _ => series += 1,
            }
            last = Some((key, evals, p));
        }
    }
    outcome(
        ladder_ok && fixture_ok && curves_ok,
        format!("ladder exact: {ladder_ok}; fixture step curve exact: {fixture_ok}; {series} exported series monotone and bounded: {curves_ok}"),
    )
}
