//! Significance testing and summaries for comparing configurations.
//!
//! Comparisons follow a two-step protocol against a reference sample: a
//! one-sided Mann-Whitney test for "candidate is better" (smaller values),
//! and only if that is not significant, the reverse test for "candidate is
//! worse". Both at `alpha = 0.05`.

use std::fmt;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::problems::is_hit;

pub const ALPHA: f64 = 0.05;

/// Samples with `min(n1, n2)` at or below this use the exact distribution.
pub const EXACT_MAX_MIN_SIZE: usize = 8;
/// Pooled size above which the exact path would be too costly.
const EXACT_MAX_POOLED: usize = 1_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub label: String,
    values: Vec<f64>,
}

impl SampleSet {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("sample set must not be empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample values must be finite"));
        }
        Ok(SampleSet {
            label: label.into(),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    /// First sample stochastically smaller.
    Less,
    /// First sample stochastically greater.
    Greater,
}

/// Midranks of the pooled sample, doubled so they are integers.
fn doubled_midranks(pooled: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && pooled[order[end + 1]] == pooled[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end+1 share midrank (start+end+2)/2.
        let r2 = (start + end + 2) as u64;
        for &k in &order[start..=end] {
            ranks[k] = r2;
        }
        start = end + 1;
    }
    ranks
}

/// `P(sum of k items drawn without replacement from items <= threshold)`
/// where every k-subset is equally likely.
fn subset_sum_cdf(items: &[u64], k: usize, threshold: u64) -> f64 {
    let max_sum: u64 = {
        let mut sorted = items.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        sorted[..k].iter().sum()
    };
    let width = max_sum as usize + 1;
    // ways[j][s]: number of j-subsets of the items seen so far with sum s.
    let mut ways = vec![vec![0u128; width]; k + 1];
    ways[0][0] = 1;
    for &item in items {
        let item = item as usize;
        for j in (1..=k).rev() {
            let (lower, upper) = ways.split_at_mut(j);
            let (prev, cur) = (&lower[j - 1], &mut upper[0]);
            for s in (item..width).rev() {
                cur[s] += prev[s - item];
            }
        }
    }
    let total: u128 = ways[k].iter().sum();
    let upto = (threshold as usize).min(width - 1);
    let below: u128 = ways[k][..=upto].iter().sum();
    below as f64 / total as f64
}

/// One-sided Mann-Whitney p-value for `a` versus `b`.
///
/// Exact permutation distribution (midranks for ties) when the smaller
/// sample has at most [`EXACT_MAX_MIN_SIZE`] values; otherwise the
/// tie-corrected normal approximation with continuity correction.
pub fn mann_whitney_one_sided(a: &SampleSet, b: &SampleSet, direction: Alternative) -> Result<f64> {
    match direction {
        Alternative::Less => Ok(p_less(&a.values, &b.values)),
        Alternative::Greater => Ok(p_less(&b.values, &a.values)),
    }
}

fn p_less(a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let r_a: u64 = ranks[..n1].iter().sum();
    let n = n1 + n2;

    if n1.min(n2) <= EXACT_MAX_MIN_SIZE && n <= EXACT_MAX_POOLED {
        return if n1 <= n2 {
            subset_sum_cdf(&ranks, n1, r_a)
        } else {
            // R_a <= r  <=>  R_b >= total - r.
            let r_b: u64 = ranks[n1..].iter().sum();
            if r_b == 0 {
                return 1.0;
            }
            1.0 - subset_sum_cdf(&ranks, n2, r_b - 1)
        };
    }

    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let u = r_a as f64 / 2.0 - n1f * (n1f + 1.0) / 2.0;
    let mean = n1f * n2f / 2.0;
    let mut sorted = pooled;
    sorted.sort_by(f64::total_cmp);
    let tie_term: f64 = sorted
        .chunk_by(|x, y| x == y)
        .map(|g| {
            let t = g.len() as f64;
            t * t * t - t
        })
        .sum();
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = (u - mean + 0.5) / var.sqrt();
    Normal::standard().cdf(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Better,
    Worse,
    Same,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symbol::Better => "+",
            Symbol::Worse => "-",
            Symbol::Same => "=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatVerdict {
    pub symbol: Symbol,
    pub p_better: f64,
    pub p_worse: f64,
}

/// Compare a candidate configuration against the reference (minimization).
pub fn verdict(candidate: &SampleSet, reference: &SampleSet) -> Result<StatVerdict> {
    let p_better = mann_whitney_one_sided(candidate, reference, Alternative::Less)?;
    let p_worse = mann_whitney_one_sided(candidate, reference, Alternative::Greater)?;
    let symbol = if p_better < ALPHA {
        Symbol::Better
    } else if p_worse < ALPHA {
        Symbol::Worse
    } else {
        Symbol::Same
    };
    Ok(StatVerdict {
        symbol,
        p_better,
        p_worse,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub median: f64,
    pub hits: usize,
    /// Population standard deviation.
    pub std_dev: f64,
    pub runs: usize,
}

pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("median of an empty sample"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Median, hit count against `optimum`, and standard deviation.
pub fn summarize(values: &[f64], optimum: f64) -> Result<Summary> {
    let median = median(values)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(Summary {
        median,
        hits: values.iter().filter(|&&v| is_hit(optimum, v)).count(),
        std_dev: var.sqrt(),
        runs: values.len(),
    })
}

/// Number of ECDF targets.
pub const ECDF_TARGET_COUNT: usize = 51;

/// Target ladder `10^2, 10^1.8, ..., 10^-8`.
pub fn ecdf_targets() -> Vec<f64> {
    (0..ECDF_TARGET_COUNT)
        .map(|k| 10f64.powf((20 - 2 * k as i32) as f64 / 10.0))
        .collect()
}

/// Runtime ECDF over (run, target) pairs.
///
/// `runs[r][k]` is the first evaluation at which run `r` reached target `k`.
/// Returns one point per distinct hit time: the fraction of all pairs hit at
/// or before that many evaluations.
pub fn ecdf(runs: &[Vec<Option<u64>>]) -> Result<Vec<(u64, f64)>> {
    if runs.is_empty() {
        return Err(Error::invalid("ECDF needs at least one run"));
    }
    if let Some(r) = runs.iter().find(|r| r.len() != ECDF_TARGET_COUNT) {
        return Err(Error::invalid(format!(
            "run has {} target entries, expected {ECDF_TARGET_COUNT}",
            r.len()
        )));
    }
    let total = (runs.len() * ECDF_TARGET_COUNT) as f64;
    let mut times: Vec<u64> = runs.iter().flatten().flatten().copied().collect();
    times.sort_unstable();
    let mut curve: Vec<(u64, f64)> = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let p = (i + 1) as f64 / total;
        match curve.last_mut() {
            Some(last) if last.0 == t => last.1 = p,
            _ => curve.push((t, p)),
        }
    }
    Ok(curve)
}
