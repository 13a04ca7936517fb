use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::genotype::{Bounds, Genotype, RngStream};

use super::{GaConfig, Individual};

/// The ten recombination operators the GA samples from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrossoverOp {
    /// Each gene copied from either parent with probability 1/2.
    Discrete,
    /// Genes before a random cut from the first parent, the rest averaged.
    SimpleArithmetic,
    /// `a p1 + (1 - a) p2` with one `a` per offspring.
    WholeArithmetic,
    /// Like whole arithmetic with an independent `a` per gene.
    Local,
    /// Simulated binary crossover; one of the two children kept at random.
    Sbx,
    /// Uniform in the parents' interval widened by `alpha` on both sides.
    BlxAlpha,
    /// Uniform in the parents' interval.
    Flat,
    /// Line recombination `p1 + a (p2 - p1)` with `a` from the BGA range.
    Bga,
    /// Step beyond the better parent, away from the worse one.
    Heuristic,
    /// Arithmetic mean.
    Average,
}

impl CrossoverOp {
    pub const ALL: [CrossoverOp; 10] = [
        CrossoverOp::Discrete,
        CrossoverOp::SimpleArithmetic,
        CrossoverOp::WholeArithmetic,
        CrossoverOp::Local,
        CrossoverOp::Sbx,
        CrossoverOp::BlxAlpha,
        CrossoverOp::Flat,
        CrossoverOp::Bga,
        CrossoverOp::Heuristic,
        CrossoverOp::Average,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CrossoverOp::Discrete => "discrete",
            CrossoverOp::SimpleArithmetic => "simple-arithmetic",
            CrossoverOp::WholeArithmetic => "whole-arithmetic",
            CrossoverOp::Local => "local",
            CrossoverOp::Sbx => "sbx",
            CrossoverOp::BlxAlpha => "blx-alpha",
            CrossoverOp::Flat => "flat",
            CrossoverOp::Bga => "bga",
            CrossoverOp::Heuristic => "heuristic",
            CrossoverOp::Average => "average",
        }
    }
}

impl fmt::Display for CrossoverOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CrossoverOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CrossoverOp::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown crossover operator `{s}`")))
    }
}

/// `from + w (to - from)` for `w` in `[0, 1]`, kept inside the closed
/// interval spanned by the endpoints despite rounding.
#[inline]
fn between(from: f64, to: f64, w: f64) -> f64 {
    (from + w * (to - from)).clamp(from.min(to), from.max(to))
}

/// Recombine two parents into one offspring clipped to `domain`.
///
/// Every operator returns the parent unchanged when both parents are equal.
pub fn crossover(
    op: CrossoverOp,
    cfg: &GaConfig,
    first: &Individual,
    second: &Individual,
    rng: &mut RngStream,
    domain: Bounds,
) -> Result<Genotype> {
    let a = first.genotype.genes();
    let b = second.genotype.genes();
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "parents differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    let mut child: Vec<f64> = match op {
        CrossoverOp::Discrete => a
            .iter()
            .zip(b)
            .map(|(&x, &y)| if rng.coin(0.5) { x } else { y })
            .collect(),
        CrossoverOp::SimpleArithmetic => {
            let cut = rng.index(n);
            a.iter()
                .zip(b)
                .enumerate()
                .map(|(i, (&x, &y))| if i < cut { x } else { 0.5 * (x + y) })
                .collect()
        }
        CrossoverOp::WholeArithmetic => {
            let w = rng.unit();
            a.iter().zip(b).map(|(&x, &y)| between(y, x, w)).collect()
        }
        CrossoverOp::Local => a
            .iter()
            .zip(b)
            .map(|(&x, &y)| between(y, x, rng.unit()))
            .collect(),
        CrossoverOp::Sbx => {
            let keep_first = rng.coin(0.5);
            let exponent = 1.0 / (cfg.sbx_eta + 1.0);
            a.iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let u = rng.unit();
                    let beta = if u <= 0.5 {
                        (2.0 * u).powf(exponent)
                    } else {
                        (1.0 / (2.0 * (1.0 - u))).powf(exponent)
                    };
                    let mid = 0.5 * (x + y);
                    let half = 0.5 * beta * (y - x);
                    if keep_first {
                        mid - half
                    } else {
                        mid + half
                    }
                })
                .collect()
        }
        CrossoverOp::BlxAlpha => a
            .iter()
            .zip(b)
            .map(|(&x, &y)| {
                let (lo, hi) = (x.min(y), x.max(y));
                let d = hi - lo;
                rng.uniform(lo - cfg.blx_alpha * d, hi + cfg.blx_alpha * d)
            })
            .collect(),
        CrossoverOp::Flat => a
            .iter()
            .zip(b)
            .map(|(&x, &y)| rng.uniform(x.min(y), x.max(y)))
            .collect(),
        CrossoverOp::Bga => {
            let (lo, hi) = cfg.bga_range;
            let t = rng.uniform(lo, hi);
            a.iter().zip(b).map(|(&x, &y)| x + t * (y - x)).collect()
        }
        CrossoverOp::Heuristic => {
            let (better, worse) = if second.fitness < first.fitness { (b, a) } else { (a, b) };
            let r = rng.unit();
            better
                .iter()
                .zip(worse)
                .map(|(&x, &y)| x + r * (x - y))
                .collect()
        }
        CrossoverOp::Average => a.iter().zip(b).map(|(&x, &y)| 0.5 * (x + y)).collect(),
    };
    for v in &mut child {
        *v = domain.clip(*v)?;
    }
    Ok(Genotype::from_vec_unchecked(child))
}
