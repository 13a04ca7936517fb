//! Value types shared by every other module: genotypes, search bounds and
//! the seeded random stream.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed search interval `[lower, upper]` applied to every coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct Bounds {
    lower: f64,
    upper: f64,
}

impl Bounds {
    /// The interval used by every problem family in the toolkit.
    pub const SYMMETRIC_FIVE: Bounds = Bounds {
        lower: -5.0,
        upper: 5.0,
    };

    /// Domain of compressed genes.
    pub const UNIT: Bounds = Bounds {
        lower: 0.0,
        upper: 1.0,
    };

    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::invalid(format!(
                "bounds must be finite, got [{lower}, {upper}]"
            )));
        }
        if lower >= upper {
            return Err(Error::invalid(format!(
                "lower bound {lower} must be below upper bound {upper}"
            )));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.lower && value <= self.upper
    }

    /// Clamp a finite value into the interval. NaN is rejected.
    pub fn clip(&self, value: f64) -> Result<f64> {
        if value.is_nan() {
            return Err(Error::invalid("cannot clip NaN"));
        }
        Ok(self.clamp_unchecked(value))
    }

    /// Clamp without the NaN check; callers guarantee a non-NaN input.
    #[inline]
    pub(crate) fn clamp_unchecked(&self, value: f64) -> f64 {
        value.max(self.lower).min(self.upper)
    }
}

impl TryFrom<(f64, f64)> for Bounds {
    type Error = Error;

    fn try_from((lower, upper): (f64, f64)) -> Result<Self> {
        Bounds::new(lower, upper)
    }
}

impl From<Bounds> for (f64, f64) {
    fn from(b: Bounds) -> Self {
        (b.lower, b.upper)
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// Free-function form of [`Bounds::clip`].
pub fn clip(value: f64, bounds: Bounds) -> Result<f64> {
    bounds.clip(value)
}

/// The flat vector of reals an optimizer manipulates.
///
/// Always non-empty, every gene finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Genotype(Vec<f64>);

impl Genotype {
    pub fn new(genes: Vec<f64>) -> Result<Self> {
        if genes.is_empty() {
            return Err(Error::invalid("genotype must have at least one gene"));
        }
        if let Some(i) = genes.iter().position(|g| !g.is_finite()) {
            return Err(Error::invalid(format!(
                "gene {i} is not finite ({})",
                genes[i]
            )));
        }
        Ok(Genotype(genes))
    }

    /// Skips validation. Only for genes produced by clamping finite values.
    pub(crate) fn from_vec_unchecked(genes: Vec<f64>) -> Self {
        debug_assert!(!genes.is_empty() && genes.iter().all(|g| g.is_finite()));
        Genotype(genes)
    }

    pub fn genes(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn genes_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Deterministic pseudo-random stream.
///
/// Backed by ChaCha8; identical seeds give identical draw sequences on every
/// platform. Independent streams for parallel runs are obtained with
/// [`RngStream::derive`].
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for a sub-task identified by `path` under `master`.
    pub fn derive(master: u64, path: &[u64]) -> Self {
        RngStream::new(derive_seed(master, path))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw from the closed interval `[lo, hi]`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        // random::<f64>() is in [0, 1); the affine form keeps lo == hi exact.
        let u: f64 = self.inner.random();
        (lo + u * (hi - lo)).min(hi)
    }

    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.inner.random()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    #[inline]
    pub fn coin(&mut self, p: f64) -> bool {
        self.inner.random_bool(p.clamp(0.0, 1.0))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a master seed with an index path into a child seed.
///
/// Different paths (including paths of different lengths) give unrelated
/// seeds; the mapping is stable across releases since result files record it.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ (path.len() as u64).rotate_left(32));
    for &p in path {
        h = splitmix64(h ^ splitmix64(p));
    }
    h
}

/// Draw a genotype with every gene i.i.d. uniform in `bounds`.
pub fn uniform_genotype(length: usize, bounds: Bounds, rng: &mut RngStream) -> Result<Genotype> {
    if length == 0 {
        return Err(Error::invalid("genotype length must be at least 1"));
    }
    let genes = (0..length)
        .map(|_| rng.uniform(bounds.lower(), bounds.upper()))
        .collect();
    Ok(Genotype::from_vec_unchecked(genes))
}
