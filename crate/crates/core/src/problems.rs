//! In-repo benchmark suite: ten scalable functions, two per landscape
//! category, instantiated by a random shift and (except for the separable
//! pair) a random rotation.
//!
//! Every base function `f` has its minimum `0` at `z = 0`; an instance
//! evaluates `f(R (x - x_opt))`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::genotype::{derive_seed, Bounds, RngStream};

/// Objective value at or below which (relative to the optimum) a run scores a hit.
pub const HIT_THRESHOLD: f64 = 1e-8;

/// Anything an optimizer can minimize. Implementations count their own
/// evaluations.
pub trait Objective {
    fn dimension(&self) -> usize;
    fn bounds(&self) -> Bounds;
    /// Known optimum value, used for hit accounting.
    fn optimum(&self) -> f64 {
        0.0
    }
    fn evaluate(&mut self, x: &[f64]) -> Result<f64>;
    fn eval_count(&self) -> u64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionCategory {
    Separable,
    LowModerateConditioning,
    HighConditioningUnimodal,
    MultimodalAdequate,
    MultimodalWeak,
}

impl FunctionCategory {
    pub const ALL: [FunctionCategory; 5] = [
        FunctionCategory::Separable,
        FunctionCategory::LowModerateConditioning,
        FunctionCategory::HighConditioningUnimodal,
        FunctionCategory::MultimodalAdequate,
        FunctionCategory::MultimodalWeak,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FunctionCategory::Separable => "separable",
            FunctionCategory::LowModerateConditioning => "low-moderate-conditioning",
            FunctionCategory::HighConditioningUnimodal => "high-conditioning-unimodal",
            FunctionCategory::MultimodalAdequate => "multimodal-adequate",
            FunctionCategory::MultimodalWeak => "multimodal-weak",
        }
    }
}

impl fmt::Display for FunctionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FunctionCategory::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown function category `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionId {
    Sphere,
    RastriginSeparable,
    Rosenbrock,
    AttractiveSector,
    EllipsoidRotated,
    BentCigar,
    RastriginRotated,
    SchaffersF7,
    Schwefel,
    LunacekBiRastrigin,
}

impl FunctionId {
    pub const ALL: [FunctionId; 10] = [
        FunctionId::Sphere,
        FunctionId::RastriginSeparable,
        FunctionId::Rosenbrock,
        FunctionId::AttractiveSector,
        FunctionId::EllipsoidRotated,
        FunctionId::BentCigar,
        FunctionId::RastriginRotated,
        FunctionId::SchaffersF7,
        FunctionId::Schwefel,
        FunctionId::LunacekBiRastrigin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FunctionId::Sphere => "sphere",
            FunctionId::RastriginSeparable => "rastrigin-sep",
            FunctionId::Rosenbrock => "rosenbrock",
            FunctionId::AttractiveSector => "attractive-sector",
            FunctionId::EllipsoidRotated => "ellipsoid-rot",
            FunctionId::BentCigar => "bent-cigar",
            FunctionId::RastriginRotated => "rastrigin-rot",
            FunctionId::SchaffersF7 => "schaffers-f7",
            FunctionId::Schwefel => "schwefel",
            FunctionId::LunacekBiRastrigin => "lunacek-bi-rastrigin",
        }
    }

    pub fn category(&self) -> FunctionCategory {
        use FunctionCategory::*;
        match self {
            FunctionId::Sphere | FunctionId::RastriginSeparable => Separable,
            FunctionId::Rosenbrock | FunctionId::AttractiveSector => LowModerateConditioning,
            FunctionId::EllipsoidRotated | FunctionId::BentCigar => HighConditioningUnimodal,
            FunctionId::RastriginRotated | FunctionId::SchaffersF7 => MultimodalAdequate,
            FunctionId::Schwefel | FunctionId::LunacekBiRastrigin => MultimodalWeak,
        }
    }

    pub fn is_rotated(&self) -> bool {
        self.category() != FunctionCategory::Separable
    }

    /// Functions built from neighbouring coordinate pairs need two dimensions.
    fn min_dimension(&self) -> usize {
        match self {
            FunctionId::Rosenbrock | FunctionId::SchaffersF7 => 2,
            _ => 1,
        }
    }

    /// The unshifted, unrotated function; minimum 0 at the origin.
    pub fn base(&self, z: &[f64]) -> f64 {
        let d = z.len() as f64;
        match self {
            FunctionId::Sphere => z.iter().map(|v| v * v).sum(),
            FunctionId::RastriginSeparable | FunctionId::RastriginRotated => rastrigin(z),
            FunctionId::Rosenbrock => z
                .windows(2)
                .map(|w| {
                    let (a, b) = (w[0] + 1.0, w[1] + 1.0);
                    100.0 * (a * a - b).powi(2) + (a - 1.0).powi(2)
                })
                .sum(),
            FunctionId::AttractiveSector => {
                let s: f64 = z
                    .iter()
                    .map(|&v| if v > 0.0 { (100.0 * v).powi(2) } else { v * v })
                    .sum();
                s.powf(0.9)
            }
            FunctionId::EllipsoidRotated => {
                if z.len() == 1 {
                    return z[0] * z[0];
                }
                z.iter()
                    .enumerate()
                    .map(|(i, v)| 10f64.powf(6.0 * i as f64 / (d - 1.0)) * v * v)
                    .sum()
            }
            FunctionId::BentCigar => {
                z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>()
            }
            FunctionId::SchaffersF7 => {
                let acc: f64 = z
                    .windows(2)
                    .map(|w| {
                        let s = (w[0] * w[0] + w[1] * w[1]).sqrt();
                        let r = s.sqrt();
                        r + r * (50.0 * s.powf(0.2)).sin().powi(2)
                    })
                    .sum();
                (acc / (d - 1.0)).powi(2)
            }
            FunctionId::Schwefel => schwefel(z),
            FunctionId::LunacekBiRastrigin => lunacek(z),
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FunctionId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown function id `{s}`")))
    }
}

fn rastrigin(z: &[f64]) -> f64 {
    10.0 * z.len() as f64
        + z.iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

/// Schwefel's sine function, recentred so the classic minimiser near 420.97
/// sits at the origin. Coordinates are scaled by 100 and leaving the classic
/// `[-500, 500]` box is penalised quadratically, which keeps every term
/// non-negative.
const SCHWEFEL_CENTRE: f64 = 420.968_746_227_503_6;

fn schwefel_term(y: f64) -> f64 {
    y * y.abs().sqrt().sin()
}

fn schwefel(z: &[f64]) -> f64 {
    let reference = schwefel_term(SCHWEFEL_CENTRE);
    let total: f64 = z
        .iter()
        .map(|&v| {
            let y = SCHWEFEL_CENTRE + 100.0 * v;
            let excess = (y.abs() - 500.0).max(0.0);
            reference - schwefel_term(y) + excess * excess
        })
        .sum();
    total / z.len() as f64
}

/// Double-funnel Rastrigin with the good funnel at the origin.
fn lunacek(z: &[f64]) -> f64 {
    const MU0: f64 = 2.5;
    let d = z.len() as f64;
    let s = 1.0 - 1.0 / (2.0 * (d + 20.0).sqrt() - 8.2);
    let mu1 = -((MU0 * MU0 - 1.0) / s).sqrt();
    let first: f64 = z.iter().map(|v| v * v).sum();
    let second: f64 = d + s * z.iter().map(|v| (v + MU0 - mu1).powi(2)).sum::<f64>();
    first.min(second) + 10.0 * z.iter().map(|v| 1.0 - (2.0 * PI * v).cos()).sum::<f64>()
}

/// A shifted and possibly rotated benchmark function of fixed dimension.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    function: FunctionId,
    instance_seed: u64,
    dimension: usize,
    bounds: Bounds,
    shift: Vec<f64>,
    /// Row-major `dimension x dimension`, `None` for the identity.
    rotation: Option<Vec<f64>>,
    eval_count: u64,
    scratch: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(function: FunctionId, dimension: usize, instance_seed: u64) -> Result<Self> {
        if dimension < function.min_dimension() {
            return Err(Error::invalid(format!(
                "{function} needs dimension >= {}, got {dimension}",
                function.min_dimension()
            )));
        }
        let mut rng = RngStream::new(derive_seed(instance_seed, &[function as u64, dimension as u64]));
        let shift = (0..dimension).map(|_| rng.uniform(-4.0, 4.0)).collect();
        let rotation = function
            .is_rotated()
            .then(|| random_orthogonal(dimension, &mut rng));
        Ok(ProblemInstance {
            function,
            instance_seed,
            dimension,
            bounds: Bounds::SYMMETRIC_FIVE,
            shift,
            rotation,
            eval_count: 0,
            scratch: vec![0.0; dimension],
        })
    }

    pub fn function(&self) -> FunctionId {
        self.function
    }

    pub fn category(&self) -> FunctionCategory {
        self.function.category()
    }

    pub fn instance_seed(&self) -> u64 {
        self.instance_seed
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    /// Row-major rotation; the identity is materialised for separable functions.
    pub fn rotation(&self) -> Vec<f64> {
        match &self.rotation {
            Some(r) => r.clone(),
            None => {
                let n = self.dimension;
                (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect()
            }
        }
    }

    pub fn is_hit(&self, fitness: f64) -> bool {
        is_hit(self.optimum(), fitness)
    }

    /// The objective without touching the evaluation counter.
    pub fn peek(&self, x: &[f64]) -> Result<f64> {
        let mut z = vec![0.0; self.dimension];
        self.transform(x, &mut z)?;
        finite(self.function.base(&z), self.function)
    }

    fn transform(&self, x: &[f64], z: &mut [f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::invalid(format!(
                "phenotype has {} values, {} expects {}",
                x.len(),
                self.function,
                self.dimension
            )));
        }
        match &self.rotation {
            None => {
                for ((zi, xi), si) in z.iter_mut().zip(x).zip(&self.shift) {
                    *zi = xi - si;
                }
            }
            Some(r) => {
                let n = self.dimension;
                for (i, zi) in z.iter_mut().enumerate() {
                    let row = &r[i * n..(i + 1) * n];
                    *zi = row
                        .iter()
                        .zip(x.iter().zip(&self.shift))
                        .map(|(rij, (xj, sj))| rij * (xj - sj))
                        .sum();
                }
            }
        }
        Ok(())
    }
}

fn finite(v: f64, f: FunctionId) -> Result<f64> {
    if v.is_nan() {
        Err(Error::InvalidState(format!("{f} produced NaN")))
    } else {
        Ok(v)
    }
}

impl Objective for ProblemInstance {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn bounds(&self) -> Bounds {
        self.bounds
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        let mut z = std::mem::take(&mut self.scratch);
        let r = self.transform(x, &mut z);
        let out = r.and_then(|_| finite(self.function.base(&z), self.function));
        self.scratch = z;
        if out.is_ok() {
            self.eval_count += 1;
        }
        out
    }

    fn eval_count(&self) -> u64 {
        self.eval_count
    }
}

/// Create a benchmark instance by name.
pub fn make_instance(function_id: &str, dimension: usize, instance_seed: u64) -> Result<ProblemInstance> {
    if dimension == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    ProblemInstance::new(function_id.parse()?, dimension, instance_seed)
}

pub fn is_hit(optimum: f64, fitness: f64) -> bool {
    fitness - optimum <= HIT_THRESHOLD
}

/// Haar-distributed orthogonal matrix: Gram-Schmidt on a Gaussian matrix.
/// Classical QR normalised to a positive diagonal of R gives the uniform
/// distribution, which Gram-Schmidt produces directly.
fn random_orthogonal(n: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let mut q: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(rng)).collect();
        let mut ok = true;
        for i in 0..n {
            // Re-orthogonalise twice for numerical safety.
            for _ in 0..2 {
                for j in 0..i {
                    let dot: f64 = (0..n).map(|k| q[i * n + k] * q[j * n + k]).sum();
                    for k in 0..n {
                        q[i * n + k] -= dot * q[j * n + k];
                    }
                }
            }
            let norm = (0..n).map(|k| q[i * n + k].powi(2)).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for k in 0..n {
                q[i * n + k] /= norm;
            }
        }
        if ok {
            return q;
        }
    }
}
