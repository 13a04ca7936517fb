//! Genotype to phenotype decodings.
//!
//! Five mappings are supported, named by the compact codes used in configs and
//! result tables:
//!
//! | code       | genotype length | gene domain     | decode                                   |
//! |------------|-----------------|-----------------|------------------------------------------|
//! | `def`      | `t`             | problem bounds  | identity                                 |
//! | `exp-s-<m>`| `t*m`           | problem bounds  | sum of `m` consecutive genes, clipped    |
//! | `exp-m-<m>`| `t*m`           | problem bounds  | product of `m` consecutive genes, clipped|
//! | `com-seq`  | `ceil(t/2)`     | `[0, 1]`        | contiguous digit blocks of one gene      |
//! | `com-alt`  | `ceil(t/2)`     | `[0, 1]`        | interleaved digits of one gene           |
//!
//! Compressed genes are read through their decimal rendering: the fractional
//! part of the shortest round-trip representation, zero padded or truncated
//! to [`PRECISION`] digits. Each original receives [`DIGIT_BUDGET`] digits,
//! read as a fraction `u` in `[0, 1)` and mapped to `lower + u * (upper - lower)`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype::{Bounds, Genotype};

/// Number of originals packed into one compressed gene.
pub const COMPRESSION_FACTOR: usize = 2;
/// Decimal digits read from a compressed gene.
pub const PRECISION: usize = 16;
/// Digits available to each original, `ceil(PRECISION / COMPRESSION_FACTOR)`.
pub const DIGIT_BUDGET: usize = PRECISION.div_ceil(COMPRESSION_FACTOR);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpandStrategy {
    Summation,
    Multiplication,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompressStrategy {
    /// Digit blocks `[1..d]`, `[d+1..2d]`, ...
    Sequential,
    /// Digit `i` of each stride of `m` goes to original `i`.
    Alternating,
}

/// Which decoding turns a genotype into a phenotype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MappingSpec {
    Identity,
    Expand {
        strategy: ExpandStrategy,
        factor: usize,
    },
    Compress {
        strategy: CompressStrategy,
    },
}

/// Shape of the genotype a mapping expects for a `t`-dimensional problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenotypeLayout {
    pub phenotype_length: usize,
    pub genotype_length: usize,
    pub genotype_bounds: Bounds,
}

impl MappingSpec {
    pub fn expand(strategy: ExpandStrategy, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::invalid(format!(
                "expansion factor must be at least 2, got {factor}"
            )));
        }
        Ok(MappingSpec::Expand { strategy, factor })
    }

    pub fn code(&self) -> String {
        self.to_string()
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, MappingSpec::Identity)
    }

    pub fn layout(&self, t: usize, problem_bounds: Bounds) -> Result<GenotypeLayout> {
        if t == 0 {
            return Err(Error::invalid("phenotype length must be at least 1"));
        }
        let (genotype_length, genotype_bounds) = match *self {
            MappingSpec::Identity => (t, problem_bounds),
            MappingSpec::Expand { factor, .. } => {
                if factor < 2 {
                    return Err(Error::invalid("expansion factor must be at least 2"));
                }
                let len = t
                    .checked_mul(factor)
                    .ok_or_else(|| Error::invalid("expanded genotype length overflows"))?;
                (len, problem_bounds)
            }
            MappingSpec::Compress { .. } => (t.div_ceil(COMPRESSION_FACTOR), Bounds::UNIT),
        };
        Ok(GenotypeLayout {
            phenotype_length: t,
            genotype_length,
            genotype_bounds,
        })
    }

    /// Decode a genotype into `t` phenotype values.
    pub fn decode(&self, genotype: &Genotype, t: usize, problem_bounds: Bounds) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(t);
        self.decode_into(genotype.genes(), t, problem_bounds, &mut out)?;
        Ok(out)
    }

    /// Allocation-reusing form of [`MappingSpec::decode`]; `out` is cleared first.
    pub fn decode_into(
        &self,
        genes: &[f64],
        t: usize,
        problem_bounds: Bounds,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        let layout = self.layout(t, problem_bounds)?;
        if genes.len() != layout.genotype_length {
            return Err(Error::invalid(format!(
                "genotype has {} genes, mapping {} expects {}",
                genes.len(),
                self,
                layout.genotype_length
            )));
        }
        out.clear();
        match *self {
            MappingSpec::Identity => out.extend_from_slice(genes),
            MappingSpec::Expand { strategy, factor } => {
                for group in genes.chunks_exact(factor) {
                    let raw = match strategy {
                        ExpandStrategy::Summation => group.iter().sum::<f64>(),
                        ExpandStrategy::Multiplication => group.iter().product::<f64>(),
                    };
                    out.push(problem_bounds.clip(raw)?);
                }
            }
            MappingSpec::Compress { strategy } => {
                let mut text = String::with_capacity(32);
                for (g, &gene) in genes.iter().enumerate() {
                    let digits = fraction_digits(gene, &mut text)?;
                    let originals = (t - g * COMPRESSION_FACTOR).min(COMPRESSION_FACTOR);
                    for k in 0..originals {
                        let u = if originals == 1 {
                            digits_to_unit(digits[..DIGIT_BUDGET].iter().copied())
                        } else {
                            digits_to_unit(original_digits(&digits, k, strategy))
                        };
                        out.push(problem_bounds.lower() + u * problem_bounds.width());
                    }
                }
            }
        }
        Ok(())
    }

    /// Inverse of the compressed decode, used to build test fixtures.
    pub fn encode_compressed(&self, phenotype: &[f64], problem_bounds: Bounds) -> Result<Genotype> {
        let MappingSpec::Compress { strategy } = *self else {
            return Err(Error::invalid(format!(
                "encode_compressed needs a compression mapping, got {self}"
            )));
        };
        if phenotype.is_empty() {
            return Err(Error::invalid("phenotype must not be empty"));
        }
        if let Some(x) = phenotype.iter().find(|x| !problem_bounds.contains(**x)) {
            return Err(Error::invalid(format!(
                "value {x} lies outside {problem_bounds}"
            )));
        }
        let scale = 10u64.pow(DIGIT_BUDGET as u32);
        let mut buf = String::new();
        let mut genes = Vec::with_capacity(phenotype.len().div_ceil(COMPRESSION_FACTOR));
        for group in phenotype.chunks(COMPRESSION_FACTOR) {
            let scaled: Vec<f64> = group
                .iter()
                .map(|&x| (x - problem_bounds.lower()) / problem_bounds.width() * scale as f64)
                .collect();
            let mut blocks: Vec<u64> = scaled
                .iter()
                .map(|v| (v.round() as u64).min(scale - 1))
                .collect();
            // Not every 16-digit fraction has a double that renders back to
            // it; nudge the last value (which owns the final digit) to the
            // nearest block that survives the trip.
            let last = blocks.len() - 1;
            let target = scaled[last];
            let centre = blocks[last];
            let mut candidates: Vec<u64> = (centre.saturating_sub(3)..=(centre + 3).min(scale - 1)).collect();
            candidates.sort_by(|a, b| (*a as f64 - target).abs().total_cmp(&(*b as f64 - target).abs()));
            let mut chosen = None;
            for cand in candidates {
                blocks[last] = cand;
                let digits = assemble_digits(&blocks, strategy);
                let mut text = String::from("0.");
                text.extend(digits.iter().map(|d| char::from(b'0' + d)));
                let gene: f64 = text.parse().expect("digit string is a valid float");
                if fraction_digits(gene, &mut buf)? == digits {
                    chosen = Some(gene);
                    break;
                }
            }
            genes.push(chosen.ok_or_else(|| {
                Error::InvalidState(format!("no representable encoding near {group:?}"))
            })?);
        }
        Ok(Genotype::from_vec_unchecked(genes))
    }
}

/// Position within the rendered digit string of digit `j` of original `k`.
#[inline]
fn digit_position(k: usize, j: usize, strategy: CompressStrategy) -> usize {
    match strategy {
        CompressStrategy::Sequential => k * DIGIT_BUDGET + j,
        CompressStrategy::Alternating => k + j * COMPRESSION_FACTOR,
    }
}

fn original_digits(
    digits: &[u8; PRECISION],
    k: usize,
    strategy: CompressStrategy,
) -> impl Iterator<Item = u8> + '_ {
    (0..DIGIT_BUDGET).map(move |j| digits[digit_position(k, j, strategy)])
}

fn digits_to_unit(digits: impl Iterator<Item = u8>) -> f64 {
    let mut n = 0u64;
    let mut scale = 1u64;
    for d in digits {
        n = n * 10 + u64::from(d);
        scale *= 10;
    }
    n as f64 / scale as f64
}

/// The first [`PRECISION`] fractional digits of a gene in `[0, 1]`.
///
/// 1.0 reads as all nines so the decode stays total on the closed interval.
fn assemble_digits(blocks: &[u64], strategy: CompressStrategy) -> [u8; PRECISION] {
    let mut digits = [0u8; PRECISION];
    for (k, &n) in blocks.iter().enumerate() {
        let mut rest = n;
        for j in (0..DIGIT_BUDGET).rev() {
            let pos = if blocks.len() == 1 { j } else { digit_position(k, j, strategy) };
            digits[pos] = (rest % 10) as u8;
            rest /= 10;
        }
    }
    digits
}

pub fn fraction_digits(gene: f64, buf: &mut String) -> Result<[u8; PRECISION]> {
    if !(0.0..=1.0).contains(&gene) {
        return Err(Error::invalid(format!(
            "compressed gene {gene} lies outside [0, 1]"
        )));
    }
    let mut digits = [0u8; PRECISION];
    if gene == 1.0 {
        digits.fill(9);
        return Ok(digits);
    }
    if gene == 0.0 {
        return Ok(digits);
    }
    buf.clear();
    write!(buf, "{gene}").expect("writing to a String cannot fail");
    if let Some((_, frac)) = buf.split_once('.') {
        for (slot, b) in digits.iter_mut().zip(frac.bytes()) {
            *slot = b - b'0';
        }
    }
    Ok(digits)
}

impl fmt::Display for MappingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingSpec::Identity => f.write_str("def"),
            MappingSpec::Expand { strategy, factor } => {
                let s = match strategy {
                    ExpandStrategy::Summation => 's',
                    ExpandStrategy::Multiplication => 'm',
                };
                write!(f, "exp-{s}-{factor}")
            }
            MappingSpec::Compress {
                strategy: CompressStrategy::Sequential,
            } => f.write_str("com-seq"),
            MappingSpec::Compress {
                strategy: CompressStrategy::Alternating,
            } => f.write_str("com-alt"),
        }
    }
}

impl FromStr for MappingSpec {
    type Err = Error;

    fn from_str(code: &str) -> Result<Self> {
        match code {
            "def" => return Ok(MappingSpec::Identity),
            "com-seq" => {
                return Ok(MappingSpec::Compress {
                    strategy: CompressStrategy::Sequential,
                })
            }
            "com-alt" => {
                return Ok(MappingSpec::Compress {
                    strategy: CompressStrategy::Alternating,
                })
            }
            _ => {}
        }
        let unknown = || Error::invalid(format!("unknown mapping code `{code}`"));
        let rest = code.strip_prefix("exp-").ok_or_else(unknown)?;
        let (kind, factor) = rest.split_once('-').ok_or_else(unknown)?;
        let strategy = match kind {
            "s" => ExpandStrategy::Summation,
            "m" => ExpandStrategy::Multiplication,
            _ => return Err(unknown()),
        };
        if factor.is_empty() || !factor.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let factor: usize = factor
            .parse()
            .map_err(|_| Error::invalid(format!("expansion factor in `{code}` is out of range")))?;
        MappingSpec::expand(strategy, factor)
    }
}

impl TryFrom<String> for MappingSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MappingSpec> for String {
    fn from(m: MappingSpec) -> Self {
        m.to_string()
    }
}
