//! Additive-delay arbiter PUF model and the modeling-attack fitness.
//!
//! A challenge `c` of `n` bits maps to the feature vector
//! `phi_i = prod_{l=i..n} (-1)^{c_l}` for `i <= n`, with `phi_{n+1} = 1`.
//! The response is `1` when `w . phi <= 0` and `0` otherwise.

use std::io::{Read, Write};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::genotype::{Bounds, RngStream};
use crate::problems::Objective;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Challenge(Vec<u8>);

impl Challenge {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::invalid("challenge must have at least one bit"));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("challenge bits must be 0 or 1"));
        }
        Ok(Challenge(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Feature vector of a challenge; length `n + 1`, entries `+-1`.
pub fn phi_transform(challenge: &Challenge) -> Vec<f64> {
    let n = challenge.len();
    let mut phi = vec![1.0; n + 1];
    let mut acc = 1.0;
    for i in (0..n).rev() {
        if challenge.0[i] == 1 {
            acc = -acc;
        }
        phi[i] = acc;
    }
    phi
}

#[inline]
fn response_from_dot(dot: f64) -> u8 {
    // Zero is resolved toward 1.
    u8::from(dot <= 0.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Response bit of delay vector `w` to `challenge`. `w` must have `n + 1` entries.
pub fn respond(w: &[f64], challenge: &Challenge) -> Result<u8> {
    if w.len() != challenge.len() + 1 {
        return Err(Error::invalid(format!(
            "delay vector has {} entries, challenge of {} bits needs {}",
            w.len(),
            challenge.len(),
            challenge.len() + 1
        )));
    }
    Ok(response_from_dot(dot(w, &phi_transform(challenge))))
}

/// Challenge-response pairs of one hidden PUF.
///
/// Feature vectors are cached column-major (one column per stage) so fitness
/// evaluation vectorizes across pairs while each pair's dot product is still
/// summed in stage order.
#[derive(Debug, Clone, PartialEq)]
pub struct CrpSet {
    stages: usize,
    challenges: Vec<Challenge>,
    responses: Vec<u8>,
    features: Vec<f64>,
}

impl CrpSet {
    pub fn new(stages: usize, pairs: Vec<(Challenge, u8)>) -> Result<Self> {
        if stages == 0 {
            return Err(Error::invalid("PUF needs at least one stage"));
        }
        let mut challenges = Vec::with_capacity(pairs.len());
        let mut responses = Vec::with_capacity(pairs.len());
        let mut features = Vec::with_capacity(pairs.len() * (stages + 1));
        for (c, r) in pairs {
            if c.len() != stages {
                return Err(Error::invalid(format!(
                    "challenge of {} bits in a {stages}-stage set",
                    c.len()
                )));
            }
            if r > 1 {
                return Err(Error::invalid("responses must be 0 or 1"));
            }
            features.extend(phi_transform(&c));
            challenges.push(c);
            responses.push(r);
        }
        let (rows, width) = (responses.len(), stages + 1);
        let mut columns = vec![0.0; features.len()];
        for (i, row) in features.chunks_exact(width).enumerate() {
            for (j, &v) in row.iter().enumerate() {
                columns[j * rows + i] = v;
            }
        }
        let features = columns;
        Ok(CrpSet {
            stages,
            challenges,
            responses,
            features,
        })
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Challenge, u8)> {
        self.challenges.iter().zip(self.responses.iter().copied())
    }

    /// CSV with header `c1,...,cn,r`, one pair per row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.stages).map(|i| format!("c{i}")).collect();
        header.push("r".into());
        w.write_record(&header)?;
        for (c, r) in self.pairs() {
            let row = c
                .bits()
                .iter()
                .chain(std::iter::once(&r))
                .map(|b| if *b == 1 { "1" } else { "0" });
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        let cols = header.len();
        if cols < 2 {
            return Err(Error::Parse {
                line: 1,
                message: "expected columns c1..cn,r".into(),
            });
        }
        for (i, name) in header.iter().enumerate() {
            let expected = if i + 1 == cols { "r".to_string() } else { format!("c{}", i + 1) };
            if name != expected {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("column {} is `{name}`, expected `{expected}`", i + 1),
                });
            }
        }
        let stages = cols - 1;
        let mut pairs = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let bits = rec
                .iter()
                .map(|f| match f {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(Error::Parse {
                        line,
                        message: format!("expected bit, found `{other}`"),
                    }),
                })
                .collect::<Result<Vec<u8>>>()?;
            let (r, c) = bits.split_last().expect("csv enforces column count");
            pairs.push((Challenge::new(c.to_vec())?, *r));
        }
        CrpSet::new(stages, pairs)
    }
}

/// Sample a hidden delay vector (i.i.d. standard normal) and `count` random
/// challenges with its responses.
pub fn generate_crps(stages: usize, count: usize, rng: &mut RngStream) -> Result<(CrpSet, Vec<f64>)> {
    if stages == 0 {
        return Err(Error::invalid("PUF needs at least one stage"));
    }
    if count == 0 {
        return Err(Error::invalid("CRP count must be at least 1"));
    }
    let w: Vec<f64> = (0..=stages).map(|_| StandardNormal.sample(rng)).collect();
    let pairs = (0..count)
        .map(|_| {
            let bits = (0..stages).map(|_| u8::from(rng.coin(0.5))).collect();
            let c = Challenge(bits);
            let r = response_from_dot(dot(&w, &phi_transform(&c)));
            (c, r)
        })
        .collect();
    Ok((CrpSet::new(stages, pairs)?, w))
}

/// Number of pairs the candidate delay vector answers wrongly.
pub fn puf_fitness(candidate: &[f64], crps: &CrpSet) -> Result<usize> {
    let width = crps.stages + 1;
    if candidate.len() != width {
        return Err(Error::invalid(format!(
            "candidate has {} entries, expected {width}",
            candidate.len()
        )));
    }
    let rows = crps.len();
    if rows == 0 {
        return Ok(0);
    }
    let mut sums = vec![0.0f64; rows];
    for (&wj, column) in candidate.iter().zip(crps.features.chunks_exact(rows)) {
        for (s, &f) in sums.iter_mut().zip(column) {
            *s += wj * f;
        }
    }
    Ok(sums
        .iter()
        .zip(&crps.responses)
        .filter(|(&s, &r)| response_from_dot(s) != r)
        .count())
}

/// Modeling attack as an optimization problem over the `n + 1` delays.
#[derive(Debug, Clone)]
pub struct PufProblem {
    crps: CrpSet,
    bounds: Bounds,
    eval_count: u64,
}

impl PufProblem {
    pub fn new(crps: CrpSet) -> Self {
        PufProblem {
            crps,
            bounds: Bounds::SYMMETRIC_FIVE,
            eval_count: 0,
        }
    }

    pub fn crps(&self) -> &CrpSet {
        &self.crps
    }
}

impl Objective for PufProblem {
    fn dimension(&self) -> usize {
        self.crps.stages + 1
    }

    fn bounds(&self) -> Bounds {
        self.bounds
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        let v = puf_fitness(x, &self.crps)?;
        self.eval_count += 1;
        Ok(v as f64)
    }

    fn eval_count(&self) -> u64 {
        self.eval_count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(bits: &[u8]) -> Challenge {
        Challenge::new(bits.to_vec()).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_transform(&ch(&[0, 0])), vec![1.0, 1.0, 1.0]);
        assert_eq!(phi_transform(&ch(&[1, 0])), vec![-1.0, 1.0, 1.0]);
        assert_eq!(phi_transform(&ch(&[1, 1, 1])), vec![-1.0, 1.0, -1.0, 1.0]);
    }

    #[test]
    fn respond_examples() {
        let w = [0.5, -0.2, 0.1];
        assert_eq!(respond(&w, &ch(&[0, 0])).unwrap(), 0);
        assert_eq!(respond(&w, &ch(&[1, 0])).unwrap(), 1);
        assert!(respond(&w, &ch(&[1])).is_err());
        // Tie goes to 1.
        assert_eq!(respond(&[1.0, -1.0], &ch(&[0])).unwrap(), 1);
    }

    #[test]
    fn single_term_delay_reads_first_feature() {
        let mut rng = RngStream::new(5);
        for _ in 0..50 {
            let bits: Vec<u8> = (0..6).map(|_| u8::from(rng.coin(0.5))).collect();
            let c = ch(&bits);
            let mut w = vec![0.0; 7];
            w[0] = 1.0;
            let phi1 = phi_transform(&c)[0];
            assert_eq!(f64::from(respond(&w, &c).unwrap()), (1.0 - phi1) / 2.0);
        }
    }

    #[test]
    fn challenge_validation() {
        assert!(Challenge::new(vec![]).is_err());
        assert!(Challenge::new(vec![0, 2]).is_err());
    }

    #[test]
    fn generation_is_deterministic_and_sized() {
        let (a, wa) = generate_crps(64, 2000, &mut RngStream::new(3)).unwrap();
        let (b, wb) = generate_crps(64, 2000, &mut RngStream::new(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(wa, wb);
        assert_eq!(wa.len(), 65);
        let (c, _) = generate_crps(32, 2000, &mut RngStream::new(3)).unwrap();
        assert_eq!(c.len(), 2000);
        assert!(generate_crps(4, 0, &mut RngStream::new(3)).is_err());
    }

    #[test]
    fn fitness_of_hidden_and_scaled_vectors() {
        let (set, w) = generate_crps(16, 500, &mut RngStream::new(8)).unwrap();
        assert_eq!(puf_fitness(&w, &set).unwrap(), 0);
        let scaled: Vec<f64> = w.iter().map(|v| v * 3.5).collect();
        assert_eq!(puf_fitness(&scaled, &set).unwrap(), 0);
        let neg: Vec<f64> = w.iter().map(|v| -v).collect();
        assert_eq!(puf_fitness(&neg, &set).unwrap(), set.len());
        assert!(puf_fitness(&w[1..], &set).is_err());
    }

    #[test]
    fn fitness_agrees_with_per_challenge_responses() {
        let mut rng = RngStream::new(21);
        let (crps, _) = generate_crps(16, 300, &mut rng).unwrap();
        for _ in 0..20 {
            let w: Vec<f64> = (0..17).map(|_| rng.uniform(-5.0, 5.0)).collect();
            let slow = crps.pairs().filter(|(c, r)| respond(&w, c).unwrap() != *r).count();
            assert_eq!(puf_fitness(&w, &crps).unwrap(), slow);
        }
    }

    #[test]
    fn csv_roundtrip_and_rejects_garbage() {
        let (set, _) = generate_crps(5, 20, &mut RngStream::new(1)).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("c1,c2,c3,c4,c5,r\n"));
        assert_eq!(CrpSet::read_csv(&buf[..]).unwrap(), set);
        assert!(CrpSet::read_csv("c1,r\n2,0\n".as_bytes()).is_err());
        assert!(CrpSet::read_csv("c1,x\n1,0\n".as_bytes()).is_err());
        assert!(CrpSet::read_csv("c1,c2,r\n1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn problem_counts_evaluations() {
        let (set, w) = generate_crps(8, 100, &mut RngStream::new(2)).unwrap();
        let mut p = PufProblem::new(set);
        assert_eq!(p.dimension(), 9);
        assert_eq!(p.evaluate(&w).unwrap(), 0.0);
        assert!(p.evaluate(&w[..3]).is_err());
        assert_eq!(p.eval_count(), 1);
    }
}
