//! Fixed two-hidden-layer regression networks whose flattened parameters are
//! the phenotype.
//!
//! Genome layout, layer by layer: the weight matrix row-major (one row per
//! neuron of the receiving layer), then that layer's biases. Hidden layers
//! use the logistic sigmoid; the output is linear.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::genotype::{Bounds, RngStream};
use crate::problems::Objective;

/// Layer sizes `input-hidden1-hidden2-output`; output is always 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Architecture {
    pub input: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub output: usize,
}

impl Architecture {
    pub fn new(input: usize, hidden1: usize, hidden2: usize, output: usize) -> Result<Self> {
        if [input, hidden1, hidden2, output].contains(&0) {
            return Err(Error::invalid("layer sizes must be positive"));
        }
        if output != 1 {
            return Err(Error::invalid(format!(
                "regression networks have one output, got {output}"
            )));
        }
        if [input, hidden1, hidden2].iter().any(|&n| n > 4096) {
            return Err(Error::invalid("layer size above 4096"));
        }
        Ok(Architecture {
            input,
            hidden1,
            hidden2,
            output,
        })
    }

    pub fn parameter_count(&self) -> usize {
        let Architecture {
            input: a,
            hidden1: b,
            hidden2: c,
            output: d,
        } = *self;
        a * b + b + b * c + c + c * d + d
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}-{}", self.input, self.hidden1, self.hidden2, self.output)
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('-').collect();
        if parts.len() != 4 {
            return Err(Error::invalid(format!(
                "architecture `{s}` is not of the form a-b-c-d"
            )));
        }
        let mut sizes = [0usize; 4];
        for (slot, p) in sizes.iter_mut().zip(&parts) {
            if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::invalid(format!("bad layer size `{p}` in `{s}`")));
            }
            *slot = p
                .parse()
                .map_err(|_| Error::invalid(format!("layer size `{p}` out of range")))?;
        }
        Architecture::new(sizes[0], sizes[1], sizes[2], sizes[3])
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Dense layer `out = act(W x + b)` reading its parameters from the front of
/// `params`; returns the unread tail.
fn layer<'p>(params: &'p [f64], x: &[f64], out: &mut Vec<f64>, width: usize, hidden: bool) -> &'p [f64] {
    let n_in = x.len();
    let (weights, rest) = params.split_at(width * n_in);
    let (biases, rest) = rest.split_at(width);
    out.clear();
    out.extend(weights.chunks_exact(n_in).zip(biases).map(|(row, b)| {
        let z = b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        if hidden {
            sigmoid(z)
        } else {
            z
        }
    }));
    rest
}

/// Network output for one input vector.
pub fn forward(arch: &Architecture, weights: &[f64], input: &[f64]) -> Result<f64> {
    check_shapes(arch, weights, input.len())?;
    let mut h1 = Vec::with_capacity(arch.hidden1);
    let mut h2 = Vec::with_capacity(arch.hidden2);
    let mut y = Vec::with_capacity(1);
    Ok(forward_with(arch, weights, input, &mut h1, &mut h2, &mut y))
}

fn forward_with(
    arch: &Architecture,
    weights: &[f64],
    input: &[f64],
    h1: &mut Vec<f64>,
    h2: &mut Vec<f64>,
    y: &mut Vec<f64>,
) -> f64 {
    let rest = layer(weights, input, h1, arch.hidden1, true);
    let rest = layer(rest, h1, h2, arch.hidden2, true);
    layer(rest, h2, y, arch.output, false);
    y[0]
}

fn check_shapes(arch: &Architecture, weights: &[f64], input_len: usize) -> Result<()> {
    if weights.len() != arch.parameter_count() {
        return Err(Error::invalid(format!(
            "{arch} needs {} parameters, got {}",
            arch.parameter_count(),
            weights.len()
        )));
    }
    if input_len != arch.input {
        return Err(Error::invalid(format!(
            "{arch} takes {} inputs, got {input_len}",
            arch.input
        )));
    }
    Ok(())
}

/// The three regression targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    /// `3 sin(x) + x`
    F1,
    /// `x + y`
    F2,
    /// `x sin(x)`
    F3,
}

impl Task {
    pub fn inputs(&self) -> usize {
        match self {
            Task::F2 => 2,
            _ => 1,
        }
    }

    pub fn target(&self, x: &[f64]) -> f64 {
        match self {
            Task::F1 => 3.0 * x[0].sin() + x[0],
            Task::F2 => x[0] + x[1],
            Task::F3 => x[0] * x[0].sin(),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::F1 => "f1",
            Task::F2 => "f2",
            Task::F3 => "f3",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(Task::F1),
            "f2" => Ok(Task::F2),
            "f3" => Ok(Task::F3),
            _ => Err(Error::invalid(format!("unknown regression task `{s}`"))),
        }
    }
}

pub const MIN_DATASET_SIZE: usize = 250;
pub const MAX_DATASET_SIZE: usize = 300;
/// Size used by the experiment harness.
pub const DEFAULT_DATASET_SIZE: usize = 275;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: usize,
    samples: Vec<(Vec<f64>, f64)>,
}

impl Dataset {
    pub fn new(samples: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let inputs = samples
            .first()
            .map(|(x, _)| x.len())
            .ok_or_else(|| Error::invalid("dataset must not be empty"))?;
        if inputs == 0 {
            return Err(Error::invalid("samples need at least one input"));
        }
        for (x, y) in &samples {
            if x.len() != inputs {
                return Err(Error::invalid("samples have differing input widths"));
            }
            if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("dataset values must be finite"));
            }
        }
        Ok(Dataset { inputs, samples })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(Vec<f64>, f64)] {
        &self.samples
    }

    /// CSV with header `x1,...,xa,target`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.inputs).map(|i| format!("x{i}")).collect();
        header.push("target".into());
        w.write_record(&header)?;
        for (x, y) in &self.samples {
            w.write_record(x.iter().chain(std::iter::once(y)).map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        let cols = header.len();
        if cols < 2 || header.get(cols - 1) != Some("target") {
            return Err(Error::Parse {
                line: 1,
                message: "expected columns x1..xa,target".into(),
            });
        }
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let values = rec
                .iter()
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("expected number, found `{f}`"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let (y, x) = values.split_last().expect("csv enforces column count");
            samples.push((x.to_vec(), *y));
        }
        Dataset::new(samples)
    }
}

/// Training set for `task`: inputs uniform on `[-5, 5]`, exact targets.
pub fn make_dataset(task: Task, size: usize, rng: &mut RngStream) -> Result<Dataset> {
    if !(MIN_DATASET_SIZE..=MAX_DATASET_SIZE).contains(&size) {
        return Err(Error::invalid(format!(
            "dataset size must lie in [{MIN_DATASET_SIZE}, {MAX_DATASET_SIZE}], got {size}"
        )));
    }
    let samples = (0..size)
        .map(|_| {
            let x: Vec<f64> = (0..task.inputs()).map(|_| rng.uniform(-5.0, 5.0)).collect();
            let y = task.target(&x);
            (x, y)
        })
        .collect();
    Dataset::new(samples)
}

/// Mean squared error of the network over the dataset.
pub fn nn_fitness(arch: &Architecture, weights: &[f64], data: &Dataset) -> Result<f64> {
    check_shapes(arch, weights, data.inputs)?;
    let mut h1 = Vec::with_capacity(arch.hidden1);
    let mut h2 = Vec::with_capacity(arch.hidden2);
    let mut y = Vec::with_capacity(1);
    let sse: f64 = data
        .samples
        .iter()
        .map(|(x, t)| {
            let e = forward_with(arch, weights, x, &mut h1, &mut h2, &mut y) - t;
            e * e
        })
        .sum();
    let mse = sse / data.len() as f64;
    if mse.is_nan() {
        return Err(Error::InvalidState("network produced NaN".into()));
    }
    Ok(mse)
}

#[derive(Debug, Clone)]
pub struct NnProblem {
    arch: Architecture,
    data: Dataset,
    eval_count: u64,
}

impl NnProblem {
    pub fn new(arch: Architecture, data: Dataset) -> Result<Self> {
        if data.inputs != arch.input {
            return Err(Error::invalid(format!(
                "{arch} takes {} inputs but the dataset has {}",
                arch.input, data.inputs
            )));
        }
        Ok(NnProblem {
            arch,
            data,
            eval_count: 0,
        })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }
}

impl Objective for NnProblem {
    fn dimension(&self) -> usize {
        self.arch.parameter_count()
    }

    fn bounds(&self) -> Bounds {
        Bounds::SYMMETRIC_FIVE
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        let v = nn_fitness(&self.arch, x, &self.data)?;
        self.eval_count += 1;
        Ok(v)
    }

    fn eval_count(&self) -> u64 {
        self.eval_count
    }
}
