//! Steady-state GA and rand/1/bin DE over mapped genotypes.
//!
//! The engines see only the genotype length and bounds from the mapping
//! layout; decoding and objective evaluation happen inside [`Evaluator`],
//! which also enforces the evaluation budget and records the best-so-far
//! trajectory.

mod crossover;
mod de;
mod ga;

pub use crossover::{crossover, CrossoverOp};
pub use de::de_generation;
pub use ga::ga_step;

use crate::error::{Error, Result};
use crate::genotype::{uniform_genotype, Bounds, Genotype, RngStream};
use crate::mapping::{GenotypeLayout, MappingSpec};
use crate::problems::{is_hit, Objective};
use crate::stats::ecdf_targets;

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    /// `None` until evaluated.
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn unevaluated(genotype: Genotype) -> Self {
        Individual {
            genotype,
            fitness: None,
        }
    }

    pub(crate) fn score(&self) -> f64 {
        self.fitness.expect("individual evaluated")
    }
}

pub type Population = Vec<Individual>;

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    /// Chance that an offspring has one gene reset uniformly.
    pub mutation_probability: f64,
    pub sbx_eta: f64,
    pub blx_alpha: f64,
    /// Range of the line-recombination factor.
    pub bga_range: (f64, f64),
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            mutation_probability: 0.3,
            sbx_eta: 2.0,
            blx_alpha: 0.5,
            bga_range: (-0.25, 1.25),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 3 {
            return Err(Error::invalid("GA population must hold at least 3 individuals"));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err(Error::invalid("mutation probability must lie in [0, 1]"));
        }
        if !(self.sbx_eta >= 0.0 && self.sbx_eta.is_finite()) {
            return Err(Error::invalid("SBX eta must be non-negative"));
        }
        if !(self.blx_alpha >= 0.0 && self.blx_alpha.is_finite()) {
            return Err(Error::invalid("BLX alpha must be non-negative"));
        }
        let (lo, hi) = self.bga_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::invalid("BGA range must be a finite interval"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeConfig {
    pub population_size: usize,
    /// Differential weight.
    pub f: f64,
    /// Crossover rate.
    pub cr: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            population_size: 100,
            f: 1.0,
            cr: 0.9,
        }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 {
            return Err(Error::invalid("DE population must hold at least 4 individuals"));
        }
        if !(self.f > 0.0 && self.f.is_finite()) {
            return Err(Error::invalid("DE differential weight must be positive"));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(Error::invalid("DE crossover rate must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Ga(GaConfig),
    De(DeConfig),
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Ga(_) => "ga",
            Algorithm::De(_) => "de",
        }
    }

    pub fn population_size(&self) -> usize {
        match self {
            Algorithm::Ga(c) => c.population_size,
            Algorithm::De(c) => c.population_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Algorithm::Ga(c) => c.validate(),
            Algorithm::De(c) => c.validate(),
        }
    }
}

/// Decode-and-evaluate context shared by both engines.
pub struct Evaluator<'a> {
    mapping: MappingSpec,
    layout: GenotypeLayout,
    problem_bounds: Bounds,
    objective: &'a mut dyn Objective,
    phenotype: Vec<f64>,
    budget: u64,
    evals: u64,
    best: Option<(f64, Genotype)>,
    improvements: Vec<(u64, f64)>,
    targets: Vec<f64>,
    target_hits: Vec<Option<u64>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(mapping: MappingSpec, objective: &'a mut dyn Objective, budget: u64) -> Result<Self> {
        let problem_bounds = objective.bounds();
        let layout = mapping.layout(objective.dimension(), problem_bounds)?;
        let targets = ecdf_targets();
        let target_hits = vec![None; targets.len()];
        Ok(Evaluator {
            mapping,
            layout,
            problem_bounds,
            objective,
            phenotype: Vec::with_capacity(layout.phenotype_length),
            budget,
            evals: 0,
            best: None,
            improvements: Vec::new(),
            targets,
            target_hits,
        })
    }

    pub fn layout(&self) -> &GenotypeLayout {
        &self.layout
    }

    pub fn evals(&self) -> u64 {
        self.evals
    }

    pub fn exhausted(&self) -> bool {
        self.evals >= self.budget
    }

    pub fn best_fitness(&self) -> Option<f64> {
        self.best.as_ref().map(|(f, _)| *f)
    }

    /// Decode and score one genotype, consuming one unit of budget.
    pub fn evaluate(&mut self, genotype: &Genotype) -> Result<f64> {
        if self.exhausted() {
            return Err(Error::InvalidState("evaluation budget exhausted".into()));
        }
        self.mapping.decode_into(
            genotype.genes(),
            self.layout.phenotype_length,
            self.problem_bounds,
            &mut self.phenotype,
        )?;
        let fitness = self.objective.evaluate(&self.phenotype)?;
        if fitness.is_nan() {
            return Err(Error::InvalidState("objective returned NaN".into()));
        }
        self.evals += 1;
        if self.best.as_ref().is_none_or(|(b, _)| fitness < *b) {
            self.best = Some((fitness, genotype.clone()));
            self.improvements.push((self.evals, fitness));
            let gap = fitness - self.objective.optimum();
            for (hit, &target) in self.target_hits.iter_mut().zip(&self.targets) {
                if hit.is_none() && gap <= target {
                    *hit = Some(self.evals);
                }
            }
        }
        Ok(fitness)
    }

    pub(crate) fn random_individual(&mut self, rng: &mut RngStream) -> Result<Individual> {
        let g = uniform_genotype(self.layout.genotype_length, self.layout.genotype_bounds, rng)?;
        let f = self.evaluate(&g)?;
        Ok(Individual {
            genotype: g,
            fitness: Some(f),
        })
    }

    fn finish(self) -> Result<RunTrace> {
        let (final_best, best_genotype) = self
            .best
            .ok_or_else(|| Error::InvalidState("run finished without evaluations".into()))?;
        Ok(RunTrace {
            evals: self.evals,
            final_best,
            hit: is_hit(self.objective.optimum(), final_best),
            best_genotype,
            improvements: self.improvements,
            target_hits: self.target_hits,
        })
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    /// Evaluations consumed.
    pub evals: u64,
    pub final_best: f64,
    pub hit: bool,
    pub best_genotype: Genotype,
    /// `(evaluation index, best so far)` at every strict improvement,
    /// starting with the first evaluation.
    pub improvements: Vec<(u64, f64)>,
    /// First evaluation index reaching each ECDF target, in ladder order.
    pub target_hits: Vec<Option<u64>>,
}

impl RunTrace {
    /// Best-so-far fitness after `evals` evaluations.
    pub fn best_at(&self, evals: u64) -> Option<f64> {
        let idx = self.improvements.partition_point(|(e, _)| *e <= evals);
        idx.checked_sub(1).map(|i| self.improvements[i].1)
    }
}

/// Run `algorithm` on `objective` through `mapping` until `budget` evaluations.
pub fn run(
    algorithm: &Algorithm,
    mapping: MappingSpec,
    objective: &mut dyn Objective,
    budget: u64,
    seed: u64,
) -> Result<RunTrace> {
    algorithm.validate()?;
    let pop_size = algorithm.population_size();
    if budget < pop_size as u64 {
        return Err(Error::invalid(format!(
            "budget {budget} is below the population size {pop_size}"
        )));
    }
    let mut rng = RngStream::new(seed);
    let mut eval = Evaluator::new(mapping, objective, budget)?;
    let mut population: Population = Vec::with_capacity(pop_size);
    for _ in 0..pop_size {
        population.push(eval.random_individual(&mut rng)?);
    }
    match algorithm {
        Algorithm::Ga(cfg) => {
            while !eval.exhausted() {
                ga_step(&mut population, cfg, &mut eval, &mut rng)?;
            }
        }
        Algorithm::De(cfg) => {
            while !eval.exhausted() {
                de_generation(&mut population, cfg, &mut eval, &mut rng)?;
            }
        }
    }
    eval.finish()
}
