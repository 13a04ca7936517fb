use crate::error::{Error, Result};
use crate::genotype::{Genotype, RngStream};

use super::{DeConfig, Evaluator, Individual};

/// Three distinct indices, all different from `target`.
fn pick_donors(n: usize, target: usize, rng: &mut RngStream) -> [usize; 3] {
    let mut out = [0usize; 3];
    let mut k = 0;
    while k < 3 {
        let c = rng.index(n);
        if c != target && !out[..k].contains(&c) {
            out[k] = c;
            k += 1;
        }
    }
    out
}

/// One generation of DE/rand/1/bin with greedy replacement.
///
/// Trials are built from the current generation and selected into the next
/// one. When the budget runs out mid-generation the remaining targets are
/// carried over unchanged.
pub fn de_generation(
    population: &mut Vec<Individual>,
    cfg: &DeConfig,
    eval: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Result<()> {
    let n = population.len();
    if n < 4 {
        return Err(Error::invalid("DE population must hold at least 4 individuals"));
    }
    if population.iter().any(|i| i.fitness.is_none()) {
        return Err(Error::InvalidState("population contains unevaluated individuals".into()));
    }
    let bounds = eval.layout().genotype_bounds;
    let mut next = population.clone();
    for (i, slot) in next.iter_mut().enumerate() {
        if eval.exhausted() {
            break;
        }
        let [r1, r2, r3] = pick_donors(n, i, rng);
        let (x1, x2, x3) = (
            population[r1].genotype.genes(),
            population[r2].genotype.genes(),
            population[r3].genotype.genes(),
        );
        let target = population[i].genotype.genes();
        let dim = target.len();
        let forced = rng.index(dim);
        let mut trial = Vec::with_capacity(dim);
        for j in 0..dim {
            let v = if j == forced || rng.coin(cfg.cr) {
                x1[j] + cfg.f * (x2[j] - x3[j])
            } else {
                target[j]
            };
            trial.push(bounds.clip(v)?);
        }
        let trial = Genotype::from_vec_unchecked(trial);
        let fitness = eval.evaluate(&trial)?;
        if fitness <= population[i].score() {
            *slot = Individual {
                genotype: trial,
                fitness: Some(fitness),
            };
        }
    }
    *population = next;
    Ok(())
}
