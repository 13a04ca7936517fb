use crate::error::{Error, Result};
use crate::genotype::RngStream;

use super::{crossover, CrossoverOp, Evaluator, GaConfig, Individual};

/// Three distinct indices drawn uniformly.
fn pick_three(n: usize, rng: &mut RngStream) -> [usize; 3] {
    let a = rng.index(n);
    let mut b = rng.index(n - 1);
    if b >= a {
        b += 1;
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let mut c = rng.index(n - 2);
    if c >= lo {
        c += 1;
    }
    if c >= hi {
        c += 1;
    }
    [a, b, c]
}

/// One steady-state iteration: the worst of three random individuals is
/// replaced by the (possibly mutated) crossover of the other two.
///
/// Costs exactly one evaluation.
pub fn ga_step(
    population: &mut [Individual],
    cfg: &GaConfig,
    eval: &mut Evaluator<'_>,
    rng: &mut RngStream,
) -> Result<()> {
    if population.len() < 3 {
        return Err(Error::invalid("GA population must hold at least 3 individuals"));
    }
    if population.iter().any(|i| i.fitness.is_none()) {
        return Err(Error::InvalidState("population contains unevaluated individuals".into()));
    }
    let trio = pick_three(population.len(), rng);
    let worst_score = trio
        .iter()
        .map(|&i| population[i].score())
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = trio
        .iter()
        .copied()
        .filter(|&i| population[i].score() == worst_score)
        .collect();
    let worst = tied[rng.index(tied.len())];
    let mut parents = trio.iter().copied().filter(|&i| i != worst);
    let (p1, p2) = (parents.next().unwrap(), parents.next().unwrap());

    let layout = *eval.layout();
    let op = CrossoverOp::ALL[rng.index(CrossoverOp::ALL.len())];
    let mut child = crossover(op, cfg, &population[p1], &population[p2], rng, layout.genotype_bounds)?;
    if rng.coin(cfg.mutation_probability) {
        let i = rng.index(child.len());
        let b = layout.genotype_bounds;
        child.genes_mut()[i] = rng.uniform(b.lower(), b.upper());
    }
    let fitness = eval.evaluate(&child)?;
    population[worst] = Individual {
        genotype: child,
        fitness: Some(fitness),
    };
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genotype::Genotype;
    use crate::mapping::MappingSpec;
    use crate::problems::{make_instance, Objective};

    #[test]
    fn pick_three_is_distinct_and_covers() {
        let mut rng = RngStream::new(1);
        let mut seen = [0u32; 5];
        for _ in 0..5_000 {
            let t = pick_three(5, &mut rng);
            assert!(t[0] != t[1] && t[1] != t[2] && t[0] != t[2]);
            for i in t {
                seen[i] += 1;
            }
        }
        // Each index appears in 3/5 of draws.
        for s in seen {
            assert!((2_700..3_300).contains(&s), "{seen:?}");
        }
    }

    #[test]
    fn identical_population_without_mutation_keeps_fitness() {
        let mut p = make_instance("sphere", 3, 1).unwrap();
        let cfg = GaConfig {
            mutation_probability: 0.0,
            ..GaConfig::default()
        };
        let mut eval = Evaluator::new(MappingSpec::Identity, &mut p, 1_000).unwrap();
        let g = Genotype::new(vec![0.3, -1.2, 2.0]).unwrap();
        let f = eval.evaluate(&g).unwrap();
        let mut pop = vec![
            Individual {
                genotype: g,
                fitness: Some(f)
            };
            10
        ];
        let mut rng = RngStream::new(4);
        for _ in 0..200 {
            ga_step(&mut pop, &cfg, &mut eval, &mut rng).unwrap();
        }
        assert!(pop.iter().all(|i| i.fitness == Some(f)));
    }

    #[test]
    fn best_never_worsens_and_accounting_is_exact() {
        let mut p = make_instance("rastrigin-rot", 2, 3).unwrap();
        let cfg = GaConfig::default();
        let budget = 100 + 2_000;
        let mut eval = Evaluator::new(MappingSpec::Identity, &mut p, budget).unwrap();
        let mut rng = RngStream::new(8);
        let mut pop: Vec<Individual> = (0..100).map(|_| eval.random_individual(&mut rng).unwrap()).collect();
        let mut best = pop.iter().map(|i| i.score()).fold(f64::INFINITY, f64::min);
        while !eval.exhausted() {
            ga_step(&mut pop, &cfg, &mut eval, &mut rng).unwrap();
            let now = pop.iter().map(|i| i.score()).fold(f64::INFINITY, f64::min);
            assert!(now <= best);
            best = now;
        }
        assert_eq!(eval.evals(), budget);
        drop(eval);
        assert_eq!(p.eval_count(), budget);
    }

    #[test]
    fn unevaluated_population_is_rejected() {
        let mut p = make_instance("sphere", 2, 1).unwrap();
        let mut eval = Evaluator::new(MappingSpec::Identity, &mut p, 10).unwrap();
        let g = Genotype::new(vec![0.0, 0.0]).unwrap();
        let mut pop = vec![Individual::unevaluated(g); 4];
        let r = ga_step(&mut pop, &GaConfig::default(), &mut eval, &mut RngStream::new(0));
        assert!(matches!(r, Err(Error::InvalidState(_))));
    }
}
