//! Variation and selection operators.

use rand::Rng;

use crate::error::{Error, Result};
use crate::evolve::config::{GaConfig, GreedyScope};
use crate::instance::{Conformation, DistanceInstance, FitnessCache};

/// Runs one tournament of `size` uniform draws with replacement and returns
/// the index of the lowest-fitness entrant (lowest index on ties).
pub fn tournament_index<R: Rng + ?Sized>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    let mut winner = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let k = rng.random_range(0..fitness.len());
        if fitness[k] < fitness[winner] || (fitness[k] == fitness[winner] && k < winner) {
            winner = k;
        }
    }
    winner
}

/// Picks two parents by independent tournaments.
pub fn tournament_select<'a, R: Rng + ?Sized>(
    members: &'a [Conformation],
    fitness: &[f64],
    cfg: &GaConfig,
    rng: &mut R,
) -> (&'a Conformation, &'a Conformation) {
    let a = tournament_index(fitness, cfg.tournament_size, rng);
    let b = tournament_index(fitness, cfg.tournament_size, rng);
    (&members[a], &members[b])
}

/// Gene-wise uniform crossover: each gene comes from `p1` with probability
/// `uniform_rate`, otherwise from `p2`.
pub fn uniform_crossover<R: Rng + ?Sized>(
    p1: &Conformation,
    p2: &Conformation,
    uniform_rate: f64,
    rng: &mut R,
) -> Result<Conformation> {
    if p1.genes().len() != p2.genes().len() {
        return Err(Error::DimensionMismatch {
            expected: p1.genes().len(),
            found: p2.genes().len(),
        });
    }
    let genes = p1
        .genes()
        .iter()
        .zip(p2.genes())
        .map(|(&a, &b)| {
            if rng.random::<f64>() < uniform_rate {
                a
            } else {
                b
            }
        })
        .collect();
    Conformation::from_genes(genes)
}

/// Resamples each gene from `[0, bound)` with probability `rate`.
/// Returns the number of genes touched.
pub fn random_mutate<R: Rng + ?Sized>(
    x: &mut Conformation,
    bound: f64,
    rate: f64,
    rng: &mut R,
) -> usize {
    let mut mutated = 0;
    for gene in x.genes_mut() {
        if rng.random::<f64>() < rate {
            *gene = rng.random::<f64>() * bound;
            mutated += 1;
        }
    }
    mutated
}

/// Greedy per-gene search. For every visited gene, `greedy_trials` uniform
/// values are scored through `cache` and the best one replaces the gene only
/// if it strictly lowers the squared-error sum; the incumbent wins ties.
///
/// Returns the number of genes that changed. `cache` must describe `x` on
/// entry and still does on exit.
pub fn greedy_mutate<R: Rng + ?Sized>(
    x: &mut Conformation,
    inst: &DistanceInstance,
    cfg: &GaConfig,
    rng: &mut R,
    cache: &mut FitnessCache,
) -> Result<usize> {
    let num_genes = inst.num_genes();
    if x.genes().len() != num_genes {
        return Err(Error::DimensionMismatch {
            expected: num_genes,
            found: x.genes().len(),
        });
    }
    let bound = inst.search_bound();
    let mut improved = 0;
    let mut visit = |gene: usize, x: &mut Conformation, rng: &mut R| -> Result<()> {
        let atom = gene / 3;
        let axis = gene % 3;
        let constrained = !inst.incident(atom).is_empty();
        let mut probe = x.position(atom);
        let mut best_delta = 0.0;
        let mut best_value = None;
        for _ in 0..cfg.greedy_trials {
            let value = rng.random::<f64>() * bound;
            if !constrained {
                continue;
            }
            probe[axis] = value;
            let delta = cache.probe_atom(x, inst, atom, &probe);
            if delta < best_delta {
                best_delta = delta;
                best_value = Some(value);
            }
        }
        if let Some(value) = best_value {
            probe[axis] = value;
            cache.update_atom(x, inst, atom, probe)?;
            improved += 1;
        }
        Ok(())
    };
    match cfg.greedy_scope {
        GreedyScope::AllGenes => {
            for gene in 0..num_genes {
                visit(gene, x, rng)?;
            }
        }
        GreedyScope::SingleGene => {
            let gene = rng.random_range(0..num_genes);
            visit(gene, x, rng)?;
        }
    }
    Ok(improved)
}

/// Gaussian-kernel similarity `exp(-|x1 - x2|^2 / (2 sigma^2))` over all genes.
pub fn similarity(x1: &Conformation, x2: &Conformation, sigma: f64) -> Result<f64> {
    if x1.genes().len() != x2.genes().len() {
        return Err(Error::DimensionMismatch {
            expected: x1.genes().len(),
            found: x2.genes().len(),
        });
    }
    let sq: f64 = x1
        .genes()
        .iter()
        .zip(x2.genes())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((-sq / (2.0 * sigma * sigma)).exp())
}
