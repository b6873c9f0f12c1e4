use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::evolve::config::GaConfig;
use crate::evolve::operators::{
    greedy_mutate, random_mutate, tournament_select, uniform_crossover,
};
use crate::evolve::population::Population;
use crate::evolve::trace::{Events, RunTrace, TraceRow};
use crate::instance::{lde, Conformation, DistanceInstance, FitnessCache};

/// Result of one engine run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub best: Conformation,
    pub best_lde: f64,
    /// Number of generations executed after initialization.
    pub generations: usize,
    pub trace: RunTrace,
}

/// The random number generator behind every stochastic choice of a run.
///
/// ChaCha8 seeded through `seed_from_u64`; its output stream is fixed by the
/// algorithm and independent of platform.
pub type EngineRng = ChaCha8Rng;

/// Runs the generational loop on `inst`.
///
/// Each generation keeps the global best as member 0 (exempt from mutation),
/// breeds `population_size - 1` children by tournament selection and uniform
/// crossover, and mutates each child greedily with probability
/// `greedy_mutation_rate`, randomly otherwise. Twin removal fires every
/// `twin_removal_interval` generations. A random restart fires once the
/// global best has improved by at most `restart_threshold` over the last
/// `restart_window` generations; the window restarts after each firing.
pub fn run(inst: &DistanceInstance, cfg: &GaConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut rng = EngineRng::seed_from_u64(cfg.seed);
    let bound = inst.search_bound();

    let mut pop = Population::init(inst, cfg, &mut rng)?;
    let mut trace = RunTrace::default();
    trace.push(TraceRow {
        generation: 0,
        best_lde: pop.fitness()[pop.best_index()],
        global_best_lde: pop.global_best_lde(),
        events: Events::default(),
    });
    let mut history = vec![pop.global_best_lde()];
    let mut window_start = 0;
    let mut last_improvement = 0;
    let mut generations = 0;

    for generation in 1..=cfg.max_generations {
        let mut children = Vec::with_capacity(cfg.population_size - 1);
        for _ in 1..cfg.population_size {
            let (p1, p2) = tournament_select(pop.members(), pop.fitness(), cfg, &mut rng);
            children.push(uniform_crossover(p1, p2, cfg.uniform_rate, &mut rng)?);
        }
        let mut child_fitness = Vec::with_capacity(children.len());
        for child in &mut children {
            if rng.random::<f64>() < cfg.greedy_mutation_rate {
                let mut cache = FitnessCache::build(child, inst)?;
                greedy_mutate(child, inst, cfg, &mut rng, &mut cache)?;
                let full = lde(child, inst)?;
                debug_assert!(
                    (cache.lde() - full).abs() < 1e-9,
                    "cache drifted: {} vs {full}",
                    cache.lde()
                );
                child_fitness.push(full);
            } else {
                random_mutate(child, bound, cfg.random_mutation_rate, &mut rng);
                child_fitness.push(lde(child, inst)?);
            }
        }
        let generation_best = if child_fitness.is_empty() {
            pop.global_best_lde()
        } else {
            child_fitness.iter().copied().fold(f64::INFINITY, f64::min)
        };

        let previous_best = pop.global_best_lde();
        let elite = pop.global_best().clone();
        let mut members = Vec::with_capacity(cfg.population_size);
        let mut fitness = Vec::with_capacity(cfg.population_size);
        members.push(elite.clone());
        fitness.push(previous_best);
        members.extend(children);
        fitness.extend(child_fitness);
        pop = Population::from_parts(members, fitness, elite, previous_best);
        pop.refresh_global_best();

        let mut events = Events::default();
        if cfg.twin_removal && generation % cfg.twin_removal_interval == 0 {
            pop.twin_removal(inst, cfg, &mut rng)?;
            events.twin_removal = true;
        }
        if cfg.random_restart
            && generation - window_start >= cfg.restart_window
            && history[generation - cfg.restart_window] - pop.global_best_lde()
                <= cfg.restart_threshold
        {
            pop.random_restart(inst, cfg, &mut rng)?;
            window_start = generation;
            events.restart = true;
        }

        let global_best_lde = pop.global_best_lde();
        if global_best_lde < previous_best {
            last_improvement = generation;
        }
        history.push(global_best_lde);
        trace.push(TraceRow {
            generation,
            best_lde: generation_best,
            global_best_lde,
            events,
        });
        generations = generation;

        if let Some(limit) = cfg.stagnation_limit {
            if generation - last_improvement >= limit {
                break;
            }
        }
    }

    Ok(RunOutcome {
        best: pop.global_best().clone(),
        best_lde: pop.global_best_lde(),
        generations,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::DistanceConstraint;

    fn helix_instance(v: usize) -> DistanceInstance {
        let pts: Vec<[f64; 3]> = (0..v)
            .map(|k| {
                let t = k as f64 * 100f64.to_radians();
                [2.3 * t.cos(), 2.3 * t.sin(), 1.5 * k as f64]
            })
            .collect();
        let cfg = crate::ingest::GenConfig {
            seed: 1,
            ..Default::default()
        };
        crate::ingest::build_instance("helix", &pts, &cfg).unwrap()
    }

    fn short(cfg: GaConfig) -> GaConfig {
        GaConfig {
            population_size: 12,
            max_generations: 60,
            ..cfg
        }
    }

    #[test]
    fn deterministic_and_monotone() {
        let inst = helix_instance(20);
        let cfg = short(GaConfig {
            seed: 7,
            ..GaConfig::gremutrrr()
        });
        let a = run(&inst, &cfg).unwrap();
        let b = run(&inst, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.is_monotone());
        assert_eq!(a.trace.rows.len(), 61);
        assert_eq!(a.generations, 60);
        assert_eq!(a.trace.final_lde(), Some(a.best_lde));
        assert!((lde(&a.best, &inst).unwrap() - a.best_lde).abs() < 1e-9);
        assert!(a.best.within_bounds(inst.search_bound()));
    }

    #[test]
    fn zero_generations_returns_initial_best() {
        let inst = helix_instance(15);
        let cfg = GaConfig {
            max_generations: 0,
            seed: 3,
            ..GaConfig::default()
        };
        let out = run(&inst, &cfg).unwrap();
        let mut rng = EngineRng::seed_from_u64(3);
        let pop = Population::init(&inst, &cfg, &mut rng).unwrap();
        assert_eq!(out.best_lde, pop.global_best_lde());
        assert_eq!(out.trace.rows.len(), 1);
        assert_eq!(out.generations, 0);
    }

    #[test]
    fn basic_preset_fires_no_events() {
        let inst = helix_instance(15);
        let cfg = GaConfig {
            max_generations: 250,
            population_size: 10,
            ..GaConfig::basic()
        };
        let out = run(&inst, &cfg).unwrap();
        assert_eq!(out.trace.count_events(), (0, 0));
    }

    #[test]
    fn twin_removal_fires_on_schedule() {
        let inst = helix_instance(10);
        let cfg = GaConfig {
            twin_removal_interval: 7,
            random_restart: false,
            ..short(GaConfig::gremutrrr())
        };
        let out = run(&inst, &cfg).unwrap();
        let fired: Vec<usize> = out
            .trace
            .rows
            .iter()
            .filter(|r| r.events.twin_removal)
            .map(|r| r.generation)
            .collect();
        assert_eq!(fired, (1..=8).map(|k| 7 * k).collect::<Vec<_>>());
    }

    #[test]
    fn restart_fires_on_stagnation() {
        // A satisfied instance stagnates at LDE 0, so restarts fire every window.
        let c = DistanceConstraint::new(0, 1, 0.0, 1000.0).unwrap();
        let inst = DistanceInstance::new("loose", 3, vec![c], None).unwrap();
        let cfg = GaConfig {
            restart_window: 10,
            twin_removal: false,
            ..short(GaConfig::gremutrrr())
        };
        let out = run(&inst, &cfg).unwrap();
        let fired: Vec<usize> = out
            .trace
            .rows
            .iter()
            .filter(|r| r.events.restart)
            .map(|r| r.generation)
            .collect();
        assert_eq!(fired, vec![10, 20, 30, 40, 50, 60]);
    }

    #[test]
    fn stagnation_limit_stops_early() {
        let c = DistanceConstraint::new(0, 1, 0.0, 1000.0).unwrap();
        let inst = DistanceInstance::new("loose", 3, vec![c], None).unwrap();
        let cfg = GaConfig {
            stagnation_limit: Some(5),
            ..short(GaConfig::gremutrrr())
        };
        let out = run(&inst, &cfg).unwrap();
        assert_eq!(out.generations, 5);
    }

    #[test]
    fn single_member_population() {
        let inst = helix_instance(8);
        let cfg = GaConfig {
            population_size: 1,
            tournament_size: 1,
            max_generations: 5,
            ..GaConfig::default()
        };
        let out = run(&inst, &cfg).unwrap();
        assert_eq!(out.trace.rows.len(), 6);
        assert!(out.trace.is_monotone());
    }
}
