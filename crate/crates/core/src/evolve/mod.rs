//! Genetic algorithm engine.

mod config;
mod engine;
pub mod operators;
mod population;
mod trace;

pub use config::{Algorithm, GaConfig, GreedyScope};
pub use engine::{run, EngineRng, RunOutcome};
pub use operators::{
    greedy_mutate, random_mutate, similarity, tournament_index, tournament_select,
    uniform_crossover,
};
pub use population::Population;
pub use trace::{Events, RunTrace, TraceRow};
