//! Solver for the sparse interval molecular distance geometry problem.
//!
//! Given atom pairs with distance intervals `[lower, upper]`, find 3-D
//! coordinates that satisfy as many intervals as possible. The objective is
//! the root-mean-square interval violation (LDE) and the search is a
//! genetic algorithm with greedy per-gene mutation, twin removal and random
//! restart (GreMuTRRR), alongside a plain GA baseline.
//!
//! - [`instance`]: constraint graph, conformations, LDE and its incremental cache
//! - [`ingest`]: PDB parsing, benchmark instance generation, `.dgp` files
//! - [`evolve`]: the GA engine
//! - [`bench`]: experiment harness used by the `mdgp` binary

pub mod bench;
pub mod error;
pub mod evolve;
pub mod ingest;
pub mod instance;

pub use error::{Error, Result};
pub use evolve::{run, Algorithm, GaConfig, RunOutcome, RunTrace};
pub use ingest::{build_instance, parse_pdb, read_instance, write_instance, AtomMode, GenConfig};
pub use instance::{
    constraint_error, lde, Conformation, DistanceConstraint, DistanceInstance, FitnessCache,
};
