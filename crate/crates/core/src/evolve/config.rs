use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which solver preset to start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Greedy mutation, twin removal and random restart enabled.
    GreMuTRRR,
    /// Plain GA: random mutation only, no twin removal, no restart.
    Basic,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Basic, Algorithm::GreMuTRRR];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::GreMuTRRR => "gremutrrr",
            Algorithm::Basic => "basic",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gremutrrr" => Ok(Algorithm::GreMuTRRR),
            "basic" => Ok(Algorithm::Basic),
            _ => Err(Error::InvalidConfig(format!(
                "unknown algorithm {s:?} (expected gremutrrr or basic)"
            ))),
        }
    }
}

/// Which genes a greedy mutation pass visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GreedyScope {
    #[default]
    AllGenes,
    /// One uniformly chosen gene per pass.
    SingleGene,
}

impl FromStr for GreedyScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_genes" | "all" => Ok(GreedyScope::AllGenes),
            "single_gene" | "single" => Ok(GreedyScope::SingleGene),
            _ => Err(Error::InvalidConfig(format!(
                "unknown greedy scope {s:?} (expected all_genes or single_gene)"
            ))),
        }
    }
}

/// Every knob of the GA engine.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    /// Probability that an offspring is greedily rather than randomly mutated.
    pub greedy_mutation_rate: f64,
    /// Per-gene resampling probability of random mutation.
    pub random_mutation_rate: f64,
    /// Random candidate values tried per gene by greedy mutation.
    pub greedy_trials: usize,
    pub greedy_scope: GreedyScope,
    pub tournament_size: usize,
    /// Per-gene probability of inheriting from the first parent.
    pub uniform_rate: f64,
    /// Bandwidth of the Gaussian similarity kernel.
    pub sigma: f64,
    pub similarity_threshold: f64,
    pub twin_removal: bool,
    pub twin_removal_interval: usize,
    pub random_restart: bool,
    /// Generations over which global-best improvement is measured.
    pub restart_window: usize,
    /// Improvement at or below which a restart fires.
    pub restart_threshold: f64,
    /// Fraction of the population (worst first) reinitialized on restart.
    pub restart_fraction: f64,
    /// Stop early after this many generations without improvement.
    pub stagnation_limit: Option<usize>,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self::gremutrrr()
    }
}

impl GaConfig {
    pub fn gremutrrr() -> Self {
        Self {
            population_size: 50,
            max_generations: 2000,
            greedy_mutation_rate: 0.8,
            random_mutation_rate: 0.015,
            greedy_trials: 20,
            greedy_scope: GreedyScope::AllGenes,
            tournament_size: 5,
            uniform_rate: 0.5,
            sigma: 75.0,
            similarity_threshold: 0.8,
            twin_removal: true,
            twin_removal_interval: 100,
            random_restart: true,
            restart_window: 50,
            restart_threshold: 0.001,
            restart_fraction: 0.5,
            stagnation_limit: None,
            seed: 0,
        }
    }

    /// Same parameters with greedy mutation, twin removal and restart off.
    pub fn basic() -> Self {
        Self {
            greedy_mutation_rate: 0.0,
            twin_removal: false,
            random_restart: false,
            ..Self::gremutrrr()
        }
    }

    pub fn preset(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::GreMuTRRR => Self::gremutrrr(),
            Algorithm::Basic => Self::basic(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probabilities = [
            ("greedy_mutation_rate", self.greedy_mutation_rate),
            ("random_mutation_rate", self.random_mutation_rate),
            ("uniform_rate", self.uniform_rate),
            ("similarity_threshold", self.similarity_threshold),
            ("restart_fraction", self.restart_fraction),
        ];
        for (name, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        let counts = [
            ("population_size", self.population_size),
            ("greedy_trials", self.greedy_trials),
            ("tournament_size", self.tournament_size),
            ("twin_removal_interval", self.twin_removal_interval),
            ("restart_window", self.restart_window),
        ];
        for (name, n) in counts {
            if n == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if self.stagnation_limit == Some(0) {
            return Err(Error::InvalidConfig(
                "stagnation_limit must be at least 1".into(),
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.restart_threshold.is_nan() || self.restart_threshold < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "restart_threshold must be non-negative, got {}",
                self.restart_threshold
            )));
        }
        if self.tournament_size > self.population_size {
            return Err(Error::InvalidConfig(format!(
                "tournament_size {} exceeds population_size {}",
                self.tournament_size, self.population_size
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_differ_only_in_enhancements() {
        let g = GaConfig::gremutrrr();
        let b = GaConfig::basic();
        assert_eq!(b.greedy_mutation_rate, 0.0);
        assert!(!b.twin_removal && !b.random_restart);
        let aligned = GaConfig {
            greedy_mutation_rate: g.greedy_mutation_rate,
            twin_removal: true,
            random_restart: true,
            ..b
        };
        assert_eq!(aligned, g);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            GaConfig {
                greedy_mutation_rate: 1.5,
                ..Default::default()
            },
            GaConfig {
                population_size: 0,
                ..Default::default()
            },
            GaConfig {
                sigma: 0.0,
                ..Default::default()
            },
            GaConfig {
                restart_threshold: -1.0,
                ..Default::default()
            },
            GaConfig {
                tournament_size: 60,
                ..Default::default()
            },
            GaConfig {
                greedy_trials: 0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn algorithm_names() {
        assert_eq!(
            "gremutrrr".parse::<Algorithm>().unwrap(),
            Algorithm::GreMuTRRR
        );
        assert_eq!("basic".parse::<Algorithm>().unwrap(), Algorithm::Basic);
        assert!("vns".parse::<Algorithm>().is_err());
        assert_eq!(Algorithm::GreMuTRRR.to_string(), "gremutrrr");
    }
}
