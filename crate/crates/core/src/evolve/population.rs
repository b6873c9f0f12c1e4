use rand::Rng;

use crate::error::{Error, Result};
use crate::evolve::config::GaConfig;
use crate::evolve::operators::similarity;
use crate::instance::{lde, Conformation, DistanceInstance};

/// A fixed-size population with cached fitness and the best individual
/// seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    members: Vec<Conformation>,
    fitness: Vec<f64>,
    global_best: Conformation,
    global_best_lde: f64,
}

impl Population {
    /// Samples `population_size` conformations uniformly from the search box.
    pub fn init<R: Rng + ?Sized>(
        inst: &DistanceInstance,
        cfg: &GaConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let bound = inst.search_bound();
        let members = (0..cfg.population_size)
            .map(|_| Conformation::random(inst.num_atoms(), bound, rng))
            .collect();
        Self::from_members(inst, members)
    }

    /// Wraps existing members, evaluating each one.
    pub fn from_members(inst: &DistanceInstance, members: Vec<Conformation>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidConfig("population must not be empty".into()));
        }
        let fitness = members
            .iter()
            .map(|m| lde(m, inst))
            .collect::<Result<Vec<_>>>()?;
        let best = argmin(&fitness);
        Ok(Self {
            global_best: members[best].clone(),
            global_best_lde: fitness[best],
            members,
            fitness,
        })
    }

    pub(crate) fn from_parts(
        members: Vec<Conformation>,
        fitness: Vec<f64>,
        global_best: Conformation,
        global_best_lde: f64,
    ) -> Self {
        debug_assert_eq!(members.len(), fitness.len());
        Self {
            members,
            fitness,
            global_best,
            global_best_lde,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Conformation] {
        &self.members
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn global_best(&self) -> &Conformation {
        &self.global_best
    }

    pub fn global_best_lde(&self) -> f64 {
        self.global_best_lde
    }

    /// Index of the lowest-LDE member (lowest index on ties).
    pub fn best_index(&self) -> usize {
        argmin(&self.fitness)
    }

    /// Adopts the current best member as global best if it is strictly better.
    pub fn refresh_global_best(&mut self) -> bool {
        let k = self.best_index();
        if self.fitness[k] < self.global_best_lde {
            self.global_best = self.members[k].clone();
            self.global_best_lde = self.fitness[k];
            true
        } else {
            false
        }
    }

    fn reinitialize<R: Rng + ?Sized>(
        &mut self,
        k: usize,
        inst: &DistanceInstance,
        rng: &mut R,
    ) -> Result<()> {
        let fresh = Conformation::random(inst.num_atoms(), inst.search_bound(), rng);
        self.fitness[k] = lde(&fresh, inst)?;
        self.members[k] = fresh;
        Ok(())
    }

    /// Scans unordered pairs in index order and reinitializes one member of
    /// every pair whose similarity reaches the threshold. The higher index is
    /// replaced unless it holds the current best member, in which case the
    /// lower index goes instead. Reinitialized members take no further part
    /// in the scan.
    ///
    /// Returns the number of members reinitialized.
    pub fn twin_removal<R: Rng + ?Sized>(
        &mut self,
        inst: &DistanceInstance,
        cfg: &GaConfig,
        rng: &mut R,
    ) -> Result<usize> {
        let n = self.members.len();
        let protected = self.best_index();
        let mut replaced = vec![false; n];
        for i in 0..n {
            if replaced[i] {
                continue;
            }
            for j in i + 1..n {
                if replaced[j] {
                    continue;
                }
                let s = similarity(&self.members[i], &self.members[j], cfg.sigma)?;
                if s >= cfg.similarity_threshold {
                    if j == protected {
                        replaced[i] = true;
                        break;
                    }
                    replaced[j] = true;
                }
            }
        }
        let mut count = 0;
        for k in (0..n).filter(|&k| replaced[k]) {
            self.reinitialize(k, inst, rng)?;
            count += 1;
        }
        self.refresh_global_best();
        Ok(count)
    }

    /// Reinitializes the worst `floor(restart_fraction * n)` members; the
    /// current best member is always kept. Returns the number replaced.
    pub fn random_restart<R: Rng + ?Sized>(
        &mut self,
        inst: &DistanceInstance,
        cfg: &GaConfig,
        rng: &mut R,
    ) -> Result<usize> {
        let n = self.members.len();
        let target = ((cfg.restart_fraction * n as f64).floor() as usize).min(n - 1);
        let protected = self.best_index();
        let mut order: Vec<usize> = (0..n).filter(|&k| k != protected).collect();
        // worst first; among equals the higher index goes first
        order.sort_by(|&a, &b| self.fitness[b].total_cmp(&self.fitness[a]).then(b.cmp(&a)));
        order.truncate(target);
        order.sort_unstable();
        for &k in &order {
            self.reinitialize(k, inst, rng)?;
        }
        self.refresh_global_best();
        Ok(order.len())
    }
}

pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = k;
        }
    }
    best
}
