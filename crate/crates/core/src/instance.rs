//! Constraint graph, conformation encoding and the LDE objective.
//!
//! An instance is a set of atoms together with a sparse list of interval
//! distance constraints `lower <= |c_i - c_j| <= upper`. A conformation
//! stores the coordinates of every atom as a flat gene vector
//! `[x0, y0, z0, x1, y1, z1, ...]`.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};

/// Minimum spacing between consecutive residues, in Å. The search box edge is
/// this spacing times the atom count.
pub const RESIDUE_SPACING: f64 = 3.8;

/// A 3-D point in Å.
pub type Point = [f64; 3];

/// Euclidean distance between two points.
///
/// Instance generation and fitness evaluation both go through this function,
/// so the same coordinates always produce bit-identical distances.
#[inline]
pub fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Violation of the interval `[lower, upper]` by the distance `d`.
#[inline]
pub fn constraint_error(lower: f64, upper: f64, d: f64) -> f64 {
    (lower - d).max(d - upper).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceConstraint {
    pub i: usize,
    pub j: usize,
    pub lower: f64,
    pub upper: f64,
}

impl DistanceConstraint {
    /// Builds a constraint, normalizing the pair so that `i < j`.
    pub fn new(a: usize, b: usize, lower: f64, upper: f64) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidInstance(format!(
                "constraint joins atom {a} to itself"
            )));
        }
        if !(lower.is_finite() && upper.is_finite()) || lower < 0.0 || lower > upper {
            return Err(Error::InvalidInstance(format!(
                "bounds ({lower}, {upper}) for pair ({a}, {b}) violate 0 <= lower <= upper"
            )));
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        Ok(Self { i, j, lower, upper })
    }

    #[inline]
    pub fn error(&self, d: f64) -> f64 {
        constraint_error(self.lower, self.upper, d)
    }
}

/// A sparse interval distance geometry instance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceInstance {
    name: String,
    num_atoms: usize,
    constraints: Vec<DistanceConstraint>,
    reference: Option<Vec<Point>>,
    /// Constraint indices incident to each atom.
    adjacency: Vec<Vec<usize>>,
}

impl DistanceInstance {
    pub fn new(
        name: impl Into<String>,
        num_atoms: usize,
        constraints: Vec<DistanceConstraint>,
        reference: Option<Vec<Point>>,
    ) -> Result<Self> {
        if num_atoms < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 atoms, got {num_atoms}"
            )));
        }
        if constraints.is_empty() {
            return Err(Error::InvalidInstance("constraint list is empty".into()));
        }
        let mut seen = HashSet::with_capacity(constraints.len());
        let mut adjacency = vec![Vec::new(); num_atoms];
        for (k, c) in constraints.iter().enumerate() {
            if c.i >= c.j {
                return Err(Error::InvalidInstance(format!(
                    "constraint {k} must satisfy i < j, got ({}, {})",
                    c.i, c.j
                )));
            }
            if c.j >= num_atoms {
                return Err(Error::AtomOutOfRange {
                    index: c.j,
                    num_atoms,
                });
            }
            if !(c.lower >= 0.0 && c.lower <= c.upper && c.upper.is_finite()) {
                return Err(Error::InvalidInstance(format!(
                    "constraint {k} has bounds ({}, {})",
                    c.lower, c.upper
                )));
            }
            if !seen.insert((c.i, c.j)) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate constraint for pair ({}, {})",
                    c.i, c.j
                )));
            }
            adjacency[c.i].push(k);
            adjacency[c.j].push(k);
        }
        if let Some(reference) = &reference {
            if reference.len() != num_atoms {
                return Err(Error::InvalidInstance(format!(
                    "reference has {} positions, expected {num_atoms}",
                    reference.len()
                )));
            }
            if reference.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInstance(
                    "reference contains non-finite coordinates".into(),
                ));
            }
        }
        Ok(Self {
            name: name.into(),
            num_atoms,
            constraints,
            reference,
            adjacency,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    pub fn constraints(&self) -> &[DistanceConstraint] {
        &self.constraints
    }

    pub fn reference(&self) -> Option<&[Point]> {
        self.reference.as_deref()
    }

    /// Indices into [`constraints`](Self::constraints) touching `atom`.
    pub fn incident(&self, atom: usize) -> &[usize] {
        &self.adjacency[atom]
    }

    /// Number of genes a conformation for this instance carries.
    pub fn num_genes(&self) -> usize {
        3 * self.num_atoms
    }

    /// Upper edge of the cubic search box `[0, 3.8 V]`.
    pub fn search_bound(&self) -> f64 {
        RESIDUE_SPACING * self.num_atoms as f64
    }

    /// Returns a copy with every interval replaced by `f(constraint)`.
    pub fn map_bounds(&self, mut f: impl FnMut(&DistanceConstraint) -> (f64, f64)) -> Result<Self> {
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                let (lower, upper) = f(c);
                DistanceConstraint::new(c.i, c.j, lower, upper)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            self.name.clone(),
            self.num_atoms,
            constraints,
            self.reference.clone(),
        )
    }

    /// Number of connected components of the constraint graph, counting
    /// atoms without constraints as singleton components.
    pub fn connected_components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.num_atoms).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = self.num_atoms;
        for c in &self.constraints {
            let (a, b) = (find(&mut parent, c.i), find(&mut parent, c.j));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components
    }
}

/// One candidate placement of all atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Conformation {
    genes: Vec<f64>,
}

impl Conformation {
    pub fn from_genes(genes: Vec<f64>) -> Result<Self> {
        if genes.is_empty() || !genes.len().is_multiple_of(3) {
            return Err(Error::InvalidInstance(format!(
                "gene count {} is not a positive multiple of 3",
                genes.len()
            )));
        }
        Ok(Self { genes })
    }

    pub fn from_positions(positions: &[Point]) -> Result<Self> {
        Self::from_genes(positions.iter().flatten().copied().collect())
    }

    /// Samples every gene uniformly from `[0, bound)`.
    pub fn random<R: Rng + ?Sized>(num_atoms: usize, bound: f64, rng: &mut R) -> Self {
        let genes = (0..3 * num_atoms)
            .map(|_| rng.random::<f64>() * bound)
            .collect();
        Self { genes }
    }

    pub fn num_atoms(&self) -> usize {
        self.genes.len() / 3
    }

    pub fn genes(&self) -> &[f64] {
        &self.genes
    }

    pub(crate) fn genes_mut(&mut self) -> &mut [f64] {
        &mut self.genes
    }

    #[inline]
    pub fn position(&self, atom: usize) -> Point {
        let k = 3 * atom;
        [self.genes[k], self.genes[k + 1], self.genes[k + 2]]
    }

    #[inline]
    pub fn set_position(&mut self, atom: usize, p: Point) {
        let k = 3 * atom;
        self.genes[k..k + 3].copy_from_slice(&p);
    }

    pub fn positions(&self) -> impl Iterator<Item = Point> + '_ {
        self.genes.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    pub fn within_bounds(&self, bound: f64) -> bool {
        self.genes.iter().all(|&g| (0.0..=bound).contains(&g))
    }

    pub(crate) fn check_matches(&self, inst: &DistanceInstance) -> Result<()> {
        if self.genes.len() != inst.num_genes() {
            return Err(Error::DimensionMismatch {
                expected: inst.num_genes(),
                found: self.genes.len(),
            });
        }
        Ok(())
    }
}

#[inline]
fn squared_error(conf: &Conformation, c: &DistanceConstraint) -> f64 {
    let e = c.error(distance(&conf.position(c.i), &conf.position(c.j)));
    e * e
}

/// Root-mean-square constraint violation of `conf` on `inst`.
pub fn lde(conf: &Conformation, inst: &DistanceInstance) -> Result<f64> {
    conf.check_matches(inst)?;
    let sum: f64 = inst
        .constraints()
        .iter()
        .map(|c| squared_error(conf, c))
        .sum();
    Ok((sum / inst.constraints().len() as f64).sqrt())
}

/// Number of committed updates after which the running sum is rebuilt from
/// the stored terms.
pub const RESUM_INTERVAL: usize = 10_000;

/// The running sum is also rebuilt once it falls below this fraction of its
/// peak: cancellation leaves residue proportional to the peak, and the square
/// root in the LDE magnifies it as the sum approaches zero.
const RESUM_DROP: f64 = 1e-4;

/// Cached per-constraint squared errors of one conformation.
///
/// Moving a single atom only touches the constraints incident to it, so both
/// probing a candidate position and committing a move cost O(deg(atom)).
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessCache {
    terms: Vec<f64>,
    sum: f64,
    /// Largest running sum since the last rebuild.
    peak: f64,
    updates_since_resum: usize,
}

impl FitnessCache {
    pub fn build(conf: &Conformation, inst: &DistanceInstance) -> Result<Self> {
        conf.check_matches(inst)?;
        let terms: Vec<f64> = inst
            .constraints()
            .iter()
            .map(|c| squared_error(conf, c))
            .collect();
        let sum = terms.iter().sum();
        Ok(Self {
            terms,
            sum,
            peak: sum,
            updates_since_resum: 0,
        })
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    pub fn sum_squared(&self) -> f64 {
        self.sum
    }

    pub fn lde(&self) -> f64 {
        (self.sum.max(0.0) / self.terms.len() as f64).sqrt()
    }

    /// Change in the squared-error sum if `atom` were moved to `pos`.
    ///
    /// Returns exactly `0.0` when every incident term is unchanged.
    #[inline]
    pub fn probe_atom(
        &self,
        conf: &Conformation,
        inst: &DistanceInstance,
        atom: usize,
        pos: &Point,
    ) -> f64 {
        let constraints = inst.constraints();
        let mut delta = 0.0;
        for &k in inst.incident(atom) {
            let c = &constraints[k];
            let other = if c.i == atom { c.j } else { c.i };
            let e = c.error(distance(pos, &conf.position(other)));
            delta += e * e - self.terms[k];
        }
        delta
    }

    /// Moves `atom` to `pos` in `conf` and refreshes the incident terms.
    /// Returns the new LDE. Moving back to the old position restores it.
    pub fn update_atom(
        &mut self,
        conf: &mut Conformation,
        inst: &DistanceInstance,
        atom: usize,
        pos: Point,
    ) -> Result<f64> {
        if atom >= inst.num_atoms() {
            return Err(Error::AtomOutOfRange {
                index: atom,
                num_atoms: inst.num_atoms(),
            });
        }
        conf.check_matches(inst)?;
        conf.set_position(atom, pos);
        let constraints = inst.constraints();
        for &k in inst.incident(atom) {
            let fresh = squared_error(conf, &constraints[k]);
            self.sum += fresh - self.terms[k];
            self.terms[k] = fresh;
        }
        self.updates_since_resum += 1;
        self.peak = self.peak.max(self.sum);
        if self.updates_since_resum >= RESUM_INTERVAL || self.sum < RESUM_DROP * self.peak {
            self.resum();
        }
        Ok(self.lde())
    }

    /// Rebuilds the running sum from the stored terms.
    pub fn resum(&mut self) {
        self.sum = self.terms.iter().sum();
        self.peak = self.sum;
        self.updates_since_resum = 0;
    }
}
