//! PDB coordinate parsing, benchmark instance generation and the `.dgp`
//! instance file format.
//!
//! The `.dgp` format is line oriented:
//!
//! ```text
//! DGP <name> <V> <|E|>
//! <i> <j> <lower> <upper>        (|E| lines, 0-based, i < j)
//! REF                            (optional)
//! <x> <y> <z>                    (V lines, present only after REF)
//! ```
//!
//! Reals are written with 17 significant digits so a write/read cycle is
//! bit-exact.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{distance, DistanceConstraint, DistanceInstance, Point};

/// Which ATOM records of a structure become instance atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomMode {
    /// One Cα atom per residue.
    Backbone,
    /// Every ATOM record.
    All,
}

impl FromStr for AtomMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backbone" => Ok(AtomMode::Backbone),
            "all" => Ok(AtomMode::All),
            other => Err(Error::InvalidConfig(format!(
                "unknown atom mode {other:?} (expected backbone or all)"
            ))),
        }
    }
}

impl fmt::Display for AtomMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AtomMode::Backbone => "backbone",
            AtomMode::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomRecord {
    pub serial: i64,
    pub name: String,
    pub residue_seq: i64,
    pub position: Point,
    pub alt_loc: char,
}

fn column(line: &str, lineno: usize, from: usize, to: usize, field: &str) -> Result<String> {
    line.get(from - 1..to)
        .map(|s| s.trim().to_string())
        .ok_or_else(|| {
            Error::parse(
                lineno,
                format!("missing {field} field (columns {from}-{to})"),
            )
        })
}

fn coordinate(line: &str, lineno: usize, from: usize, to: usize, axis: &str) -> Result<f64> {
    let raw = column(line, lineno, from, to, axis)?;
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(
            lineno,
            format!("malformed {axis} coordinate {raw:?}"),
        )),
    }
}

/// Reads the ATOM records of the first model that pass the `mode` filter.
///
/// Fixed-column layout, PDB v3.3: name in columns 13-16, altLoc in 17,
/// resSeq in 23-26, x/y/z in 31-38, 39-46, 47-54. Alternate locations other
/// than blank and `A` are skipped, as are HETATM records.
pub fn parse_pdb_records<R: BufRead>(reader: R, mode: AtomMode) -> Result<Vec<AtomRecord>> {
    let mut atoms = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.starts_with("ENDMDL") {
            break;
        }
        if !line.starts_with("ATOM  ") {
            continue;
        }
        let name = column(&line, lineno, 13, 16, "atom name")?;
        let alt_loc = line
            .get(16..17)
            .and_then(|s| s.chars().next())
            .unwrap_or(' ');
        if alt_loc != ' ' && alt_loc != 'A' {
            continue;
        }
        if mode == AtomMode::Backbone && name != "CA" {
            continue;
        }
        let position = [
            coordinate(&line, lineno, 31, 38, "x")?,
            coordinate(&line, lineno, 39, 46, "y")?,
            coordinate(&line, lineno, 47, 54, "z")?,
        ];
        let serial = column(&line, lineno, 7, 11, "serial")?.parse().unwrap_or(0);
        let residue_seq = column(&line, lineno, 23, 26, "residue number")?
            .parse()
            .unwrap_or(0);
        atoms.push(AtomRecord {
            serial,
            name,
            residue_seq,
            position,
            alt_loc,
        });
    }
    if atoms.is_empty() {
        return Err(Error::EmptyStructure);
    }
    Ok(atoms)
}

/// Atom positions of the first model, in file order.
pub fn parse_pdb<R: BufRead>(reader: R, mode: AtomMode) -> Result<Vec<Point>> {
    Ok(parse_pdb_records(reader, mode)?
        .into_iter()
        .map(|a| a.position)
        .collect())
}

/// Parameters of the benchmark instance generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    /// Relative half-width of each interval around the true distance.
    pub epsilon: f64,
    /// Only pairs at most this far apart (Å) are eligible.
    pub cutoff: f64,
    /// Fraction of eligible pairs kept.
    pub keep_fraction: f64,
    pub atom_mode: AtomMode,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.8,
            cutoff: 6.0,
            keep_fraction: 0.3,
            atom_mode: AtomMode::Backbone,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "cutoff must be positive, got {}",
                self.cutoff
            )));
        }
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "keep fraction must lie in (0, 1], got {}",
                self.keep_fraction
            )));
        }
        Ok(())
    }
}

/// `ceil(fraction * count)`, ignoring representation error in the product
/// so that e.g. `0.3 * 100` keeps 30 rather than 31.
pub fn retained_count(fraction: f64, count: usize) -> usize {
    let exact = fraction * count as f64;
    let nearest = exact.round();
    let kept = if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        exact.ceil()
    };
    (kept as usize).clamp(1, count)
}

/// Builds a sparse interval instance around known coordinates.
///
/// Every pair within `cutoff` is eligible; a seeded Fisher-Yates shuffle
/// picks `retained_count(keep_fraction, eligible)` of them, and each kept
/// pair gets bounds `((1 - eps) d, (1 + eps) d)`. The input positions are
/// stored as the instance reference.
pub fn build_instance(
    name: &str,
    positions: &[Point],
    cfg: &GenConfig,
) -> Result<DistanceInstance> {
    cfg.validate()?;
    if positions.len() < 2 {
        return Err(Error::InvalidInstance(format!(
            "need at least 2 positions, got {}",
            positions.len()
        )));
    }
    let mut eligible = Vec::new();
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = distance(&positions[i], &positions[j]);
            if d <= cfg.cutoff {
                eligible.push((i, j, d));
            }
        }
    }
    if eligible.is_empty() {
        return Err(Error::NoEligibleConstraints);
    }
    let keep = retained_count(cfg.keep_fraction, eligible.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    eligible.shuffle(&mut rng);
    eligible.truncate(keep);
    eligible.sort_by_key(|&(i, j, _)| (i, j));

    let lower_scale = 1.0 - cfg.epsilon;
    let upper_scale = 1.0 + cfg.epsilon;
    let constraints = eligible
        .into_iter()
        .map(|(i, j, d)| DistanceConstraint::new(i, j, lower_scale * d, upper_scale * d))
        .collect::<Result<Vec<_>>>()?;
    DistanceInstance::new(name, positions.len(), constraints, Some(positions.to_vec()))
}

struct Real(f64);

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

pub fn write_instance<W: Write>(inst: &DistanceInstance, mut sink: W) -> Result<()> {
    let name = inst.name();
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(Error::InvalidInstance(format!(
            "instance name {name:?} must be non-empty and free of whitespace"
        )));
    }
    writeln!(
        sink,
        "DGP {} {} {}",
        name,
        inst.num_atoms(),
        inst.constraints().len()
    )?;
    for c in inst.constraints() {
        writeln!(sink, "{} {} {} {}", c.i, c.j, Real(c.lower), Real(c.upper))?;
    }
    if let Some(reference) = inst.reference() {
        writeln!(sink, "REF")?;
        for p in reference {
            writeln!(sink, "{} {} {}", Real(p[0]), Real(p[1]), Real(p[2]))?;
        }
    }
    sink.flush()?;
    Ok(())
}

fn field<T: FromStr>(tokens: &[&str], k: usize, lineno: usize, what: &str) -> Result<T> {
    tokens
        .get(k)
        .ok_or_else(|| Error::parse(lineno, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(lineno, format!("malformed {what} {:?}", tokens[k])))
}

fn expect_arity(tokens: &[&str], n: usize, lineno: usize) -> Result<()> {
    if tokens.len() != n {
        return Err(Error::parse(
            lineno,
            format!("expected {n} fields, found {}", tokens.len()),
        ));
    }
    Ok(())
}

pub fn read_instance<R: BufRead>(source: R) -> Result<DistanceInstance> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(k, l)| l.map(|l| (k + 1, l)))
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()));

    let (lineno, header) = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::parse(1, "missing DGP header"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.first() != Some(&"DGP") || tokens.len() != 4 {
        return Err(Error::parse(
            lineno,
            "bad header, expected `DGP <name> <V> <|E|>`",
        ));
    }
    let name = tokens[1].to_string();
    let num_atoms: usize = field(&tokens, 2, lineno, "atom count")?;
    let num_constraints: usize = field(&tokens, 3, lineno, "constraint count")?;

    let mut last = lineno;
    let mut constraints = Vec::with_capacity(num_constraints);
    for _ in 0..num_constraints {
        let (lineno, line) = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse(last + 1, "file ends before all constraints were read"))?;
        last = lineno;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        expect_arity(&tokens, 4, lineno)?;
        let i: usize = field(&tokens, 0, lineno, "atom index")?;
        let j: usize = field(&tokens, 1, lineno, "atom index")?;
        let lower: f64 = field(&tokens, 2, lineno, "lower bound")?;
        let upper: f64 = field(&tokens, 3, lineno, "upper bound")?;
        if i >= num_atoms || j >= num_atoms {
            return Err(Error::parse(
                lineno,
                format!("atom index out of range for V={num_atoms}"),
            ));
        }
        if i >= j {
            return Err(Error::parse(lineno, format!("expected i < j, got {i} {j}")));
        }
        if lower > upper {
            return Err(Error::parse(
                lineno,
                format!("lower {lower} > upper {upper}"),
            ));
        }
        let c = DistanceConstraint::new(i, j, lower, upper)
            .map_err(|e| Error::parse(lineno, e.to_string()))?;
        constraints.push(c);
    }

    let reference = match lines.next().transpose()? {
        None => None,
        Some((lineno, line)) if line.trim() == "REF" => {
            let mut last = lineno;
            let mut positions = Vec::with_capacity(num_atoms);
            for _ in 0..num_atoms {
                let (lineno, line) = lines.next().transpose()?.ok_or_else(|| {
                    Error::parse(
                        last + 1,
                        "file ends before all reference positions were read",
                    )
                })?;
                last = lineno;
                let tokens: Vec<&str> = line.split_whitespace().collect();
                expect_arity(&tokens, 3, lineno)?;
                positions.push([
                    field(&tokens, 0, lineno, "x")?,
                    field(&tokens, 1, lineno, "y")?,
                    field(&tokens, 2, lineno, "z")?,
                ]);
            }
            Some(positions)
        }
        Some((lineno, _)) => {
            return Err(Error::parse(lineno, "unexpected content after constraints"));
        }
    };
    if let Some((lineno, _)) = lines.next().transpose()? {
        return Err(Error::parse(lineno, "unexpected trailing content"));
    }
    DistanceInstance::new(name, num_atoms, constraints, reference)
        .map_err(|e| Error::parse(lineno, e.to_string()))
}
