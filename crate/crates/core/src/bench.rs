//! Experiment harness behind the `mdgp` command line: instance generation,
//! single solver runs and seeded GreMuTRRR vs Basic GA comparisons.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{csv_error, Error, Result};
use crate::evolve::{self, Algorithm, GaConfig, GreedyScope, RunOutcome, RunTrace};
use crate::ingest::{self, GenConfig};
use crate::instance::{lde, DistanceInstance};

/// Largest tolerated gap between the engine's reported LDE and a from-scratch
/// recomputation on the returned conformation.
pub const RECOMPUTE_TOLERANCE: f64 = 1e-9;

/// Parses `pdb_path`, builds a sparse instance and writes it to `out_path`.
/// The instance is named after the file stem.
pub fn generate(pdb_path: &Path, cfg: &GenConfig, out_path: &Path) -> Result<DistanceInstance> {
    let inst = instance_from_pdb(pdb_path, cfg)?;
    let mut sink = BufWriter::new(File::create(out_path)?);
    ingest::write_instance(&inst, &mut sink)?;
    sink.flush()?;
    Ok(inst)
}

pub fn instance_from_pdb(pdb_path: &Path, cfg: &GenConfig) -> Result<DistanceInstance> {
    let reader = BufReader::new(File::open(pdb_path)?);
    let positions = ingest::parse_pdb(reader, cfg.atom_mode)?;
    let name = pdb_path
        .file_stem()
        .and_then(|s| s.to_str())
        .map(|s| s.split_whitespace().collect::<Vec<_>>().join("_"))
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "instance".to_string());
    ingest::build_instance(&name, &positions, cfg)
}

/// Reads a `.dgp` file, returning the instance and the SHA-256 of its bytes.
pub fn load_instance(path: &Path) -> Result<(DistanceInstance, String)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let inst = ingest::read_instance(&bytes[..])?;
    Ok((inst, digest))
}

/// Optional per-field replacements applied on top of an algorithm preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub population_size: Option<usize>,
    pub max_generations: Option<usize>,
    pub greedy_mutation_rate: Option<f64>,
    pub random_mutation_rate: Option<f64>,
    pub greedy_trials: Option<usize>,
    pub greedy_scope: Option<GreedyScope>,
    pub tournament_size: Option<usize>,
    pub uniform_rate: Option<f64>,
    pub sigma: Option<f64>,
    pub similarity_threshold: Option<f64>,
    pub twin_removal_interval: Option<usize>,
    pub restart_window: Option<usize>,
    pub restart_threshold: Option<f64>,
    pub restart_fraction: Option<f64>,
    pub stagnation_limit: Option<usize>,
}

impl ConfigOverrides {
    /// Preset for `algorithm`, then overrides, then `seed`.
    pub fn config_for(&self, algorithm: Algorithm, seed: u64) -> GaConfig {
        let mut cfg = GaConfig::preset(algorithm);
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        apply!(
            population_size,
            max_generations,
            greedy_mutation_rate,
            random_mutation_rate,
            greedy_trials,
            greedy_scope,
            tournament_size,
            uniform_rate,
            sigma,
            similarity_threshold,
            twin_removal_interval,
            restart_window,
            restart_threshold,
            restart_fraction
        );
        if self.stagnation_limit.is_some() {
            cfg.stagnation_limit = self.stagnation_limit;
        }
        cfg.seed = seed;
        cfg
    }
}

/// Summary of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub protein: String,
    pub num_atoms: usize,
    pub algorithm: String,
    pub seed: u64,
    pub final_lde: f64,
    pub generations: usize,
    pub wall_time_s: f64,
}

impl ResultRow {
    pub fn write_csv<W: Write>(rows: &[ResultRow], sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        for r in rows {
            w.serialize(r).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Vec<ResultRow>> {
        csv::Reader::from_reader(source)
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_error)
    }
}

/// Runs the engine once and cross-checks the reported LDE.
pub fn solve(
    inst: &DistanceInstance,
    algorithm: Algorithm,
    cfg: &GaConfig,
) -> Result<(ResultRow, RunOutcome)> {
    let start = Instant::now();
    let outcome = evolve::run(inst, cfg)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let recomputed = lde(&outcome.best, inst)?;
    let traced = outcome.trace.final_lde().unwrap_or(outcome.best_lde);
    if (recomputed - outcome.best_lde).abs() > RECOMPUTE_TOLERANCE
        || (recomputed - traced).abs() > RECOMPUTE_TOLERANCE
    {
        return Err(Error::InvalidInstance(format!(
            "engine reported LDE {} (trace {traced}) but recomputation gives {recomputed}",
            outcome.best_lde
        )));
    }
    let row = ResultRow {
        protein: inst.name().to_string(),
        num_atoms: inst.num_atoms(),
        algorithm: algorithm.to_string(),
        seed: cfg.seed,
        final_lde: recomputed,
        generations: outcome.generations,
        wall_time_s,
    };
    Ok((row, outcome))
}

/// Writes `trace.csv`, `result.csv` and `best.csv` (one `x,y,z` row per atom)
/// into `out_dir`.
pub fn write_solve_outputs(out_dir: &Path, row: &ResultRow, outcome: &RunOutcome) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    write_trace(&out_dir.join("trace.csv"), &outcome.trace)?;
    ResultRow::write_csv(
        std::slice::from_ref(row),
        File::create(out_dir.join("result.csv"))?,
    )?;
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out_dir.join("best.csv"))?));
    w.write_record(["atom", "x", "y", "z"]).map_err(csv_error)?;
    for (k, p) in outcome.best.positions().enumerate() {
        w.write_record([
            k.to_string(),
            p[0].to_string(),
            p[1].to_string(),
            p[2].to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: &Path, trace: &RunTrace) -> Result<()> {
    let mut sink = BufWriter::new(File::create(path)?);
    trace.write_csv(&mut sink)?;
    sink.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<RunTrace> {
    RunTrace::read_csv(BufReader::new(File::open(path)?))
}

/// A seeded comparison on one instance file.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub instance_path: PathBuf,
    pub algorithms: Vec<Algorithm>,
    pub overrides: ConfigOverrides,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
}

/// Seed column value of per-algorithm summary rows.
pub const SUMMARY_SEED: &str = "median";

/// One line of `compare.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub protein: String,
    pub num_atoms: usize,
    pub algorithm: String,
    /// Seed, or `median` on summary rows.
    pub seed: String,
    pub final_lde: Option<f64>,
    pub generations: Option<usize>,
    pub wall_time_s: Option<f64>,
    pub instance_sha256: String,
    /// `ok`, or `error: <message>` when the run failed.
    pub status: String,
}

impl CompareRow {
    pub fn is_summary(&self) -> bool {
        self.seed == SUMMARY_SEED
    }

    pub fn write_csv<W: Write>(rows: &[CompareRow], sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        for r in rows {
            w.serialize(r).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Vec<CompareRow>> {
        csv::Reader::from_reader(source)
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_error)
    }
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    /// Traces of successful runs, keyed like the rows.
    pub traces: Vec<(Algorithm, u64, RunTrace)>,
}

impl CompareReport {
    pub fn median(&self, algorithm: Algorithm) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.is_summary() && r.algorithm == algorithm.as_str())
            .and_then(|r| r.final_lde)
    }

    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| !r.is_summary() && r.status != "ok")
            .count()
    }

    pub fn runs(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_summary()).count()
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Path of the trace written for one (algorithm, seed) cell.
pub fn cell_trace_path(out_dir: &Path, algorithm: Algorithm, seed: u64) -> PathBuf {
    out_dir
        .join("traces")
        .join(format!("{algorithm}_seed{seed}.csv"))
}

/// Runs every (algorithm, seed) cell on the same instance file, in parallel,
/// and writes `compare.csv` plus one trace per cell under `traces/`.
///
/// Failed cells are reported in the `status` column; the call only fails
/// outright when the instance cannot be loaded or every cell failed.
pub fn compare(spec: &ExperimentSpec) -> Result<CompareReport> {
    if spec.seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one seed is required".into()));
    }
    if spec.algorithms.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one algorithm is required".into(),
        ));
    }
    let (inst, digest) = load_instance(&spec.instance_path)?;
    fs::create_dir_all(spec.out_dir.join("traces"))?;

    let cells: Vec<(Algorithm, u64)> = spec
        .algorithms
        .iter()
        .flat_map(|&a| spec.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let results: Vec<Result<(ResultRow, RunOutcome)>> = cells
        .par_iter()
        .map(|&(algorithm, seed)| {
            let cfg = spec.overrides.config_for(algorithm, seed);
            let (row, outcome) = solve(&inst, algorithm, &cfg)?;
            write_trace(
                &cell_trace_path(&spec.out_dir, algorithm, seed),
                &outcome.trace,
            )?;
            Ok((row, outcome))
        })
        .collect();

    let mut rows = Vec::with_capacity(cells.len() + spec.algorithms.len());
    let mut traces = Vec::new();
    for (&(algorithm, seed), result) in cells.iter().zip(results) {
        let row = match result {
            Ok((row, outcome)) => {
                traces.push((algorithm, seed, outcome.trace));
                CompareRow {
                    protein: row.protein,
                    num_atoms: row.num_atoms,
                    algorithm: row.algorithm,
                    seed: seed.to_string(),
                    final_lde: Some(row.final_lde),
                    generations: Some(row.generations),
                    wall_time_s: Some(row.wall_time_s),
                    instance_sha256: digest.clone(),
                    status: "ok".into(),
                }
            }
            Err(e) => CompareRow {
                protein: inst.name().to_string(),
                num_atoms: inst.num_atoms(),
                algorithm: algorithm.to_string(),
                seed: seed.to_string(),
                final_lde: None,
                generations: None,
                wall_time_s: None,
                instance_sha256: digest.clone(),
                status: format!("error: {e}"),
            },
        };
        rows.push(row);
    }
    for &algorithm in &spec.algorithms {
        let ok: Vec<&CompareRow> = rows
            .iter()
            .filter(|r| r.algorithm == algorithm.as_str() && r.status == "ok")
            .collect();
        let lde: Vec<f64> = ok.iter().filter_map(|r| r.final_lde).collect();
        let gens: Vec<f64> = ok
            .iter()
            .filter_map(|r| r.generations.map(|g| g as f64))
            .collect();
        let time: Vec<f64> = ok.iter().filter_map(|r| r.wall_time_s).collect();
        rows.push(CompareRow {
            protein: inst.name().to_string(),
            num_atoms: inst.num_atoms(),
            algorithm: algorithm.to_string(),
            seed: SUMMARY_SEED.into(),
            final_lde: median(&lde),
            generations: median(&gens).map(|g| g.round() as usize),
            wall_time_s: median(&time),
            instance_sha256: digest.clone(),
            status: if ok.is_empty() {
                "error: all runs failed".into()
            } else {
                "ok".into()
            },
        });
    }

    let mut sink = BufWriter::new(File::create(spec.out_dir.join("compare.csv"))?);
    CompareRow::write_csv(&rows, &mut sink)?;
    sink.flush()?;

    let report = CompareReport { rows, traces };
    if report.failures() == report.runs() {
        return Err(Error::InvalidConfig(format!(
            "all {} runs failed; see {}",
            report.runs(),
            spec.out_dir.join("compare.csv").display()
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_values() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0]), Some(3.0));
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn overrides_apply_after_preset() {
        let o = ConfigOverrides {
            population_size: Some(10),
            greedy_mutation_rate: Some(0.3),
            stagnation_limit: Some(4),
            ..Default::default()
        };
        let basic = o.config_for(Algorithm::Basic, 9);
        assert_eq!(basic.population_size, 10);
        assert_eq!(basic.greedy_mutation_rate, 0.3);
        assert!(!basic.twin_removal);
        assert_eq!(basic.seed, 9);
        assert_eq!(basic.stagnation_limit, Some(4));
        let plain = ConfigOverrides::default().config_for(Algorithm::Basic, 0);
        assert_eq!(plain, GaConfig::basic());
    }

    #[test]
    fn compare_rows_round_trip() {
        let rows = vec![
            CompareRow {
                protein: "p".into(),
                num_atoms: 4,
                algorithm: "basic".into(),
                seed: "1".into(),
                final_lde: Some(0.25),
                generations: Some(3),
                wall_time_s: Some(0.5),
                instance_sha256: "ab".into(),
                status: "ok".into(),
            },
            CompareRow {
                protein: "p".into(),
                num_atoms: 4,
                algorithm: "basic".into(),
                seed: SUMMARY_SEED.into(),
                final_lde: None,
                generations: None,
                wall_time_s: None,
                instance_sha256: "ab".into(),
                status: "error: x, y".into(),
            },
        ];
        let mut buf = Vec::new();
        CompareRow::write_csv(&rows, &mut buf).unwrap();
        assert_eq!(CompareRow::read_csv(&buf[..]).unwrap(), rows);
    }
}
