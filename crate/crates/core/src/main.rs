use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mdgp::bench::{self, ConfigOverrides, ExperimentSpec, ResultRow};
use mdgp::evolve::{Algorithm, GreedyScope};
use mdgp::ingest::{AtomMode, GenConfig};

#[derive(Parser)]
#[command(
    name = "mdgp",
    version,
    about = "Sparse interval distance geometry by genetic search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a .dgp instance from a PDB coordinate file.
    Generate {
        #[arg(long)]
        pdb: PathBuf,
        #[arg(long, default_value = "backbone", value_parser = parse_atoms)]
        atoms: AtomMode,
        #[arg(long, default_value_t = 0.8)]
        epsilon: f64,
        #[arg(long, default_value_t = 6.0)]
        cutoff: f64,
        #[arg(long, default_value_t = 0.3)]
        keep: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one solver on an instance; writes trace.csv, result.csv and best.csv.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "gremutrrr", value_parser = parse_algorithm)]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        ga: GaFlags,
    },
    /// Run GreMuTRRR and Basic GA over several seeds; writes compare.csv.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        ga: GaFlags,
    },
}

/// Overrides applied on top of the algorithm preset.
#[derive(Args)]
struct GaFlags {
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    greedy_rate: Option<f64>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    greedy_trials: Option<usize>,
    #[arg(long, value_parser = parse_scope)]
    greedy_scope: Option<GreedyScope>,
    #[arg(long)]
    tournament: Option<usize>,
    #[arg(long)]
    uniform_rate: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    similarity_threshold: Option<f64>,
    #[arg(long)]
    twin_interval: Option<usize>,
    #[arg(long)]
    restart_window: Option<usize>,
    #[arg(long)]
    restart_threshold: Option<f64>,
    #[arg(long)]
    restart_fraction: Option<f64>,
    /// Stop after this many generations without improvement.
    #[arg(long)]
    stagnation: Option<usize>,
}

impl From<GaFlags> for ConfigOverrides {
    fn from(f: GaFlags) -> Self {
        ConfigOverrides {
            population_size: f.pop,
            max_generations: f.generations,
            greedy_mutation_rate: f.greedy_rate,
            random_mutation_rate: f.mutation_rate,
            greedy_trials: f.greedy_trials,
            greedy_scope: f.greedy_scope,
            tournament_size: f.tournament,
            uniform_rate: f.uniform_rate,
            sigma: f.sigma,
            similarity_threshold: f.similarity_threshold,
            twin_removal_interval: f.twin_interval,
            restart_window: f.restart_window,
            restart_threshold: f.restart_threshold,
            restart_fraction: f.restart_fraction,
            stagnation_limit: f.stagnation,
        }
    }
}

fn parse_atoms(s: &str) -> Result<AtomMode, String> {
    s.parse().map_err(|e: mdgp::Error| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: mdgp::Error| e.to_string())
}

fn parse_scope(s: &str) -> Result<GreedyScope, String> {
    s.parse().map_err(|e: mdgp::Error| e.to_string())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            pdb,
            atoms,
            epsilon,
            cutoff,
            keep,
            seed,
            out,
        } => {
            let cfg = GenConfig {
                epsilon,
                cutoff,
                keep_fraction: keep,
                atom_mode: atoms,
                seed,
            };
            let inst = bench::generate(&pdb, &cfg, &out)
                .with_context(|| format!("generating instance from {}", pdb.display()))?;
            let components = inst.connected_components();
            if components > 1 {
                eprintln!(
                    "warning: constraint graph has {components} connected components; \
                     the embedding is underdetermined"
                );
            }
            println!("V={} E={}", inst.num_atoms(), inst.constraints().len());
        }
        Command::Solve {
            instance,
            algorithm,
            seed,
            out,
            ga,
        } => {
            let (inst, _) = bench::load_instance(&instance)
                .with_context(|| format!("reading {}", instance.display()))?;
            let cfg = ConfigOverrides::from(ga).config_for(algorithm, seed);
            let (row, outcome) = bench::solve(&inst, algorithm, &cfg)?;
            bench::write_solve_outputs(&out, &row, &outcome)?;
            ResultRow::write_csv(std::slice::from_ref(&row), std::io::stdout().lock())?;
        }
        Command::Compare {
            instance,
            seeds,
            out,
            ga,
        } => {
            let spec = ExperimentSpec {
                instance_path: instance,
                algorithms: Algorithm::ALL.to_vec(),
                overrides: ga.into(),
                seeds,
                out_dir: out,
            };
            let report = bench::compare(&spec)?;
            for row in report.rows.iter().filter(|r| r.status != "ok") {
                eprintln!("{} seed {}: {}", row.algorithm, row.seed, row.status);
            }
            for algorithm in Algorithm::ALL {
                match report.median(algorithm) {
                    Some(m) => println!("{algorithm}: median final LDE {m}"),
                    None => bail!("{algorithm}: every run failed"),
                }
            }
        }
    }
    Ok(())
}
