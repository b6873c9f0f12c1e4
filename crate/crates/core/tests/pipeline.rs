use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use mdgp::bench::{self, ConfigOverrides, ExperimentSpec};
use mdgp::evolve::Algorithm;
use mdgp::ingest::{self, AtomMode, GenConfig};
use mdgp::{lde, Conformation, GaConfig};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/chain30.pdb")
}

fn fixture_positions(mode: AtomMode) -> Vec<[f64; 3]> {
    ingest::parse_pdb(BufReader::new(File::open(fixture()).unwrap()), mode).unwrap()
}

#[test]
fn fixture_parses_first_model_only() {
    assert_eq!(fixture_positions(AtomMode::Backbone).len(), 30);
    assert_eq!(fixture_positions(AtomMode::All).len(), 120);
}

#[test]
fn generated_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = GenConfig {
        seed: 3,
        ..Default::default()
    };
    let a = dir.path().join("a.dgp");
    let b = dir.path().join("b.dgp");
    let ia = bench::generate(&fixture(), &cfg, &a).unwrap();
    bench::generate(&fixture(), &cfg, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let (back, hash_a) = bench::load_instance(&a).unwrap();
    let (_, hash_b) = bench::load_instance(&b).unwrap();
    assert_eq!(hash_a, hash_b);
    assert_eq!(hash_a.len(), 64);
    assert_eq!(back.constraints(), ia.constraints());
    assert_eq!(back.name(), "chain30");

    let other = GenConfig {
        seed: 4,
        ..Default::default()
    };
    let c = dir.path().join("c.dgp");
    bench::generate(&fixture(), &other, &c).unwrap();
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn reference_scores_zero_for_every_setting() {
    for mode in [AtomMode::Backbone, AtomMode::All] {
        for epsilon in [0.0, 0.1, 0.8] {
            for keep in [0.3, 1.0] {
                let cfg = GenConfig {
                    epsilon,
                    keep_fraction: keep,
                    atom_mode: mode,
                    ..Default::default()
                };
                let inst = bench::instance_from_pdb(&fixture(), &cfg).unwrap();
                let reference = Conformation::from_positions(inst.reference().unwrap()).unwrap();
                assert_eq!(lde(&reference, &inst).unwrap(), 0.0);
            }
        }
    }
}

#[test]
fn full_sample_keeps_every_close_pair() {
    let positions = fixture_positions(AtomMode::Backbone);
    let cfg = GenConfig {
        keep_fraction: 1.0,
        epsilon: 0.0,
        ..Default::default()
    };
    let inst = ingest::build_instance("x", &positions, &cfg).unwrap();
    let mut expected = 0;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d: f64 = (0..3)
                .map(|k| (positions[i][k] - positions[j][k]).powi(2))
                .sum::<f64>()
                .sqrt();
            if d <= cfg.cutoff {
                expected += 1;
            }
        }
    }
    assert_eq!(inst.constraints().len(), expected);
    assert!(inst.constraints().iter().all(|c| c.lower == c.upper));
}

#[test]
fn solve_writes_consistent_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("i.dgp");
    let inst = bench::generate(&fixture(), &GenConfig::default(), &path).unwrap();
    let overrides = ConfigOverrides {
        population_size: Some(12),
        max_generations: Some(30),
        ..Default::default()
    };
    for alg in Algorithm::ALL {
        let cfg = overrides.config_for(alg, 5);
        let (row, outcome) = bench::solve(&inst, alg, &cfg).unwrap();
        assert_eq!(row.algorithm, alg.as_str());
        assert_eq!(row.generations, 30);
        assert_eq!(outcome.trace.rows.len(), 31);
        assert!(outcome.trace.is_monotone());
        assert_eq!(row.final_lde, outcome.trace.final_lde().unwrap());

        let out = dir.path().join(alg.as_str());
        bench::write_solve_outputs(&out, &row, &outcome).unwrap();
        let trace = bench::read_trace(&out.join("trace.csv")).unwrap();
        assert_eq!(trace, outcome.trace);
        let rows = bench::ResultRow::read_csv(File::open(out.join("result.csv")).unwrap()).unwrap();
        assert_eq!(rows, vec![row]);
        assert!(out.join("best.csv").exists());
        if alg == Algorithm::Basic {
            assert_eq!(trace.count_events(), (0, 0));
        }
    }
}

#[test]
fn zero_generation_budget_reports_initial_population() {
    let inst = bench::instance_from_pdb(&fixture(), &GenConfig::default()).unwrap();
    let cfg = GaConfig {
        max_generations: 0,
        population_size: 8,
        ..GaConfig::gremutrrr()
    };
    let (row, outcome) = bench::solve(&inst, Algorithm::GreMuTRRR, &cfg).unwrap();
    assert_eq!(row.generations, 0);
    assert_eq!(outcome.trace.rows.len(), 1);
    assert_eq!(outcome.trace.rows[0].best_lde, outcome.best_lde);
}

#[test]
fn compare_shares_one_instance_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("i.dgp");
    bench::generate(&fixture(), &GenConfig::default(), &path).unwrap();
    let spec = ExperimentSpec {
        instance_path: path,
        algorithms: Algorithm::ALL.to_vec(),
        overrides: ConfigOverrides {
            population_size: Some(10),
            max_generations: Some(20),
            ..Default::default()
        },
        seeds: vec![1, 2, 3],
        out_dir: dir.path().join("cmp"),
    };
    let report = bench::compare(&spec).unwrap();
    assert_eq!(report.runs(), 6);
    assert_eq!(report.failures(), 0);
    assert_eq!(report.rows.len(), 8);
    let hash = &report.rows[0].instance_sha256;
    assert!(report.rows.iter().all(|r| &r.instance_sha256 == hash));

    let back =
        bench::CompareRow::read_csv(File::open(spec.out_dir.join("compare.csv")).unwrap()).unwrap();
    assert_eq!(back, report.rows);

    for alg in Algorithm::ALL {
        let finals: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| !r.is_summary() && r.algorithm == alg.as_str())
            .map(|r| r.final_lde.unwrap())
            .collect();
        assert_eq!(report.median(alg), bench::median(&finals));
        for seed in 1..=3 {
            let trace =
                bench::read_trace(&bench::cell_trace_path(&spec.out_dir, alg, seed)).unwrap();
            assert!(trace.is_monotone());
        }
    }
}

#[test]
fn compare_rejects_empty_seed_list() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        instance_path: dir.path().join("missing.dgp"),
        algorithms: Algorithm::ALL.to_vec(),
        overrides: ConfigOverrides::default(),
        seeds: vec![],
        out_dir: dir.path().to_path_buf(),
    };
    assert!(bench::compare(&spec).is_err());
}

// Synthetic 30-residue chain: a sanity check that the full method beats the
// baseline on a small backbone problem, not a reproduction of any benchmark.
#[test]
fn gremutrrr_beats_basic_on_synthetic_chain() {
    let inst = bench::instance_from_pdb(&fixture(), &GenConfig::default()).unwrap();
    let overrides = ConfigOverrides {
        max_generations: Some(300),
        ..Default::default()
    };
    let mut medians = Vec::new();
    for alg in [Algorithm::GreMuTRRR, Algorithm::Basic] {
        let finals: Vec<f64> = (0..3)
            .map(|seed| {
                bench::solve(&inst, alg, &overrides.config_for(alg, seed))
                    .unwrap()
                    .0
                    .final_lde
            })
            .collect();
        medians.push(bench::median(&finals).unwrap());
    }
    assert!(medians[0] < medians[1], "{medians:?}");
}
