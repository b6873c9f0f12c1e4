//! C ABI over the `mdgp` solver.
//!
//! Instances and run results are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an [`MdgpStatus`]; on failure a description is available from
//! [`mdgp_last_error`] on the same thread.
//!
//! The header `include/mdgp.h` is generated from this file by the build
//! script.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use mdgp::evolve::{self, GreedyScope, RunOutcome};
use mdgp::ingest::{self, AtomMode, GenConfig};
use mdgp::{Conformation, DistanceInstance, Error, GaConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdgpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    InvalidInstance = 5,
    InvalidConfig = 6,
    DimensionMismatch = 7,
    EmptyStructure = 8,
    NoEligibleConstraints = 9,
    OutOfRange = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdgpAlgorithm {
    Gremutrrr = 0,
    Basic = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdgpAtomMode {
    Backbone = 0,
    All = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdgpGreedyScope {
    AllGenes = 0,
    SingleGene = 1,
}

/// Instance generator settings. Obtain defaults from
/// [`mdgp_gen_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdgpGenConfig {
    pub epsilon: f64,
    pub cutoff: f64,
    pub keep_fraction: f64,
    pub atom_mode: MdgpAtomMode,
    pub seed: u64,
}

/// Engine settings. Obtain a preset from [`mdgp_ga_config_preset`] and
/// adjust fields as needed. `stagnation_limit == 0` disables early stopping.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdgpGaConfig {
    pub population_size: u32,
    pub max_generations: u32,
    pub greedy_mutation_rate: f64,
    pub random_mutation_rate: f64,
    pub greedy_trials: u32,
    pub greedy_scope: MdgpGreedyScope,
    pub tournament_size: u32,
    pub uniform_rate: f64,
    pub sigma: f64,
    pub similarity_threshold: f64,
    pub twin_removal: bool,
    pub twin_removal_interval: u32,
    pub random_restart: bool,
    pub restart_window: u32,
    pub restart_threshold: f64,
    pub restart_fraction: f64,
    pub stagnation_limit: u32,
    pub seed: u64,
}

/// One generation of a run trace. `twin_removal` and `restart` are 1 when
/// the event fired in that generation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdgpTraceRow {
    pub generation: u64,
    pub best_lde: f64,
    pub global_best_lde: f64,
    pub twin_removal: bool,
    pub restart: bool,
}

/// Opaque instance handle.
pub struct MdgpInstance(DistanceInstance);

/// Opaque run result handle.
pub struct MdgpRun(RunOutcome);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(message).ok());
}

fn fail(status: MdgpStatus, message: impl Into<String>) -> MdgpStatus {
    set_last_error(message);
    status
}

fn status_of(e: &Error) -> MdgpStatus {
    match e {
        Error::DimensionMismatch { .. } => MdgpStatus::DimensionMismatch,
        Error::AtomOutOfRange { .. } => MdgpStatus::OutOfRange,
        Error::InvalidInstance(_) => MdgpStatus::InvalidInstance,
        Error::InvalidConfig(_) => MdgpStatus::InvalidConfig,
        Error::Parse { .. } => MdgpStatus::Parse,
        Error::EmptyStructure => MdgpStatus::EmptyStructure,
        Error::NoEligibleConstraints => MdgpStatus::NoEligibleConstraints,
        Error::Io(_) => MdgpStatus::Io,
    }
}

/// Runs `f`, mapping library errors and panics onto status codes.
fn guard(f: impl FnOnce() -> Result<(), MdgpStatus>) -> MdgpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            MdgpStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(MdgpStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn lib_err(e: Error) -> MdgpStatus {
    fail(status_of(&e), e.to_string())
}

unsafe fn path_arg(path: *const c_char) -> Result<PathBuf, MdgpStatus> {
    if path.is_null() {
        return Err(fail(MdgpStatus::NullPointer, "path is null"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| fail(MdgpStatus::InvalidArgument, "path is not valid UTF-8"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, MdgpStatus> {
    p.as_ref()
        .ok_or_else(|| fail(MdgpStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, MdgpStatus> {
    p.as_mut()
        .ok_or_else(|| fail(MdgpStatus::NullPointer, format!("{what} is null")))
}

/// Description of the last failure on this thread, or NULL after a
/// successful call. The pointer stays valid until the next call into this
/// library from the same thread.
#[no_mangle]
pub extern "C" fn mdgp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn mdgp_gen_config_default() -> MdgpGenConfig {
    let d = GenConfig::default();
    MdgpGenConfig {
        epsilon: d.epsilon,
        cutoff: d.cutoff,
        keep_fraction: d.keep_fraction,
        atom_mode: MdgpAtomMode::Backbone,
        seed: d.seed,
    }
}

#[no_mangle]
pub extern "C" fn mdgp_ga_config_preset(algorithm: MdgpAlgorithm) -> MdgpGaConfig {
    let c = match algorithm {
        MdgpAlgorithm::Gremutrrr => GaConfig::gremutrrr(),
        MdgpAlgorithm::Basic => GaConfig::basic(),
    };
    MdgpGaConfig {
        population_size: c.population_size as u32,
        max_generations: c.max_generations as u32,
        greedy_mutation_rate: c.greedy_mutation_rate,
        random_mutation_rate: c.random_mutation_rate,
        greedy_trials: c.greedy_trials as u32,
        greedy_scope: match c.greedy_scope {
            GreedyScope::AllGenes => MdgpGreedyScope::AllGenes,
            GreedyScope::SingleGene => MdgpGreedyScope::SingleGene,
        },
        tournament_size: c.tournament_size as u32,
        uniform_rate: c.uniform_rate,
        sigma: c.sigma,
        similarity_threshold: c.similarity_threshold,
        twin_removal: c.twin_removal,
        twin_removal_interval: c.twin_removal_interval as u32,
        random_restart: c.random_restart,
        restart_window: c.restart_window as u32,
        restart_threshold: c.restart_threshold,
        restart_fraction: c.restart_fraction,
        stagnation_limit: c.stagnation_limit.unwrap_or(0) as u32,
        seed: c.seed,
    }
}

impl From<&MdgpGaConfig> for GaConfig {
    fn from(c: &MdgpGaConfig) -> Self {
        GaConfig {
            population_size: c.population_size as usize,
            max_generations: c.max_generations as usize,
            greedy_mutation_rate: c.greedy_mutation_rate,
            random_mutation_rate: c.random_mutation_rate,
            greedy_trials: c.greedy_trials as usize,
            greedy_scope: match c.greedy_scope {
                MdgpGreedyScope::AllGenes => GreedyScope::AllGenes,
                MdgpGreedyScope::SingleGene => GreedyScope::SingleGene,
            },
            tournament_size: c.tournament_size as usize,
            uniform_rate: c.uniform_rate,
            sigma: c.sigma,
            similarity_threshold: c.similarity_threshold,
            twin_removal: c.twin_removal,
            twin_removal_interval: c.twin_removal_interval as usize,
            random_restart: c.random_restart,
            restart_window: c.restart_window as usize,
            restart_threshold: c.restart_threshold,
            restart_fraction: c.restart_fraction,
            stagnation_limit: (c.stagnation_limit > 0).then_some(c.stagnation_limit as usize),
            seed: c.seed,
        }
    }
}

/// Reads a `.dgp` instance file.
#[no_mangle]
pub unsafe extern "C" fn mdgp_instance_read(
    path: *const c_char,
    out: *mut *mut MdgpInstance,
) -> MdgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let path = path_arg(path)?;
        let file = File::open(&path).map_err(|e| lib_err(e.into()))?;
        let inst = ingest::read_instance(BufReader::new(file)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MdgpInstance(inst)));
        Ok(())
    })
}

/// Builds an instance from a PDB coordinate file.
#[no_mangle]
pub unsafe extern "C" fn mdgp_instance_from_pdb(
    path: *const c_char,
    cfg: *const MdgpGenConfig,
    out: *mut *mut MdgpInstance,
) -> MdgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let path = path_arg(path)?;
        let c = deref(cfg, "cfg")?;
        let cfg = GenConfig {
            epsilon: c.epsilon,
            cutoff: c.cutoff,
            keep_fraction: c.keep_fraction,
            atom_mode: match c.atom_mode {
                MdgpAtomMode::Backbone => AtomMode::Backbone,
                MdgpAtomMode::All => AtomMode::All,
            },
            seed: c.seed,
        };
        let inst = mdgp::bench::instance_from_pdb(&path, &cfg).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MdgpInstance(inst)));
        Ok(())
    })
}

/// Writes an instance in `.dgp` format.
#[no_mangle]
pub unsafe extern "C" fn mdgp_instance_write(
    inst: *const MdgpInstance,
    path: *const c_char,
) -> MdgpStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let path = path_arg(path)?;
        let file = File::create(&path).map_err(|e| lib_err(e.into()))?;
        let mut sink = BufWriter::new(file);
        ingest::write_instance(&inst.0, &mut sink).map_err(lib_err)?;
        sink.flush().map_err(|e| lib_err(e.into()))?;
        Ok(())
    })
}

/// Atom count, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn mdgp_instance_num_atoms(inst: *const MdgpInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.num_atoms())
}

/// Constraint count, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn mdgp_instance_num_constraints(inst: *const MdgpInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.constraints().len())
}

/// Copies constraint `k` into the output arguments.
#[no_mangle]
pub unsafe extern "C" fn mdgp_instance_constraint(
    inst: *const MdgpInstance,
    k: usize,
    i: *mut usize,
    j: *mut usize,
    lower: *mut f64,
    upper: *mut f64,
) -> MdgpStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let c = inst.0.constraints().get(k).ok_or_else(|| {
            fail(
                MdgpStatus::OutOfRange,
                format!(
                    "constraint {k} out of range for {}",
                    inst.0.constraints().len()
                ),
            )
        })?;
        *out_ptr(i, "i")? = c.i;
        *out_ptr(j, "j")? = c.j;
        *out_ptr(lower, "lower")? = c.lower;
        *out_ptr(upper, "upper")? = c.upper;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mdgp_instance_free(inst: *mut MdgpInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Evaluates the LDE of `genes` (`3 * num_atoms` values, x/y/z per atom).
#[no_mangle]
pub unsafe extern "C" fn mdgp_lde(
    inst: *const MdgpInstance,
    genes: *const f64,
    len: usize,
    out: *mut f64,
) -> MdgpStatus {
    guard(|| {
        let inst = deref(inst, "inst")?;
        let out = out_ptr(out, "out")?;
        if genes.is_null() {
            return Err(fail(MdgpStatus::NullPointer, "genes is null"));
        }
        let genes = std::slice::from_raw_parts(genes, len).to_vec();
        let conf = Conformation::from_genes(genes).map_err(|_| {
            fail(
                MdgpStatus::DimensionMismatch,
                format!(
                    "gene count {len} does not match {} atoms",
                    inst.0.num_atoms()
                ),
            )
        })?;
        *out = mdgp::lde(&conf, &inst.0).map_err(lib_err)?;
        Ok(())
    })
}

/// Runs the engine. The result handle must be released with
/// [`mdgp_run_free`].
#[no_mangle]
pub unsafe extern "C" fn mdgp_run(
    inst: *const MdgpInstance,
    cfg: *const MdgpGaConfig,
    out: *mut *mut MdgpRun,
) -> MdgpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let inst = deref(inst, "inst")?;
        let cfg = GaConfig::from(deref(cfg, "cfg")?);
        let outcome = evolve::run(&inst.0, &cfg).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MdgpRun(outcome)));
        Ok(())
    })
}

/// Final global-best LDE, or NaN for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn mdgp_run_best_lde(run: *const MdgpRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| r.0.best_lde)
}

#[no_mangle]
pub unsafe extern "C" fn mdgp_run_generations(run: *const MdgpRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.generations)
}

/// Copies the best conformation into `buf`, which must hold exactly
/// `3 * num_atoms` doubles.
#[no_mangle]
pub unsafe extern "C" fn mdgp_run_best_genes(
    run: *const MdgpRun,
    buf: *mut f64,
    len: usize,
) -> MdgpStatus {
    guard(|| {
        let run = deref(run, "run")?;
        if buf.is_null() {
            return Err(fail(MdgpStatus::NullPointer, "buf is null"));
        }
        let genes = run.0.best.genes();
        if len != genes.len() {
            return Err(fail(
                MdgpStatus::DimensionMismatch,
                format!(
                    "buffer holds {len} values, conformation has {}",
                    genes.len()
                ),
            ));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(genes);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mdgp_run_trace_len(run: *const MdgpRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.trace.rows.len())
}

#[no_mangle]
pub unsafe extern "C" fn mdgp_run_trace_row(
    run: *const MdgpRun,
    index: usize,
    out: *mut MdgpTraceRow,
) -> MdgpStatus {
    guard(|| {
        let run = deref(run, "run")?;
        let out = out_ptr(out, "out")?;
        let row = run.0.trace.rows.get(index).ok_or_else(|| {
            fail(
                MdgpStatus::OutOfRange,
                format!(
                    "trace row {index} out of range for {}",
                    run.0.trace.rows.len()
                ),
            )
        })?;
        *out = MdgpTraceRow {
            generation: row.generation as u64,
            best_lde: row.best_lde,
            global_best_lde: row.global_best_lde,
            twin_removal: row.events.twin_removal,
            restart: row.events.restart,
        };
        Ok(())
    })
}

/// Writes the trace as `trace.csv`-formatted text to `path`.
#[no_mangle]
pub unsafe extern "C" fn mdgp_run_write_trace(
    run: *const MdgpRun,
    path: *const c_char,
) -> MdgpStatus {
    guard(|| {
        let run = deref(run, "run")?;
        let path = path_arg(path)?;
        mdgp::bench::write_trace(&path, &run.0.trace).map_err(lib_err)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mdgp_run_free(run: *mut MdgpRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
