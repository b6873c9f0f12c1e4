#ifndef MDGP_H
#define MDGP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MdgpAtomMode {
  MDGP_ATOM_MODE_BACKBONE = 0,
  MDGP_ATOM_MODE_ALL = 1,
} MdgpAtomMode;

typedef enum MdgpGreedyScope {
  MDGP_GREEDY_SCOPE_ALL_GENES = 0,
  MDGP_GREEDY_SCOPE_SINGLE_GENE = 1,
} MdgpGreedyScope;

typedef enum MdgpAlgorithm {
  MDGP_ALGORITHM_GREMUTRRR = 0,
  MDGP_ALGORITHM_BASIC = 1,
} MdgpAlgorithm;

/**
 * Result code of every fallible call.
 */
typedef enum MdgpStatus {
  MDGP_STATUS_OK = 0,
  MDGP_STATUS_NULL_POINTER = 1,
  MDGP_STATUS_INVALID_ARGUMENT = 2,
  MDGP_STATUS_IO = 3,
  MDGP_STATUS_PARSE = 4,
  MDGP_STATUS_INVALID_INSTANCE = 5,
  MDGP_STATUS_INVALID_CONFIG = 6,
  MDGP_STATUS_DIMENSION_MISMATCH = 7,
  MDGP_STATUS_EMPTY_STRUCTURE = 8,
  MDGP_STATUS_NO_ELIGIBLE_CONSTRAINTS = 9,
  MDGP_STATUS_OUT_OF_RANGE = 10,
  MDGP_STATUS_PANIC = 11,
} MdgpStatus;

/**
 * Opaque instance handle.
 */
typedef struct MdgpInstance MdgpInstance;

/**
 * Opaque run result handle.
 */
typedef struct MdgpRun MdgpRun;

/**
 * Instance generator settings. Obtain defaults from
 * [`mdgp_gen_config_default`].
 */
typedef struct MdgpGenConfig {
  double epsilon;
  double cutoff;
  double keep_fraction;
  enum MdgpAtomMode atom_mode;
  uint64_t seed;
} MdgpGenConfig;

/**
 * Engine settings. Obtain a preset from [`mdgp_ga_config_preset`] and
 * adjust fields as needed. `stagnation_limit == 0` disables early stopping.
 */
typedef struct MdgpGaConfig {
  uint32_t population_size;
  uint32_t max_generations;
  double greedy_mutation_rate;
  double random_mutation_rate;
  uint32_t greedy_trials;
  enum MdgpGreedyScope greedy_scope;
  uint32_t tournament_size;
  double uniform_rate;
  double sigma;
  double similarity_threshold;
  bool twin_removal;
  uint32_t twin_removal_interval;
  bool random_restart;
  uint32_t restart_window;
  double restart_threshold;
  double restart_fraction;
  uint32_t stagnation_limit;
  uint64_t seed;
} MdgpGaConfig;

/**
 * One generation of a run trace. `twin_removal` and `restart` are 1 when
 * the event fired in that generation.
 */
typedef struct MdgpTraceRow {
  uint64_t generation;
  double best_lde;
  double global_best_lde;
  bool twin_removal;
  bool restart;
} MdgpTraceRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread, or NULL after a
 * successful call. The pointer stays valid until the next call into this
 * library from the same thread.
 */
const char *mdgp_last_error(void);

struct MdgpGenConfig mdgp_gen_config_default(void);

struct MdgpGaConfig mdgp_ga_config_preset(enum MdgpAlgorithm algorithm);

/**
 * Reads a `.dgp` instance file.
 */
enum MdgpStatus mdgp_instance_read(const char *path, struct MdgpInstance **out);

/**
 * Builds an instance from a PDB coordinate file.
 */
enum MdgpStatus mdgp_instance_from_pdb(const char *path,
                                       const struct MdgpGenConfig *cfg,
                                       struct MdgpInstance **out);

/**
 * Writes an instance in `.dgp` format.
 */
enum MdgpStatus mdgp_instance_write(const struct MdgpInstance *inst, const char *path);

/**
 * Atom count, or 0 for a NULL handle.
 */
size_t mdgp_instance_num_atoms(const struct MdgpInstance *inst);

/**
 * Constraint count, or 0 for a NULL handle.
 */
size_t mdgp_instance_num_constraints(const struct MdgpInstance *inst);

/**
 * Copies constraint `k` into the output arguments.
 */
enum MdgpStatus mdgp_instance_constraint(const struct MdgpInstance *inst,
                                         size_t k,
                                         size_t *i,
                                         size_t *j,
                                         double *lower,
                                         double *upper);

void mdgp_instance_free(struct MdgpInstance *inst);

/**
 * Evaluates the LDE of `genes` (`3 * num_atoms` values, x/y/z per atom).
 */
enum MdgpStatus mdgp_lde(const struct MdgpInstance *inst,
                         const double *genes,
                         size_t len,
                         double *out);

/**
 * Runs the engine. The result handle must be released with
 * [`mdgp_run_free`].
 */
enum MdgpStatus mdgp_run(const struct MdgpInstance *inst,
                         const struct MdgpGaConfig *cfg,
                         struct MdgpRun **out);

/**
 * Final global-best LDE, or NaN for a NULL handle.
 */
double mdgp_run_best_lde(const struct MdgpRun *run);

size_t mdgp_run_generations(const struct MdgpRun *run);

/**
 * Copies the best conformation into `buf`, which must hold exactly
 * `3 * num_atoms` doubles.
 */
enum MdgpStatus mdgp_run_best_genes(const struct MdgpRun *run, double *buf, size_t len);

size_t mdgp_run_trace_len(const struct MdgpRun *run);

enum MdgpStatus mdgp_run_trace_row(const struct MdgpRun *run,
                                   size_t index,
                                   struct MdgpTraceRow *out);

/**
 * Writes the trace as `trace.csv`-formatted text to `path`.
 */
enum MdgpStatus mdgp_run_write_trace(const struct MdgpRun *run, const char *path);

void mdgp_run_free(struct MdgpRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MDGP_H */
