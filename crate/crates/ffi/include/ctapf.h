#ifndef CTAPF_H
#define CTAPF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CtapfSolver {
  CTAPF_SOLVER_TCBS = 0,
  CTAPF_SOLVER_TCBS_NN2 = 1,
  CTAPF_SOLVER_GREEDY = 2,
  CTAPF_SOLVER_DECOUPLED = 3,
  CTAPF_SOLVER_ORACLE = 4,
} CtapfSolver;

typedef enum CtapfStatus {
  CTAPF_STATUS_OK = 0,
  CTAPF_STATUS_NULL_ARGUMENT = 1,
  CTAPF_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON, or a scenario that violates the problem contract.
   */
  CTAPF_STATUS_FORMAT = 3,
  /**
   * No collision-free plan exists (or a task is unreachable).
   */
  CTAPF_STATUS_INFEASIBLE = 4,
  /**
   * A search budget ran out before a plan was found.
   */
  CTAPF_STATUS_BUDGET = 5,
  /**
   * Bad argument value, such as an unknown solver.
   */
  CTAPF_STATUS_INVALID_ARGUMENT = 6,
  /**
   * A bug: an internal error or a caught panic.
   */
  CTAPF_STATUS_INTERNAL = 7,
} CtapfStatus;

/**
 * Opaque problem handle.
 */
typedef struct CtapfProblem CtapfProblem;

/**
 * Opaque solution handle.
 */
typedef struct CtapfSolution CtapfSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none failed.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *ctapf_last_error(void);

/**
 * Parses a scenario JSON document into a new problem handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be a valid pointer to
 * write the handle to. Free the handle with [`ctapf_problem_free`].
 */
enum CtapfStatus ctapf_problem_from_json(const char *json, struct CtapfProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle from [`ctapf_problem_from_json`] that
 * has not been freed.
 */
void ctapf_problem_free(struct CtapfProblem *problem);

/**
 * # Safety
 * The handle must be null or live.
 */
size_t ctapf_problem_agent_count(const struct CtapfProblem *problem);

/**
 * # Safety
 * The handle must be null or live.
 */
size_t ctapf_problem_task_count(const struct CtapfProblem *problem);

/**
 * Solves `problem` with `solver`, one of the [`CtapfSolver`] values.
 * `node_budget` caps high-level expansions
 * (0 means the default of two million) and `time_limit_ms` caps wall time
 * (0 means unlimited).
 *
 * # Safety
 * `problem` must be a live problem handle and `out` a valid pointer. Free
 * the result with [`ctapf_solution_free`].
 */
enum CtapfStatus ctapf_solve(const struct CtapfProblem *problem,
                             uint32_t solver,
                             uint64_t node_budget,
                             uint64_t time_limit_ms,
                             struct CtapfSolution **out);

/**
 * # Safety
 * `solution` must be null or a live handle from [`ctapf_solve`].
 */
void ctapf_solution_free(struct CtapfSolution *solution);

/**
 * Sum of task completion times, or 0 for a null handle.
 *
 * # Safety
 * The handle must be null or live.
 */
uint64_t ctapf_solution_total_cost(const struct CtapfSolution *solution);

/**
 * Number of time steps in every (padded) path.
 *
 * # Safety
 * The handle must be null or live.
 */
uint32_t ctapf_solution_horizon(const struct CtapfSolution *solution);

/**
 * Renders the solution JSON into a newly allocated string.
 *
 * # Safety
 * `solution` must be a live handle and `out` a valid pointer. Free the
 * string with [`ctapf_string_free`].
 */
enum CtapfStatus ctapf_solution_to_json(const struct CtapfSolution *solution, char **out);

/**
 * Checks `solution` against `problem` and writes the number of violations
 * to `violations` (0 means valid). With `strict`, task fulfilment is derived
 * from the paths alone.
 *
 * # Safety
 * Both handles must be live and `violations` a valid pointer.
 */
enum CtapfStatus ctapf_validate(const struct CtapfProblem *problem,
                                const struct CtapfSolution *solution,
                                bool strict,
                                size_t *violations);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void ctapf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CTAPF_H */
