#ifndef SRR_LASSO_H
#define SRR_LASSO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SrrStatus {
  SRR_STATUS_OK = 0,
  SRR_STATUS_NULL_POINTER = 1,
  SRR_STATUS_INVALID_ARGUMENT = 2,
  SRR_STATUS_DIMENSION_MISMATCH = 3,
  SRR_STATUS_ZERO_COLUMN = 4,
  SRR_STATUS_NUMERIC_FAILURE = 5,
  SRR_STATUS_UNSUPPORTED = 6,
  SRR_STATUS_IO = 7,
  SRR_STATUS_PARSE = 8,
  SRR_STATUS_BUFFER_TOO_SMALL = 9,
  SRR_STATUS_PANIC = 10,
} SrrStatus;

typedef enum SrrVariant {
  SRR_VARIANT_CD = 0,
  SRR_VARIANT_SRRC = 1,
  SRR_VARIANT_SRRT = 2,
} SrrVariant;

typedef enum SrrRefine {
  SRR_REFINE_AUTO = 0,
  SRR_REFINE_SORT = 1,
  SRR_REFINE_BISECTION = 2,
} SrrRefine;

// Opaque problem handle.
typedef struct SrrProblem SrrProblem;

// Opaque solution handle.
typedef struct SrrSolution SrrSolution;

// Solver settings. `step_tol <= 0` disables the step rule and a NaN
// `target_objective` disables the objective rule.
typedef struct SrrSolveOptions {
  enum SrrVariant variant;
  enum SrrRefine refine;
  double step_tol;
  double target_objective;
  size_t max_sweeps;
  bool record_trace;
} SrrSolveOptions;

// One sweep of a recorded trace. `alpha` is NaN when there is none.
typedef struct SrrTraceRow {
  size_t k;
  double f;
  double alpha;
  double step_norm;
  double sparsity;
} SrrTraceRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *srr_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *srr_version(void);

// Builds a problem from a column-major `n x p` matrix `x` and response `y`
// of length `n`. On success `*out` owns a new handle.
//
// # Safety
// `x` must point to `n * p` doubles, `y` to `n` doubles and `out` to
// writable storage for one pointer.
enum SrrStatus srr_problem_new(const double *x,
                               size_t n,
                               size_t p,
                               const double *y,
                               double lambda,
                               struct SrrProblem **out);

// Loads a problem from a CSV (last column is the response) or libsvm file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum SrrStatus srr_problem_load(const char *path, double lambda, struct SrrProblem **out);

// # Safety
// `problem` must be NULL or a handle from this library not yet freed.
void srr_problem_free(struct SrrProblem *problem);

// # Safety
// `problem` must be a live handle.
enum SrrStatus srr_problem_set_lambda(struct SrrProblem *problem, double lambda);

// Writes the problem dimensions.
//
// # Safety
// `problem` must be a live handle; `n` and `p` writable or NULL.
enum SrrStatus srr_problem_dims(const struct SrrProblem *problem, size_t *n, size_t *p);

// `ratio * ||X^T y||_inf`.
//
// # Safety
// `problem` must be a live handle and `out` writable.
enum SrrStatus srr_lambda_from_ratio(const struct SrrProblem *problem, double ratio, double *out);

// Defaults: coordinate descent, automatic refinement, step tolerance 1e-6,
// no objective target, 100000 sweeps, no trace.
struct SrrSolveOptions srr_solve_options_default(void);

// Solves `problem`. `opts` may be NULL for the defaults. A run that hits
// the sweep limit still succeeds; check `srr_solution_converged`.
//
// # Safety
// `problem` must be a live handle, `opts` NULL or valid, `out` writable.
enum SrrStatus srr_solve(const struct SrrProblem *problem,
                         const struct SrrSolveOptions *opts,
                         struct SrrSolution **out);

// # Safety
// `solution` must be NULL or a handle from `srr_solve` not yet freed.
void srr_solution_free(struct SrrSolution *solution);

// Sweeps performed, 0 for NULL.
//
// # Safety
// `solution` must be NULL or a live handle.
size_t srr_solution_sweeps(const struct SrrSolution *solution);

// # Safety
// `solution` must be NULL or a live handle.
bool srr_solution_converged(const struct SrrSolution *solution);

// Final objective, NaN for NULL.
//
// # Safety
// `solution` must be NULL or a live handle.
double srr_solution_objective(const struct SrrSolution *solution);

// Copies the coefficients into `buf`, which must hold at least `p` values.
//
// # Safety
// `solution` must be a live handle and `buf` valid for `len` writes.
enum SrrStatus srr_solution_beta(const struct SrrSolution *solution, double *buf, size_t len);

// Number of recorded trace rows (0 unless `record_trace` was set).
//
// # Safety
// `solution` must be NULL or a live handle.
size_t srr_solution_trace_len(const struct SrrSolution *solution);

// # Safety
// `solution` must be a live handle and `out` writable.
enum SrrStatus srr_solution_trace_row(const struct SrrSolution *solution,
                                      size_t index,
                                      struct SrrTraceRow *out);

// Eigenvalues of the Gauss-Seidel iteration matrix `-(L + D)^{-1} U` of the
// problem's Gram matrix, sorted by magnitude. `re` and `im` must each hold
// at least `p` values.
//
// # Safety
// `problem` must be a live handle; `re` and `im` valid for `len` writes.
enum SrrStatus srr_eigenvalues(const struct SrrProblem *problem,
                               double *re,
                               double *im,
                               size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SRR_LASSO_H */
