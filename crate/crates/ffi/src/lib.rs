//! C ABI over `srr-lasso`.
//!
//! Problems and solutions are opaque heap handles created by `srr_*_new` /
//! `srr_solve` and released with the matching `*_free`. Every fallible call
//! returns an [`SrrStatus`]; on failure `srr_last_error_message` describes
//! the most recent error on the calling thread. No call unwinds into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use srr_lasso::bench::lambda_from_ratio;
use srr_lasso::spectral::{eigenvalues, gauss_seidel_matrix, ldu_split};
use srr_lasso::{DesignMatrix, Error, Problem, RefineMethod, SolveOutcome, SolverConfig, Variant};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    ZeroColumn = 4,
    NumericFailure = 5,
    Unsupported = 6,
    Io = 7,
    Parse = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrrVariant {
    Cd = 0,
    Srrc = 1,
    Srrt = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrrRefine {
    Auto = 0,
    Sort = 1,
    Bisection = 2,
}

/// Solver settings. `step_tol <= 0` disables the step rule and a NaN
/// `target_objective` disables the objective rule.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SrrSolveOptions {
    pub variant: SrrVariant,
    pub refine: SrrRefine,
    pub step_tol: f64,
    pub target_objective: f64,
    pub max_sweeps: usize,
    pub record_trace: bool,
}

/// One sweep of a recorded trace. `alpha` is NaN when there is none.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SrrTraceRow {
    pub k: usize,
    pub f: f64,
    pub alpha: f64,
    pub step_norm: f64,
    pub sparsity: f64,
}

/// Opaque problem handle.
pub struct SrrProblem {
    inner: Problem,
}

/// Opaque solution handle.
pub struct SrrSolution {
    inner: SolveOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SrrStatus, msg: impl Into<String>) -> SrrStatus {
    set_last_error(msg.into());
    status
}

fn status_of(e: &Error) -> SrrStatus {
    match e {
        Error::InvalidArgument(_) | Error::DegenerateRefinement(_) => SrrStatus::InvalidArgument,
        Error::DimensionMismatch { .. } | Error::RaggedRow { .. } => SrrStatus::DimensionMismatch,
        Error::ZeroColumn(_) => SrrStatus::ZeroColumn,
        Error::NonFinite { .. } | Error::NumericFailure(_) => SrrStatus::NumericFailure,
        Error::Unsupported(_) => SrrStatus::Unsupported,
        Error::Io { .. } => SrrStatus::Io,
        Error::Parse { .. } => SrrStatus::Parse,
    }
}

fn from_error(e: Error) -> SrrStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, turning panics into [`SrrStatus::Panic`].
fn guard(f: impl FnOnce() -> SrrStatus) -> SrrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SrrStatus::Panic, "internal panic"),
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn srr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn srr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a problem from a column-major `n x p` matrix `x` and response `y`
/// of length `n`. On success `*out` owns a new handle.
///
/// # Safety
/// `x` must point to `n * p` doubles, `y` to `n` doubles and `out` to
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn srr_problem_new(
    x: *const f64,
    n: usize,
    p: usize,
    y: *const f64,
    lambda: f64,
    out: *mut *mut SrrProblem,
) -> SrrStatus {
    guard(|| {
        if x.is_null() || y.is_null() || out.is_null() {
            return fail(SrrStatus::NullPointer, "null argument to srr_problem_new");
        }
        let Some(len) = n.checked_mul(p) else {
            return fail(SrrStatus::InvalidArgument, "n * p overflows");
        };
        let xs = std::slice::from_raw_parts(x, len).to_vec();
        let ys = std::slice::from_raw_parts(y, n).to_vec();
        let built = DesignMatrix::from_column_major(n, p, xs).and_then(|m| Problem::new(m, ys, lambda));
        match built {
            Ok(problem) => {
                *out = Box::into_raw(Box::new(SrrProblem { inner: problem }));
                SrrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Loads a problem from a CSV (last column is the response) or libsvm file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn srr_problem_load(
    path: *const c_char,
    lambda: f64,
    out: *mut *mut SrrProblem,
) -> SrrStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(SrrStatus::NullPointer, "null argument to srr_problem_load");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(SrrStatus::InvalidArgument, "path is not valid UTF-8");
        };
        let path = Path::new(path);
        let loaded = srr_lasso::io::load(path, srr_lasso::io::InputFormat::guess(path), None)
            .and_then(|(x, y)| Problem::new(x, y, lambda));
        match loaded {
            Ok(problem) => {
                *out = Box::into_raw(Box::new(SrrProblem { inner: problem }));
                SrrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `problem` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn srr_problem_free(problem: *mut SrrProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn srr_problem_set_lambda(problem: *mut SrrProblem, lambda: f64) -> SrrStatus {
    guard(|| {
        let Some(p) = problem.as_mut() else {
            return fail(SrrStatus::NullPointer, "null problem");
        };
        match p.inner.with_lambda(lambda) {
            Ok(next) => {
                p.inner = next;
                SrrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Writes the problem dimensions.
///
/// # Safety
/// `problem` must be a live handle; `n` and `p` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn srr_problem_dims(
    problem: *const SrrProblem,
    n: *mut usize,
    p: *mut usize,
) -> SrrStatus {
    guard(|| {
        let Some(pr) = problem.as_ref() else {
            return fail(SrrStatus::NullPointer, "null problem");
        };
        if let Some(n) = n.as_mut() {
            *n = pr.inner.n();
        }
        if let Some(p) = p.as_mut() {
            *p = pr.inner.p();
        }
        SrrStatus::Ok
    })
}

/// `ratio * ||X^T y||_inf`.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn srr_lambda_from_ratio(
    problem: *const SrrProblem,
    ratio: f64,
    out: *mut f64,
) -> SrrStatus {
    guard(|| {
        let (Some(p), false) = (problem.as_ref(), out.is_null()) else {
            return fail(SrrStatus::NullPointer, "null argument to srr_lambda_from_ratio");
        };
        match lambda_from_ratio(p.inner.x(), p.inner.y(), ratio) {
            Ok(l) => {
                *out = l;
                SrrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Defaults: coordinate descent, automatic refinement, step tolerance 1e-6,
/// no objective target, 100000 sweeps, no trace.
#[no_mangle]
pub extern "C" fn srr_solve_options_default() -> SrrSolveOptions {
    SrrSolveOptions {
        variant: SrrVariant::Cd,
        refine: SrrRefine::Auto,
        step_tol: 1e-6,
        target_objective: f64::NAN,
        max_sweeps: 100_000,
        record_trace: false,
    }
}

fn config_from(opts: &SrrSolveOptions) -> SolverConfig {
    let variant = match opts.variant {
        SrrVariant::Cd => Variant::Cd,
        SrrVariant::Srrc => Variant::Srrc,
        SrrVariant::Srrt => Variant::Srrt,
    };
    let refine = match opts.refine {
        SrrRefine::Auto => RefineMethod::Auto,
        SrrRefine::Sort => RefineMethod::Sort,
        SrrRefine::Bisection => RefineMethod::Bisection,
    };
    SolverConfig {
        refine_method: refine,
        trace: opts.record_trace,
        ..SolverConfig::new(variant)
    }
    .with_step_tol((opts.step_tol > 0.0).then_some(opts.step_tol))
    .with_target((!opts.target_objective.is_nan()).then_some(opts.target_objective))
    .with_max_sweeps(opts.max_sweeps)
}

/// Solves `problem`. `opts` may be NULL for the defaults. A run that hits
/// the sweep limit still succeeds; check `srr_solution_converged`.
///
/// # Safety
/// `problem` must be a live handle, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn srr_solve(
    problem: *const SrrProblem,
    opts: *const SrrSolveOptions,
    out: *mut *mut SrrSolution,
) -> SrrStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else {
            return fail(SrrStatus::NullPointer, "null problem");
        };
        if out.is_null() {
            return fail(SrrStatus::NullPointer, "null output pointer");
        }
        let opts = opts.as_ref().copied().unwrap_or_else(|| srr_solve_options_default());
        match srr_lasso::solve(&p.inner, &config_from(&opts)) {
            Ok(outcome) => {
                *out = Box::into_raw(Box::new(SrrSolution { inner: outcome }));
                SrrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `solution` must be NULL or a handle from `srr_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn srr_solution_free(solution: *mut SrrSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Sweeps performed, 0 for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn srr_solution_sweeps(solution: *const SrrSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.inner.sweeps)
}

/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn srr_solution_converged(solution: *const SrrSolution) -> bool {
    solution.as_ref().is_some_and(|s| s.inner.converged())
}

/// Final objective, NaN for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn srr_solution_objective(solution: *const SrrSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.inner.objective)
}

/// Copies the coefficients into `buf`, which must hold at least `p` values.
///
/// # Safety
/// `solution` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn srr_solution_beta(
    solution: *const SrrSolution,
    buf: *mut f64,
    len: usize,
) -> SrrStatus {
    guard(|| {
        let (Some(s), false) = (solution.as_ref(), buf.is_null()) else {
            return fail(SrrStatus::NullPointer, "null argument to srr_solution_beta");
        };
        let beta = &s.inner.beta;
        if len < beta.len() {
            return fail(
                SrrStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", beta.len()),
            );
        }
        std::slice::from_raw_parts_mut(buf, beta.len()).copy_from_slice(beta);
        SrrStatus::Ok
    })
}

/// Number of recorded trace rows (0 unless `record_trace` was set).
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn srr_solution_trace_len(solution: *const SrrSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.inner.trace.len())
}

/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn srr_solution_trace_row(
    solution: *const SrrSolution,
    index: usize,
    out: *mut SrrTraceRow,
) -> SrrStatus {
    guard(|| {
        let (Some(s), false) = (solution.as_ref(), out.is_null()) else {
            return fail(SrrStatus::NullPointer, "null argument to srr_solution_trace_row");
        };
        let Some(r) = s.inner.trace.rows.get(index) else {
            return fail(
                SrrStatus::InvalidArgument,
                format!("trace row {index} out of range ({} rows)", s.inner.trace.len()),
            );
        };
        *out = SrrTraceRow {
            k: r.k,
            f: r.f,
            alpha: r.alpha.unwrap_or(f64::NAN),
            step_norm: r.step_norm,
            sparsity: r.sparsity,
        };
        SrrStatus::Ok
    })
}

/// Eigenvalues of the Gauss-Seidel iteration matrix `-(L + D)^{-1} U` of the
/// problem's Gram matrix, sorted by magnitude. `re` and `im` must each hold
/// at least `p` values.
///
/// # Safety
/// `problem` must be a live handle; `re` and `im` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn srr_eigenvalues(
    problem: *const SrrProblem,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> SrrStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else {
            return fail(SrrStatus::NullPointer, "null problem");
        };
        if re.is_null() || im.is_null() {
            return fail(SrrStatus::NullPointer, "null output buffer");
        }
        if len < p.inner.p() {
            return fail(
                SrrStatus::BufferTooSmall,
                format!("buffers hold {len} values, need {}", p.inner.p()),
            );
        }
        let eigs = match ldu_split(p.inner.x()).and_then(|s| eigenvalues(&gauss_seidel_matrix(&s))) {
            Ok(e) => e,
            Err(e) => return from_error(e),
        };
        let (re, im) = (
            std::slice::from_raw_parts_mut(re, eigs.len()),
            std::slice::from_raw_parts_mut(im, eigs.len()),
        );
        for (i, z) in eigs.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        SrrStatus::Ok
    })
}
