use std::ffi::{CStr, CString};
use std::ptr;

use srr_lasso::fixtures::{DEMO_X, DEMO_Y};
use srr_lasso_ffi::*;

fn demo_column_major() -> Vec<f64> {
    (0..5).flat_map(|j| (0..5).map(move |i| DEMO_X[i][j])).collect()
}

fn new_demo(lambda: f64) -> *mut SrrProblem {
    let x = demo_column_major();
    let mut p = ptr::null_mut();
    let st = unsafe { srr_problem_new(x.as_ptr(), 5, 5, DEMO_Y.as_ptr(), lambda, &mut p) };
    assert_eq!(st, SrrStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    let msg = srr_last_error_message();
    assert!(!msg.is_null());
    unsafe { CStr::from_ptr(msg) }.to_string_lossy().into_owned()
}

#[test]
fn srrc_counts_through_the_c_abi() {
    let p = new_demo(0.0);
    let mut opts = srr_solve_options_default();
    opts.variant = SrrVariant::Srrc;
    opts.step_tol = 0.0;
    opts.target_objective = 1e-8;
    opts.record_trace = true;
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(srr_solve(p, &opts, &mut sol), SrrStatus::Ok);
        assert_eq!(srr_solution_sweeps(sol), 16);
        assert!(srr_solution_converged(sol));
        assert!(srr_solution_objective(sol) <= 1e-8);
        assert_eq!(srr_solution_trace_len(sol), 16);
        let mut row = SrrTraceRow::default();
        assert_eq!(srr_solution_trace_row(sol, 0, &mut row), SrrStatus::Ok);
        assert!(row.alpha.is_nan());
        assert_eq!(srr_solution_trace_row(sol, 1, &mut row), SrrStatus::Ok);
        assert!((row.alpha - 1.114740).abs() < 1e-3);
        assert_eq!(
            srr_solution_trace_row(sol, 99, &mut row),
            SrrStatus::InvalidArgument
        );
        let mut beta = [0.0; 5];
        assert_eq!(srr_solution_beta(sol, beta.as_mut_ptr(), 5), SrrStatus::Ok);
        assert!(beta.iter().all(|b| b.is_finite()));
        assert_eq!(
            srr_solution_beta(sol, beta.as_mut_ptr(), 4),
            SrrStatus::BufferTooSmall
        );
        srr_solution_free(sol);
        srr_problem_free(p);
    }
}

#[test]
fn null_and_invalid_arguments() {
    let mut p = ptr::null_mut();
    let st = unsafe { srr_problem_new(ptr::null(), 5, 5, DEMO_Y.as_ptr(), 0.0, &mut p) };
    assert_eq!(st, SrrStatus::NullPointer);
    assert!(!last_error().is_empty());

    let x = vec![0.0; 4];
    let y = [1.0, 2.0];
    let st = unsafe { srr_problem_new(x.as_ptr(), 2, 2, y.as_ptr(), 0.0, &mut p) };
    assert_eq!(st, SrrStatus::ZeroColumn);
    assert!(last_error().contains("column 0"));

    let demo = new_demo(0.0);
    unsafe {
        assert_eq!(srr_problem_set_lambda(demo, -1.0), SrrStatus::InvalidArgument);
        assert_eq!(srr_problem_set_lambda(demo, 0.25), SrrStatus::Ok);
        let mut sol = ptr::null_mut();
        assert_eq!(srr_solve(ptr::null(), ptr::null(), &mut sol), SrrStatus::NullPointer);
        assert_eq!(srr_solve(demo, ptr::null(), &mut sol), SrrStatus::Ok);
        assert!(srr_solution_converged(sol));
        srr_solution_free(sol);
        srr_problem_free(demo);
        srr_problem_free(ptr::null_mut());
        srr_solution_free(ptr::null_mut());
        assert_eq!(srr_solution_sweeps(ptr::null()), 0);
        assert!(srr_solution_objective(ptr::null()).is_nan());
    }
}

#[test]
fn lambda_ratio_and_dims() {
    let p = new_demo(0.0);
    unsafe {
        let mut lam = 0.0;
        assert_eq!(srr_lambda_from_ratio(p, 0.5, &mut lam), SrrStatus::Ok);
        let want = srr_lasso::fixtures::demo_problem(0.0).lambda_max() * 0.5;
        assert_eq!(lam, want);
        let (mut n, mut q) = (0, 0);
        assert_eq!(srr_problem_dims(p, &mut n, &mut q), SrrStatus::Ok);
        assert_eq!((n, q), (5, 5));
        srr_problem_free(p);
    }
}

#[test]
fn eigenvalues_through_the_c_abi() {
    let p = new_demo(0.0);
    let (mut re, mut im) = ([0.0; 5], [0.0; 5]);
    unsafe {
        assert_eq!(
            srr_eigenvalues(p, re.as_mut_ptr(), im.as_mut_ptr(), 5),
            SrrStatus::Ok
        );
        assert_eq!(
            srr_eigenvalues(p, re.as_mut_ptr(), im.as_mut_ptr(), 3),
            SrrStatus::BufferTooSmall
        );
        srr_problem_free(p);
    }
    assert!((re[4] - 0.93956707).abs() < 1e-6);
    assert!(im.iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn load_bundled_csv() {
    let path = CString::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/data/paper_example.csv"
    ))
    .unwrap();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(srr_problem_load(path.as_ptr(), 0.0, &mut p), SrrStatus::Ok);
        srr_problem_free(p);
        let missing = CString::new("/nonexistent.csv").unwrap();
        assert_eq!(srr_problem_load(missing.as_ptr(), 0.0, &mut p), SrrStatus::Io);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(srr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
