//! Cyclic coordinate descent for the Lasso.

use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dot, shrinkage, Problem};
use crate::solver::{drive, SolveOutcome, SolverConfig, Variant};

/// One full sweep over coordinates `0..p` in ascending order, updating
/// `beta` and its residual `r = y - X beta` in place. `sweep` only labels
/// errors.
pub(crate) fn sweep_in_place(
    problem: &Problem,
    beta: &mut [f64],
    r: &mut [f64],
    sweep: usize,
) -> Result<()> {
    let x = problem.x();
    let lambda = problem.lambda();
    for (i, (b, &norm_sq)) in beta.iter_mut().zip(x.col_norm_sq()).enumerate() {
        let col = x.column(i);
        let old = *b;
        let z = old + dot(col, r) / norm_sq;
        if !z.is_finite() {
            return Err(Error::NonFinite {
                coordinate: i,
                sweep,
            });
        }
        let new = shrinkage(z, lambda / norm_sq);
        if new != old {
            axpy(old - new, col, r);
            *b = new;
        }
    }
    Ok(())
}

/// One coordinate descent sweep from `beta_in` with residual `r_in`.
pub fn cd_sweep(problem: &Problem, beta_in: &[f64], r_in: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len("coefficient vector", problem.p(), beta_in.len())?;
    check_len("residual", problem.n(), r_in.len())?;
    let mut beta = beta_in.to_vec();
    let mut r = r_in.to_vec();
    sweep_in_place(problem, &mut beta, &mut r, 1)?;
    Ok((beta, r))
}

/// Plain coordinate descent from `beta = 0`.
pub fn solve_cd(problem: &Problem, config: &SolverConfig) -> Result<SolveOutcome> {
    if config.variant != Variant::Cd {
        return Err(Error::InvalidArgument(format!(
            "solve_cd called with variant {}",
            config.variant
        )));
    }
    drive(problem, config, None)
}

/// Per-coordinate ray factor of three consecutive iterates: the `alpha_i`
/// with `next_i = (1 - alpha_i) prev_i + alpha_i cur_i`, i.e. how far along
/// the ray from `prev` through `cur` the next iterate landed. Values above 1
/// mean the ray was continued past `cur`.
///
/// Coordinates where `prev` and `cur` (nearly) coincide have no ray and are
/// returned as `None`.
pub fn ray_alpha_estimate(
    beta_prev: &[f64],
    beta_cur: &[f64],
    beta_next: &[f64],
) -> Result<Vec<Option<f64>>> {
    check_len("current iterate", beta_prev.len(), beta_cur.len())?;
    check_len("next iterate", beta_prev.len(), beta_next.len())?;
    let scale = beta_prev
        .iter()
        .chain(beta_cur)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = 1e-14 * scale;
    Ok(beta_prev
        .iter()
        .zip(beta_cur)
        .zip(beta_next)
        .map(|((&prev, &cur), &next)| {
            let den = cur - prev;
            (den.abs() > cutoff).then(|| (next - prev) / den)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::demo_problem;
    use crate::linalg::{objective, residual, DesignMatrix};

    const ROW1: [f64; 5] = [0.048912, 0.034041, 0.407960, 0.055687, 0.160413];
    const ROW2: [f64; 5] = [0.057182, -0.033692, 0.465254, 0.027810, 0.171740];

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn first_two_sweeps_match_golden() {
        let p = demo_problem(0.0);
        let (b1, r1) = cd_sweep(&p, &[0.0; 5], p.y()).unwrap();
        assert_close(&b1, &ROW1, 5e-4);
        let (b2, _) = cd_sweep(&p, &b1, &r1).unwrap();
        assert_close(&b2, &ROW2, 5e-4);
    }

    #[test]
    fn incremental_residual_stays_exact() {
        let p = demo_problem(0.1);
        let mut beta = vec![0.0; 5];
        let mut r = p.y().to_vec();
        for _ in 0..40 {
            (beta, r) = cd_sweep(&p, &beta, &r).unwrap();
        }
        let fresh = residual(&p, &beta).unwrap();
        let drift = fresh.iter().zip(&r).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(drift <= p.drift_tol());
    }

    #[test]
    fn large_lambda_keeps_zero() {
        let p0 = demo_problem(0.0);
        let p = p0.with_lambda(p0.lambda_max()).unwrap();
        let (b, r) = cd_sweep(&p, &[0.0; 5], p.y()).unwrap();
        assert!(b.iter().all(|&v| v == 0.0));
        assert_eq!(r, p.y());
    }

    #[test]
    fn each_coordinate_update_is_greedy() {
        let p = demo_problem(0.05);
        let mut beta = vec![0.3, -0.2, 0.1, 0.0, 0.4];
        let mut r = residual(&p, &beta).unwrap();
        for i in 0..5 {
            let before = objective(&p, &beta).unwrap();
            let col = p.x().column(i);
            let norm_sq = p.x().col_norm_sq()[i];
            let new = shrinkage(beta[i] + dot(col, &r) / norm_sq, p.lambda() / norm_sq);
            axpy(beta[i] - new, col, &mut r);
            beta[i] = new;
            let after = objective(&p, &beta).unwrap();
            assert!(after <= before + 1e-15);
        }
    }

    #[test]
    fn non_finite_is_reported_with_coordinate() {
        let x = DesignMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let p = Problem::new(x, vec![1.0], 0.0).unwrap();
        let err = cd_sweep(&p, &[f64::NAN, 0.0], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { coordinate: 0, .. }));
    }

    #[test]
    fn ray_alpha_degenerate_is_undefined() {
        let a = ray_alpha_estimate(&[1.0, 2.0], &[1.0, 3.0], &[5.0, 5.0]).unwrap();
        assert_eq!(a[0], None);
        assert_eq!(a[1], Some(3.0));
    }

    #[test]
    fn ray_alpha_on_cd_trajectory() {
        let p = demo_problem(0.0);
        let mut traj = vec![vec![0.0; 5]];
        let mut r = p.y().to_vec();
        for _ in 0..3 {
            let (b, r2) = cd_sweep(&p, traj.last().unwrap(), &r).unwrap();
            traj.push(b);
            r = r2;
        }
        let a = ray_alpha_estimate(&traj[1], &traj[2], &traj[3]).unwrap();
        assert!((a[4].unwrap() - 1.526899).abs() < 1e-3);
        assert!((a[0].unwrap() + 1.451503).abs() < 1e-3);
    }

    #[test]
    fn solve_cd_rejects_other_variants() {
        let p = demo_problem(0.0);
        assert!(solve_cd(&p, &SolverConfig::new(Variant::Srrc)).is_err());
    }
}
