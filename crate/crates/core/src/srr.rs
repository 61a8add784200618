//! Successive ray refinement on top of coordinate descent.
//!
//! After each sweep the next sweep does not start from the fresh iterate
//! `beta^k` but from the point `s^k = (1 - alpha) h^k + alpha beta^k` that
//! minimizes the objective along the ray from a history point `h^k` through
//! `beta^k`. The chain scheme (SRRC) uses the previous search point as `h^k`;
//! the triangle scheme (SRRT) uses the previous iterate.

use crate::error::{check_len, Error, Result};
use crate::linalg::Problem;
use crate::solver::{drive, SolveOutcome, SolverConfig, Variant};

/// Choice of history point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayScheme {
    /// `h^k = s^{k-1}`
    Chain,
    /// `h^k = beta^{k-1}`
    Triangle,
}

/// `(1 - alpha) h + alpha beta`
pub fn search_point(h: &[f64], beta: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_len("current iterate", h.len(), beta.len())?;
    let mut out = vec![0.0; h.len()];
    search_point_into(h, beta, alpha, &mut out);
    Ok(out)
}

pub(crate) fn search_point_into(h: &[f64], beta: &[f64], alpha: f64, out: &mut [f64]) {
    let keep = 1.0 - alpha;
    for ((o, &hi), &bi) in out.iter_mut().zip(h).zip(beta) {
        *o = keep * hi + alpha * bi;
    }
}

pub fn solve_srrc(problem: &Problem, config: &SolverConfig) -> Result<SolveOutcome> {
    expect_variant(config, Variant::Srrc)?;
    drive(problem, config, Some(RayScheme::Chain))
}

pub fn solve_srrt(problem: &Problem, config: &SolverConfig) -> Result<SolveOutcome> {
    expect_variant(config, Variant::Srrt)?;
    drive(problem, config, Some(RayScheme::Triangle))
}

fn expect_variant(config: &SolverConfig, want: Variant) -> Result<()> {
    if config.variant == want {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "expected variant {want}, got {}",
            config.variant
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::demo_problem;
    use crate::solver::{StopReason, Status};

    fn run(variant: Variant, target: f64, max: usize) -> SolveOutcome {
        let cfg = SolverConfig::new(variant)
            .with_step_tol(None)
            .with_target(Some(target))
            .with_max_sweeps(max);
        crate::solver::solve(&demo_problem(0.0), &cfg).unwrap()
    }

    #[test]
    fn search_point_endpoints() {
        let h = [0.3, -1.0];
        let b = [1.0, 2.0];
        assert_eq!(search_point(&h, &b, 1.0).unwrap(), b.to_vec());
        assert_eq!(search_point(&h, &b, 0.0).unwrap(), h.to_vec());
        assert_eq!(
            search_point(&[0.0, 0.0], &[1.0, 2.0], 2.0).unwrap(),
            vec![2.0, 4.0]
        );
    }

    #[test]
    fn srrc_second_row() {
        let out = run(Variant::Srrc, 0.0, 2);
        let row = out.trace.rows[1];
        assert!((row.alpha.unwrap() - 1.114740).abs() < 1e-3);
        assert!((row.f - 0.016773).abs() < 5e-5);
    }

    #[test]
    fn srrt_rows_three_and_six() {
        let out = run(Variant::Srrt, 0.0, 6);
        let r3 = out.trace.rows[2];
        assert!((r3.alpha.unwrap() - 1.077199).abs() < 1e-3);
        assert!((r3.f - 0.006746).abs() < 5e-5);
        let r6 = out.trace.rows[5];
        assert!((r6.alpha.unwrap() - 15.373834).abs() < 2e-2);
        assert!((r6.f - 0.000061).abs() < 5e-6);
    }

    #[test]
    fn srrc_reaches_1e8_in_16() {
        let out = run(Variant::Srrc, 1e-8, 1000);
        assert_eq!(out.sweeps, 16);
        assert_eq!(out.status, Status::Converged(StopReason::TargetObjective));
    }

    #[test]
    fn zero_response_stops_after_one_sweep() {
        let p0 = demo_problem(0.0);
        let p = crate::linalg::Problem::new(p0.x().clone(), vec![0.0; 5], 0.0).unwrap();
        for v in [Variant::Srrc, Variant::Srrt] {
            let cfg = SolverConfig::new(v).recording();
            let out = crate::solver::solve(&p, &cfg).unwrap();
            assert_eq!(out.sweeps, 1);
            assert!(out.beta.iter().all(|&b| b == 0.0));
            assert!(out.history.unwrap().refinements.is_empty());
        }
    }

    #[test]
    fn wrong_variant_rejected() {
        let p = demo_problem(0.0);
        assert!(solve_srrc(&p, &SolverConfig::new(Variant::Srrt)).is_err());
        assert!(solve_srrt(&p, &SolverConfig::new(Variant::Cd)).is_err());
    }
}
