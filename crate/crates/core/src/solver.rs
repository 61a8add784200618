//! Solver configuration, outcomes and the shared sweep loop behind plain
//! coordinate descent and both ray-refinement schemes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cd::sweep_in_place;
use crate::error::{Error, Result};
use crate::linalg::{
    dist2, objective_from_residual, residual, sparsity, Problem, RESIDUAL_REFRESH_PERIOD,
};
use crate::refine::{minimize_g, RefinementInput};
use crate::srr::{search_point_into, RayScheme};
use crate::trace::{IterationTrace, TraceMeta, TraceRow};

/// Refinement is skipped when `f(h) - f(beta)` is below this fraction of `f(h)`.
pub const SKIP_REFINEMENT_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Cd,
    Srrc,
    Srrt,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Cd, Variant::Srrc, Variant::Srrt];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Cd => "cd",
            Variant::Srrc => "srrc",
            Variant::Srrt => "srrt",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cd" => Ok(Variant::Cd),
            "srrc" | "cd+srrc" => Ok(Variant::Srrc),
            "srrt" | "cd+srrt" => Ok(Variant::Srrt),
            other => Err(Error::InvalidArgument(format!("unknown variant '{other}'"))),
        }
    }
}

/// How the refinement factor is computed when `lambda > 0`. With
/// `lambda = 0` the closed form is always used.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefineMethod {
    /// Closed form at `lambda = 0`, breakpoint sort otherwise.
    #[default]
    Auto,
    Sort,
    Bisection,
}

impl FromStr for RefineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" | "closed_form_auto" => Ok(RefineMethod::Auto),
            "sort" => Ok(RefineMethod::Sort),
            "bisection" => Ok(RefineMethod::Bisection),
            other => Err(Error::InvalidArgument(format!(
                "unknown refinement method '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Stop when `||beta^k - beta^{k-1}||_2 <= step_tol`.
    pub step_tol: Option<f64>,
    /// Stop when `f(beta^k) <= target_objective`.
    pub target_objective: Option<f64>,
    pub max_sweeps: usize,
    pub refine_method: RefineMethod,
    /// Record one [`TraceRow`] per sweep.
    pub trace: bool,
    /// Keep every iterate, search point and refinement record in
    /// [`SolveOutcome::history`]. Meant for small diagnostic runs.
    pub record_iterates: bool,
    /// Pin every refinement factor to 1. The refined schemes then reduce to
    /// plain coordinate descent.
    pub unit_refinement: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            variant: Variant::Cd,
            step_tol: Some(1e-6),
            target_objective: None,
            max_sweeps: 100_000,
            refine_method: RefineMethod::Auto,
            trace: true,
            record_iterates: false,
            unit_refinement: false,
        }
    }
}

impl SolverConfig {
    pub fn new(variant: Variant) -> Self {
        SolverConfig {
            variant,
            ..Default::default()
        }
    }

    pub fn with_step_tol(mut self, tol: Option<f64>) -> Self {
        self.step_tol = tol;
        self
    }

    pub fn with_target(mut self, target: Option<f64>) -> Self {
        self.target_objective = target;
        self
    }

    pub fn with_max_sweeps(mut self, max_sweeps: usize) -> Self {
        self.max_sweeps = max_sweeps;
        self
    }

    pub fn with_refine(mut self, method: RefineMethod) -> Self {
        self.refine_method = method;
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be positive".into()));
        }
        if let Some(tol) = self.step_tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "step tolerance must be positive, got {tol}"
                )));
            }
        }
        if let Some(t) = self.target_objective {
            if t.is_nan() {
                return Err(Error::InvalidArgument("target objective is NaN".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    StepTolerance,
    TargetObjective,
    /// A sweep left its starting point unchanged, which certifies optimality.
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged(StopReason),
    MaxSweeps,
}

/// One refinement step: the objective at the history point, at the fresh
/// iterate and at the resulting search point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementRecord {
    /// Sweep after which the factor was computed.
    pub k: usize,
    pub f_history: f64,
    pub f_beta: f64,
    pub f_search: f64,
    pub alpha: f64,
    pub skipped: bool,
}

/// Full iterate history of a recorded run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    /// `beta^1, ..., beta^K`.
    pub betas: Vec<Vec<f64>>,
    /// `s^0, ..., s^{K-1}`: the point each sweep started from.
    pub search_points: Vec<Vec<f64>>,
    /// Refinement steps, in order (`alpha^1, alpha^2, ...`).
    pub refinements: Vec<RefinementRecord>,
}

impl History {
    pub fn alphas(&self) -> Vec<f64> {
        self.refinements.iter().map(|r| r.alpha).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub beta: Vec<f64>,
    pub objective: f64,
    pub sweeps: usize,
    pub status: Status,
    pub lambda: f64,
    pub trace: IterationTrace,
    pub history: Option<History>,
}

impl SolveOutcome {
    pub fn converged(&self) -> bool {
        matches!(self.status, Status::Converged(_))
    }

    pub fn sparsity(&self) -> f64 {
        sparsity(&self.beta)
    }
}

/// Runs the configured variant.
pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<SolveOutcome> {
    let scheme = match config.variant {
        Variant::Cd => None,
        Variant::Srrc => Some(RayScheme::Chain),
        Variant::Srrt => Some(RayScheme::Triangle),
    };
    drive(problem, config, scheme)
}

fn slack(f: f64) -> f64 {
    1e-12 * f.abs().max(1.0)
}

pub(crate) fn drive(
    problem: &Problem,
    config: &SolverConfig,
    scheme: Option<RayScheme>,
) -> Result<SolveOutcome> {
    config.validate()?;
    let p = problem.p();
    let lambda = problem.lambda();

    // Search point and its residual; plain CD keeps s == beta.
    let mut s = vec![0.0; p];
    let mut r_s = problem.y().to_vec();
    let mut f_s = objective_from_residual(&r_s, &s, lambda);
    // Previous iterate, used for the step norm and as the SRRT history point.
    let mut beta_prev = vec![0.0; p];
    let mut r_prev = problem.y().to_vec();
    let mut f_prev = f_s;

    let mut beta = vec![0.0; p];
    let mut r = vec![0.0; problem.n()];
    let mut next_s = vec![0.0; p];
    let mut next_r_s = vec![0.0; problem.n()];

    let mut trace = IterationTrace::new(Some(TraceMeta {
        variant: config.variant,
        lambda,
    }));
    let mut history = config.record_iterates.then(History::default);
    let mut row_alpha: Option<f64> = None;
    let mut status = Status::MaxSweeps;
    let mut f_beta = f_s;
    let mut sweeps = 0;

    for k in 1..=config.max_sweeps {
        sweeps = k;
        beta.copy_from_slice(&s);
        r.copy_from_slice(&r_s);
        sweep_in_place(problem, &mut beta, &mut r, k)?;
        if k % RESIDUAL_REFRESH_PERIOD == 0 {
            r = residual(problem, &beta)?;
        }
        f_beta = objective_from_residual(&r, &beta, lambda);
        debug_assert!(
            f_beta <= f_s + slack(f_s),
            "sweep {k} increased the objective: {f_s} -> {f_beta}"
        );
        let step = dist2(&beta, &beta_prev);

        if let Some(h) = history.as_mut() {
            h.search_points.push(s.clone());
            h.betas.push(beta.clone());
        }
        if config.trace {
            trace.rows.push(TraceRow {
                k,
                f: f_beta,
                alpha: row_alpha,
                step_norm: step,
                sparsity: sparsity(&beta),
            });
        }

        let stop = if beta == s {
            Some(StopReason::FixedPoint)
        } else if config.target_objective.is_some_and(|t| f_beta <= t) {
            Some(StopReason::TargetObjective)
        } else if config.step_tol.is_some_and(|t| step <= t) {
            Some(StopReason::StepTolerance)
        } else {
            None
        };
        if let Some(reason) = stop {
            status = Status::Converged(reason);
            break;
        }
        if k == config.max_sweeps {
            break;
        }

        match scheme {
            None => {
                s.copy_from_slice(&beta);
                r_s.copy_from_slice(&r);
                f_s = f_beta;
            }
            Some(scheme) => {
                let (h, r_h, f_h) = match scheme {
                    RayScheme::Chain => (&s, &r_s, f_s),
                    RayScheme::Triangle => (&beta_prev, &r_prev, f_prev),
                };
                let skip = config.unit_refinement
                    || f_h - f_beta <= SKIP_REFINEMENT_RTOL * f_h.abs();
                let alpha = if skip {
                    1.0
                } else {
                    let input = RefinementInput::new(h, &beta, r_h, &r, lambda)?;
                    match minimize_g(&input, config.refine_method) {
                        Ok(a) => a,
                        Err(Error::DegenerateRefinement(msg)) => {
                            log::debug!("sweep {k}: refinement skipped ({msg})");
                            1.0
                        }
                        Err(e) => return Err(e),
                    }
                };
                if alpha == 1.0 {
                    next_s.copy_from_slice(&beta);
                    next_r_s.copy_from_slice(&r);
                } else {
                    search_point_into(h, &beta, alpha, &mut next_s);
                    search_point_into(r_h, &r, alpha, &mut next_r_s);
                }
                if k % RESIDUAL_REFRESH_PERIOD == 0 {
                    next_r_s = residual(problem, &next_s)?;
                }
                let f_next = objective_from_residual(&next_r_s, &next_s, lambda);
                debug_assert!(
                    f_next <= f_beta + slack(f_beta),
                    "refinement after sweep {k} increased the objective: {f_beta} -> {f_next}"
                );
                debug_assert!(
                    skip || !(f_h > f_beta) || alpha > 0.0,
                    "non-positive refinement factor {alpha} after sweep {k}"
                );
                if let Some(hist) = history.as_mut() {
                    hist.refinements.push(RefinementRecord {
                        k,
                        f_history: f_h,
                        f_beta,
                        f_search: f_next,
                        alpha,
                        skipped: skip,
                    });
                }
                std::mem::swap(&mut s, &mut next_s);
                std::mem::swap(&mut r_s, &mut next_r_s);
                f_s = f_next;
                row_alpha = Some(alpha);
            }
        }
        std::mem::swap(&mut beta_prev, &mut beta);
        std::mem::swap(&mut r_prev, &mut r);
        f_prev = f_beta;
    }

    Ok(SolveOutcome {
        beta,
        objective: f_beta,
        sweeps,
        status,
        lambda,
        trace,
        history,
    })
}
