//! Lasso solvers: cyclic coordinate descent and its successive ray
//! refinement accelerations, the chain scheme (SRRC) and the triangle
//! scheme (SRRT).
//!
//! ```
//! use srr_lasso::{fixtures::demo_problem, solve, SolverConfig, Variant};
//!
//! let problem = demo_problem(0.0);
//! let config = SolverConfig::new(Variant::Srrc).with_step_tol(None).with_target(Some(1e-8));
//! let out = solve(&problem, &config).unwrap();
//! assert_eq!(out.sweeps, 16);
//! ```

pub mod bench;
pub mod cd;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod refine;
pub mod solver;
pub mod spectral;
pub mod srr;
pub mod trace;

pub use cd::{cd_sweep, ray_alpha_estimate, solve_cd};
pub use error::{Error, Result};
pub use linalg::{objective, residual, shrinkage, DesignMatrix, Problem, SolverState};
pub use refine::{minimize_g, RefinementInput};
pub use solver::{solve, RefineMethod, SolveOutcome, SolverConfig, Status, StopReason, Variant};
pub use srr::{search_point, solve_srrc, solve_srrt};
pub use trace::{IterationTrace, TraceMeta, TraceRow};
