//! Iteration-count benchmark over a grid of regularization ratios.
//!
//! For each problem instance and ratio `r`, plain coordinate descent runs with
//! `lambda = r ||X^T y||_inf` until `||beta^k - beta^{k-1}||_2 <= cd_step_tol`.
//! Its final objective `f*` then becomes the target for the refined variants,
//! which run until `f(beta^k) <= f*`. Synthetic sources are averaged over
//! seeds `base_seed, base_seed + 1, ...`; file sources are a single instance.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::synth::{synth, SyntheticSpec};
use crate::linalg::{DesignMatrix, Problem};
use crate::solver::{solve, RefineMethod, SolverConfig, Status, StopReason, Variant};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchProtocol {
    pub ratios: Vec<f64>,
    pub cd_step_tol: f64,
    /// Synthetic instances per cell. Ignored for file sources.
    pub repeats: usize,
    /// Variants to report. Coordinate descent always runs, since it sets the
    /// target objective.
    pub variants: Vec<Variant>,
    pub max_sweeps: usize,
    pub refine_method: RefineMethod,
}

impl Default for BenchProtocol {
    fn default() -> Self {
        BenchProtocol {
            ratios: vec![0.5, 0.1, 0.05, 0.01],
            cd_step_tol: 1e-6,
            repeats: 10,
            variants: Variant::ALL.to_vec(),
            max_sweeps: 1_000_000,
            refine_method: RefineMethod::Auto,
        }
    }
}

impl BenchProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.ratios.is_empty() {
            return Err(Error::InvalidArgument("no ratios given".into()));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(Error::InvalidArgument(format!("ratio {r} is outside (0, 1]")));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidArgument("repeats must be at least 1".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidArgument("no variants given".into()));
        }
        if !(self.cd_step_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step tolerance must be positive, got {}",
                self.cd_step_tol
            )));
        }
        Ok(())
    }
}

/// `r ||X^T y||_inf`.
pub fn lambda_from_ratio(x: &DesignMatrix, y: &[f64], r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ratio must be finite and nonnegative, got {r}"
        )));
    }
    let xty = x.tr_mul_vec(y)?;
    Ok(r * xty.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

#[derive(Debug, Clone)]
pub enum ProblemSource {
    Synthetic { n: usize, p: usize, base_seed: u64 },
    Data { name: String, x: DesignMatrix, y: Vec<f64> },
}

impl ProblemSource {
    pub fn describe(&self, repeats: usize) -> String {
        match self {
            ProblemSource::Synthetic { n, p, base_seed } => format!(
                "synthetic n={n} p={p} seeds={base_seed}..={}",
                base_seed + repeats as u64 - 1
            ),
            ProblemSource::Data { name, x, .. } => {
                format!("{name} n={} p={} (single instance, repeats=1)", x.n(), x.p())
            }
        }
    }

    fn instances(&self, repeats: usize) -> Result<Vec<(Option<u64>, DesignMatrix, Vec<f64>)>> {
        match self {
            ProblemSource::Synthetic { n, p, base_seed } => (0..repeats as u64)
                .into_par_iter()
                .map(|i| {
                    let seed = base_seed + i;
                    let (x, y) = synth(&SyntheticSpec { n: *n, p: *p, seed })?;
                    Ok((Some(seed), x, y))
                })
                .collect(),
            ProblemSource::Data { x, y, .. } => Ok(vec![(None, x.clone(), y.clone())]),
        }
    }
}

/// One solver run inside the benchmark.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRun {
    pub ratio: f64,
    pub lambda: f64,
    pub instance: usize,
    pub seed: Option<u64>,
    pub variant: Variant,
    pub sweeps: usize,
    pub objective: f64,
    pub sparsity: f64,
    pub converged: bool,
}

/// Averages of one `(ratio, variant)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchCell {
    pub ratio: f64,
    pub variant: Variant,
    pub mean_sweeps: f64,
    pub mean_sparsity: f64,
    pub runs: usize,
    /// Runs that hit the sweep limit.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub source: String,
    pub protocol_ratios: Vec<f64>,
    pub variants: Vec<Variant>,
    pub runs: Vec<BenchRun>,
    pub cells: Vec<BenchCell>,
}

impl BenchReport {
    pub fn cell(&self, ratio: f64, variant: Variant) -> Option<&BenchCell> {
        self.cells
            .iter()
            .find(|c| c.ratio == ratio && c.variant == variant)
    }

    /// Sweep counts per instance for one cell, in instance order.
    pub fn sweeps(&self, ratio: f64, variant: Variant) -> Vec<usize> {
        self.runs
            .iter()
            .filter(|r| r.ratio == ratio && r.variant == variant)
            .map(|r| r.sweeps)
            .collect()
    }
}

/// Runs the protocol on up to `jobs` threads. The report does not depend on
/// `jobs` or on scheduling.
pub fn run_bench(source: &ProblemSource, protocol: &BenchProtocol, jobs: usize) -> Result<BenchReport> {
    protocol.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_bench_inner(source, protocol))
}

type CellKey = (usize, usize);

fn run_bench_inner(source: &ProblemSource, protocol: &BenchProtocol) -> Result<BenchReport> {
    let repeats = match source {
        ProblemSource::Synthetic { .. } => protocol.repeats,
        ProblemSource::Data { .. } => 1,
    };
    let instances = source.instances(repeats)?;
    let units: Vec<CellKey> = (0..protocol.ratios.len())
        .flat_map(|ri| (0..instances.len()).map(move |ii| (ri, ii)))
        .collect();
    let results: Vec<(CellKey, Vec<BenchRun>)> = units
        .into_par_iter()
        .map(|(ri, ii)| {
            let (seed, x, y) = &instances[ii];
            let runs = run_unit(protocol, protocol.ratios[ri], ii, *seed, x, y)?;
            Ok(((ri, ii), runs))
        })
        .collect::<Result<_>>()?;
    let merged: BTreeMap<CellKey, Vec<BenchRun>> = results.into_iter().collect();

    let mut runs = Vec::new();
    for unit in merged.into_values() {
        runs.extend(unit);
    }
    let mut cells = Vec::new();
    for &ratio in &protocol.ratios {
        for &variant in &protocol.variants {
            let sel: Vec<&BenchRun> = runs
                .iter()
                .filter(|r| r.ratio == ratio && r.variant == variant)
                .collect();
            let n = sel.len() as f64;
            cells.push(BenchCell {
                ratio,
                variant,
                mean_sweeps: sel.iter().map(|r| r.sweeps as f64).sum::<f64>() / n,
                mean_sparsity: sel.iter().map(|r| r.sparsity).sum::<f64>() / n,
                runs: sel.len(),
                failures: sel.iter().filter(|r| !r.converged).count(),
            });
        }
    }
    runs.retain(|r| protocol.variants.contains(&r.variant));
    Ok(BenchReport {
        source: source.describe(repeats),
        protocol_ratios: protocol.ratios.clone(),
        variants: protocol.variants.clone(),
        runs,
        cells,
    })
}

fn run_unit(
    protocol: &BenchProtocol,
    ratio: f64,
    instance: usize,
    seed: Option<u64>,
    x: &DesignMatrix,
    y: &[f64],
) -> Result<Vec<BenchRun>> {
    let lambda = lambda_from_ratio(x, y, ratio)?;
    let problem = Problem::new(x.clone(), y.to_vec(), lambda)?;
    let base = SolverConfig {
        trace: false,
        max_sweeps: protocol.max_sweeps,
        refine_method: protocol.refine_method,
        ..SolverConfig::new(Variant::Cd)
    };
    let cd = solve(&problem, &base.clone().with_step_tol(Some(protocol.cd_step_tol)))?;
    if !cd.converged() {
        log::warn!("ratio {ratio}, instance {instance}: CD hit the sweep limit");
    }
    let record = |variant, out: &crate::solver::SolveOutcome| BenchRun {
        ratio,
        lambda,
        instance,
        seed,
        variant,
        sweeps: out.sweeps,
        objective: out.objective,
        sparsity: out.sparsity(),
        converged: out.converged(),
    };
    let mut runs = vec![record(Variant::Cd, &cd)];
    for &variant in protocol.variants.iter().filter(|v| **v != Variant::Cd) {
        let cfg = SolverConfig {
            variant,
            ..base.clone()
        }
        .with_step_tol(None)
        .with_target(Some(cd.objective));
        let out = solve(&problem, &cfg)?;
        if out.status == Status::Converged(StopReason::TargetObjective) {
            assert!(out.objective <= cd.objective);
        } else {
            log::warn!(
                "ratio {ratio}, instance {instance}: {variant} stopped with {:?} at f = {}, target {}",
                out.status,
                out.objective,
                cd.objective
            );
        }
        runs.push(record(variant, &out));
    }
    Ok(runs)
}

/// Human-readable table: one line per ratio, mean sweeps per variant and the
/// mean sparsity of the coordinate descent solution.
pub fn render_table(report: &BenchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {}", report.source);
    let _ = write!(s, "{:>8}", "ratio");
    for v in &report.variants {
        let _ = write!(s, " {:>10}", v.as_str());
    }
    let _ = writeln!(s, " {:>9}", "sparsity");
    for &ratio in &report.protocol_ratios {
        let _ = write!(s, "{ratio:>8}");
        for &v in &report.variants {
            match report.cell(ratio, v) {
                Some(c) if c.failures > 0 => {
                    let _ = write!(s, " {:>9.1}*", c.mean_sweeps);
                }
                Some(c) => {
                    let _ = write!(s, " {:>10.1}", c.mean_sweeps);
                }
                None => {
                    let _ = write!(s, " {:>10}", "-");
                }
            }
        }
        let sparsity = report
            .runs
            .iter()
            .filter(|r| r.ratio == ratio && r.variant == Variant::Cd)
            .map(|r| r.sparsity)
            .collect::<Vec<_>>();
        if sparsity.is_empty() {
            let _ = writeln!(s, " {:>9}", "-");
        } else {
            let mean = sparsity.iter().sum::<f64>() / sparsity.len() as f64;
            let _ = writeln!(s, " {mean:>9.4}");
        }
    }
    if report.cells.iter().any(|c| c.failures > 0) {
        let _ = writeln!(s, "* some runs hit the sweep limit");
    }
    s
}

/// One CSV line per run, preceded by a `#` line naming the source.
pub fn write_runs_csv<W: Write>(report: &BenchReport, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# {}", report.source)?;
    writeln!(w, "ratio,lambda,instance,seed,variant,sweeps,objective,sparsity,converged")?;
    for r in &report.runs {
        writeln!(
            w,
            "{},{:.16e},{},{},{},{},{:.16e},{:.16e},{}",
            r.ratio,
            r.lambda,
            r.instance,
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.variant,
            r.sweeps,
            r.objective,
            r.sparsity,
            r.converged
        )?;
    }
    Ok(())
}

pub fn write_runs_csv_file(report: &BenchReport, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_runs_csv(report, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::demo_problem;

    #[test]
    fn ratio_zero_is_zero() {
        let p = demo_problem(0.0);
        assert_eq!(lambda_from_ratio(p.x(), p.y(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn ratio_half_matches_matvec() {
        let p = demo_problem(0.0);
        let want = (0..5)
            .map(|j| {
                (0..5)
                    .map(|i| p.x().get(i, j) * p.y()[i])
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max);
        let got = lambda_from_ratio(p.x(), p.y(), 0.5).unwrap();
        assert!((got - 0.5 * want).abs() <= 1e-15 * want);
    }

    #[test]
    fn ratio_one_leaves_zero() {
        let p0 = demo_problem(0.0);
        let lam = lambda_from_ratio(p0.x(), p0.y(), 1.0).unwrap();
        let p = p0.with_lambda(lam).unwrap();
        let (b, _) = crate::cd::cd_sweep(&p, &[0.0; 5], p.y()).unwrap();
        assert!(b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn protocol_validation() {
        let mut p = BenchProtocol::default();
        assert!(p.validate().is_ok());
        p.ratios = vec![1.5];
        assert!(p.validate().is_err());
        p.ratios = vec![0.5];
        p.repeats = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn small_synthetic_bench_is_job_independent() {
        let src = ProblemSource::Synthetic {
            n: 30,
            p: 20,
            base_seed: 5,
        };
        let proto = BenchProtocol {
            ratios: vec![0.5, 0.1],
            repeats: 3,
            ..Default::default()
        };
        let a = run_bench(&src, &proto, 1).unwrap();
        let b = run_bench(&src, &proto, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(render_table(&a), render_table(&b));
        assert_eq!(a.runs.len(), 2 * 3 * 3);
        for r in a.runs.iter().filter(|r| r.variant != Variant::Cd) {
            let cd = a
                .runs
                .iter()
                .find(|c| c.variant == Variant::Cd && c.ratio == r.ratio && c.instance == r.instance)
                .unwrap();
            assert!(r.objective <= cd.objective);
        }
    }

    #[test]
    fn data_source_is_single_instance() {
        let p = demo_problem(0.0);
        let src = ProblemSource::Data {
            name: "demo".into(),
            x: p.x().clone(),
            y: p.y().to_vec(),
        };
        let report = run_bench(&src, &BenchProtocol::default(), 2).unwrap();
        assert!(report.runs.iter().all(|r| r.instance == 0 && r.seed.is_none()));
        assert!(report.source.contains("repeats=1"));
    }
}
