//! Dense primitives shared by every solver: the design matrix, the Lasso
//! objective, the shrinkage operator and residual bookkeeping.
//!
//! The design matrix is stored column-major because coordinate descent
//! streams one column at a time.

use crate::error::{check_len, Error, Result};

/// Residuals are fully recomputed every this many sweeps, regardless of drift.
pub const RESIDUAL_REFRESH_PERIOD: usize = 50;

/// Dense `n x p` matrix with cached squared column norms.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
    col_norm_sq: Vec<f64>,
}

impl DesignMatrix {
    /// Builds a matrix from column-major values. Rejects zero columns and
    /// non-finite entries.
    pub fn from_column_major(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidArgument(format!(
                "design matrix must be non-empty, got {n} x {p}"
            )));
        }
        check_len("design matrix values", n * p, values.len())?;
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite entry at row {}, column {}",
                pos % n,
                pos / n
            )));
        }
        let col_norm_sq: Vec<f64> = values.chunks_exact(n).map(|c| dot(c, c)).collect();
        if let Some(j) = col_norm_sq.iter().position(|&v| v == 0.0) {
            return Err(Error::ZeroColumn(j));
        }
        Ok(DesignMatrix {
            n,
            p,
            values,
            col_norm_sq,
        })
    }

    /// Builds a matrix from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut values = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::RaggedRow {
                    line: i + 1,
                    expected: p,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                values[j * n + i] = v;
            }
        }
        Self::from_column_major(n, p, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn col_norm_sq(&self) -> &[f64] {
        &self.col_norm_sq
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    /// `X * beta`.
    pub fn mul_vec(&self, beta: &[f64]) -> Result<Vec<f64>> {
        check_len("coefficient vector", self.p, beta.len())?;
        let mut out = vec![0.0; self.n];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                axpy(b, self.column(j), &mut out);
            }
        }
        Ok(out)
    }

    /// `X^T * v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("sample vector", self.n, v.len())?;
        Ok((0..self.p).map(|j| dot(self.column(j), v)).collect())
    }

    /// Returns a copy with every column scaled to unit Euclidean norm, plus
    /// the original column norms.
    pub fn normalized_columns(&self) -> (DesignMatrix, Vec<f64>) {
        let norms: Vec<f64> = self.col_norm_sq.iter().map(|v| v.sqrt()).collect();
        let mut values = self.values.clone();
        for (col, &norm) in values.chunks_exact_mut(self.n).zip(&norms) {
            col.iter_mut().for_each(|v| *v /= norm);
        }
        let col_norm_sq = values.chunks_exact(self.n).map(|c| dot(c, c)).collect();
        (
            DesignMatrix {
                n: self.n,
                p: self.p,
                values,
                col_norm_sq,
            },
            norms,
        )
    }
}

/// A Lasso instance: `min 1/2 ||X beta - y||^2 + lambda ||beta||_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    x: DesignMatrix,
    y: Vec<f64>,
    lambda: f64,
}

impl Problem {
    pub fn new(x: DesignMatrix, y: Vec<f64>, lambda: f64) -> Result<Self> {
        check_len("response", x.n(), y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite response entry".into()));
        }
        check_lambda(lambda)?;
        Ok(Problem { x, y, lambda })
    }

    /// Same data, different regularization.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Problem {
            x: self.x.clone(),
            y: self.y.clone(),
            lambda,
        })
    }

    pub fn x(&self) -> &DesignMatrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn p(&self) -> usize {
        self.x.p()
    }

    /// Largest tolerated deviation between a cached and a recomputed residual:
    /// `1e-8 * (1 + ||y||_2)`.
    pub fn drift_tol(&self) -> f64 {
        1e-8 * (1.0 + norm2(&self.y))
    }

    /// `||X^T y||_inf`, the smallest lambda for which zero is optimal.
    pub fn lambda_max(&self) -> f64 {
        (0..self.p())
            .map(|j| dot(self.x.column(j), &self.y).abs())
            .fold(0.0, f64::max)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )))
    }
}

/// Iterate, search point and their residuals for one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub beta: Vec<f64>,
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub r_s: Vec<f64>,
    pub sweep: usize,
}

impl SolverState {
    /// `beta = s = 0`, both residuals equal to `y`.
    pub fn zero(problem: &Problem) -> Self {
        SolverState {
            beta: vec![0.0; problem.p()],
            s: vec![0.0; problem.p()],
            r: problem.y().to_vec(),
            r_s: problem.y().to_vec(),
            sweep: 0,
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four independent accumulators; the summation order is fixed, so results
    // are reproducible run to run.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `||a - b||_2`
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Soft-thresholding: moves `x` toward zero by `threshold`, clamping to zero
/// inside `[-threshold, threshold]`.
#[inline]
pub fn shrinkage(x: f64, threshold: f64) -> f64 {
    debug_assert!(threshold >= 0.0);
    if x > threshold {
        x - threshold
    } else if x < -threshold {
        x + threshold
    } else {
        0.0
    }
}

/// `1/2 ||X beta - y||^2 + lambda ||beta||_1`, evaluated from scratch.
pub fn objective(problem: &Problem, beta: &[f64]) -> Result<f64> {
    let r = residual(problem, beta)?;
    Ok(objective_from_residual(&r, beta, problem.lambda()))
}

/// Objective given an already known residual `y - X beta`.
#[inline]
pub fn objective_from_residual(r: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let loss = 0.5 * dot(r, r);
    if lambda == 0.0 {
        loss
    } else {
        loss + lambda * norm1(beta)
    }
}

/// `y - X beta`
pub fn residual(problem: &Problem, beta: &[f64]) -> Result<Vec<f64>> {
    let xb = problem.x().mul_vec(beta)?;
    Ok(problem.y().iter().zip(&xb).map(|(y, v)| y - v).collect())
}

/// Compares the cached residuals of `beta` and `s` against recomputed ones and
/// replaces any that drifted by more than [`Problem::drift_tol`] in the
/// infinity norm. The flag reports whether anything was replaced.
pub fn drift_check_and_refresh(
    problem: &Problem,
    mut state: SolverState,
) -> Result<(SolverState, bool)> {
    let tol = problem.drift_tol();
    let mut refreshed = false;
    for (point, cached) in [(&state.beta, &mut state.r), (&state.s, &mut state.r_s)] {
        let fresh = residual(problem, point)?;
        check_len("cached residual", fresh.len(), cached.len())?;
        let drift = fresh
            .iter()
            .zip(cached.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if drift > tol || drift.is_nan() {
            *cached = fresh;
            refreshed = true;
        }
    }
    Ok((state, refreshed))
}

/// Fraction of exactly-zero entries.
pub fn sparsity(beta: &[f64]) -> f64 {
    if beta.is_empty() {
        return 0.0;
    }
    beta.iter().filter(|&&b| b == 0.0).count() as f64 / beta.len() as f64
}
