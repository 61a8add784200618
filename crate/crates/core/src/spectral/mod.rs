//! Spectral view of coordinate descent at `lambda = 0`.
//!
//! With the Gram matrix split as `X^T X = L + D + U`, one sweep is the
//! Gauss-Seidel map `beta -> (L + D)^{-1} (X^T y - U beta)`, whose iteration
//! matrix is `G = -(L + D)^{-1} U`. The eigenvalues of `G` and the per-sweep
//! contraction factors built from them show how the ray refinements shrink
//! each eigendirection faster than plain sweeps do.

pub mod eigen;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, DesignMatrix, Problem};
use crate::solver::History;

pub use eigen::{eigenvalues, eigenvalues_with, EigenOptions};

/// Largest `p` the dense diagnostics accept unless told otherwise.
pub const DEFAULT_MAX_DIM: usize = 512;

/// Slack allowed above 1 when checking `max |delta_i| <= 1`.
pub const SPECTRAL_BOUND_TOL: f64 = 1e-9;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        SquareMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::RaggedRow {
                    line: i + 1,
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(SquareMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("vector", self.dim, v.len())?;
        Ok((0..self.dim).map(|i| dot(self.row(i), v)).collect())
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap_or(k);
            if a[piv * n + k] == 0.0 {
                return 0.0;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a[k * n + k];
            det *= d;
            for i in k + 1..n {
                let m = a[i * n + k] / d;
                if m != 0.0 {
                    for j in k..n {
                        a[i * n + j] -= m * a[k * n + j];
                    }
                }
            }
        }
        det
    }
}

/// `X^T X = L + D + U` with `L` strictly lower, `D` diagonal and `U` strictly
/// upper triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct LduSplit {
    pub lower: SquareMatrix,
    pub diag: Vec<f64>,
    pub upper: SquareMatrix,
}

impl LduSplit {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `L + D + U`.
    pub fn gram(&self) -> SquareMatrix {
        let p = self.dim();
        let mut g = SquareMatrix::zeros(p);
        for i in 0..p {
            for j in 0..p {
                let v = match i.cmp(&j) {
                    std::cmp::Ordering::Greater => self.lower.get(i, j),
                    std::cmp::Ordering::Equal => self.diag[i],
                    std::cmp::Ordering::Less => self.upper.get(i, j),
                };
                g.set(i, j, v);
            }
        }
        g
    }

    /// Solves `(L + D) z = b` by forward substitution.
    fn forward_solve(&self, b: &mut [f64]) {
        for i in 0..self.dim() {
            let row = self.lower.row(i);
            let s: f64 = row[..i].iter().zip(&b[..i]).map(|(l, z)| l * z).sum();
            b[i] = (b[i] - s) / self.diag[i];
        }
    }
}

/// Splits the Gram matrix of `x`, refusing more than [`DEFAULT_MAX_DIM`]
/// columns.
pub fn ldu_split(x: &DesignMatrix) -> Result<LduSplit> {
    ldu_split_capped(x, DEFAULT_MAX_DIM)
}

pub fn ldu_split_capped(x: &DesignMatrix, max_dim: usize) -> Result<LduSplit> {
    let p = x.p();
    if p > max_dim {
        return Err(Error::Unsupported(format!(
            "dense spectral diagnostics are limited to p <= {max_dim}, got p = {p}"
        )));
    }
    let mut lower = SquareMatrix::zeros(p);
    let mut upper = SquareMatrix::zeros(p);
    for i in 0..p {
        for j in 0..i {
            let v = dot(x.column(i), x.column(j));
            lower.set(i, j, v);
            upper.set(j, i, v);
        }
    }
    Ok(LduSplit {
        lower,
        diag: x.col_norm_sq().to_vec(),
        upper,
    })
}

/// `G = -(L + D)^{-1} U`, one forward substitution per column.
pub fn gauss_seidel_matrix(split: &LduSplit) -> SquareMatrix {
    let p = split.dim();
    let mut g = SquareMatrix::zeros(p);
    let mut col = vec![0.0; p];
    for j in 0..p {
        for (i, c) in col.iter_mut().enumerate() {
            *c = -split.upper.get(i, j);
        }
        split.forward_solve(&mut col);
        for (i, &v) in col.iter().enumerate() {
            g.set(i, j, v);
        }
    }
    g
}

/// `(L + D)^{-1} (X^T y - U beta)`: one sweep of coordinate descent at
/// `lambda = 0`.
pub fn gauss_seidel_step(split: &LduSplit, xty: &[f64], beta: &[f64]) -> Result<Vec<f64>> {
    check_len("X^T y", split.dim(), xty.len())?;
    let ub = split.upper.mul_vec(beta)?;
    let mut z: Vec<f64> = xty.iter().zip(&ub).map(|(a, b)| a - b).collect();
    split.forward_solve(&mut z);
    Ok(z)
}

/// `|t_i^k|` for the chain scheme, indexed `[k - 1][i]`.
///
/// `alphas[0]` is the first refinement factor. `t^1 = delta` and
/// `t^k = t^{k-1} sigma^k` with
/// `sigma_i^k = alpha^k (delta_i + (1 - alpha^{k-1}) / alpha^{k-1})`.
/// All factors equal to 1 gives the plain powers `delta_i^k`.
pub fn srrc_factor_products(eigs: &[Complex64], alphas: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(alphas.len());
    if alphas.is_empty() {
        return out;
    }
    let mut t: Vec<Complex64> = eigs.to_vec();
    out.push(t.iter().map(|z| z.norm()).collect());
    for k in 1..alphas.len() {
        let (a, a_prev) = (alphas[k], alphas[k - 1]);
        let shift = (1.0 - a_prev) / a_prev;
        for (ti, &d) in t.iter_mut().zip(eigs) {
            *ti *= (d + shift) * a;
        }
        out.push(t.iter().map(|z| z.norm()).collect());
    }
    out
}

/// `|T_i^k|` for the triangle scheme, indexed `[k - 1][i]`, from
/// `T^0 = 1`, `T^1 = alpha^1 delta` and
/// `T^k = delta ((1 - alpha^{k-1}) T^{k-2} + alpha^k T^{k-1})`.
pub fn srrt_factor_products(eigs: &[Complex64], alphas: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(alphas.len());
    if alphas.is_empty() {
        return out;
    }
    let mut prev: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); eigs.len()];
    let mut cur: Vec<Complex64> = eigs.iter().map(|&d| d * alphas[0]).collect();
    out.push(cur.iter().map(|z| z.norm()).collect());
    for k in 1..alphas.len() {
        let next: Vec<Complex64> = eigs
            .iter()
            .zip(prev.iter().zip(&cur))
            .map(|(&d, (&t2, &t1))| d * (t2 * (1.0 - alphas[k - 1]) + t1 * alphas[k]))
            .collect();
        prev = std::mem::replace(&mut cur, next);
        out.push(cur.iter().map(|z| z.norm()).collect());
    }
    out
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm_of_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn require_smooth(problem: &Problem) -> Result<()> {
    if problem.lambda() != 0.0 {
        return Err(Error::Unsupported(
            "the iterate recursions only hold for lambda = 0".into(),
        ));
    }
    Ok(())
}

/// Largest defect of the triangle-scheme recursion
///
/// ```text
/// beta^2 - beta^1 = alpha^1 G (beta^1 - beta^0)
/// beta^k - beta^{k-1} = G ((1 - alpha^{k-2}) (beta^{k-2} - beta^{k-3})
///                          + alpha^{k-1} (beta^{k-1} - beta^{k-2}))   k >= 3
/// ```
///
/// over a recorded run, with `beta^0 = 0`. Needs at least four iterates.
pub fn srrt_recursion_check(
    problem: &Problem,
    history: &History,
    split: &LduSplit,
) -> Result<f64> {
    require_smooth(problem)?;
    let defects = srrt_recursion_defects(history, split)?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// Per-`k` defects of [`srrt_recursion_check`], starting at `k = 2`.
pub fn srrt_recursion_defects(history: &History, split: &LduSplit) -> Result<Vec<f64>> {
    let p = split.dim();
    let depth = history.betas.len();
    if depth < 4 {
        return Err(Error::InvalidArgument(format!(
            "recursion check needs at least 4 iterates, got {depth}"
        )));
    }
    let alphas = history.alphas();
    if alphas.len() + 1 < depth {
        return Err(Error::InvalidArgument(format!(
            "{depth} iterates but only {} refinement factors",
            alphas.len()
        )));
    }
    let g = gauss_seidel_matrix(split);
    let mut betas: Vec<&[f64]> = Vec::with_capacity(depth + 1);
    let zero = vec![0.0; p];
    betas.push(&zero);
    for b in &history.betas {
        check_len("recorded iterate", p, b.len())?;
        betas.push(b);
    }
    // alpha^j lives at alphas[j - 1].
    let mut out = Vec::with_capacity(depth - 1);
    for k in 2..=depth {
        let lhs = diff(betas[k], betas[k - 1]);
        let v: Vec<f64> = if k == 2 {
            diff(betas[1], betas[0])
                .into_iter()
                .map(|d| alphas[0] * d)
                .collect()
        } else {
            let (a2, a1) = (alphas[k - 3], alphas[k - 2]);
            diff(betas[k - 2], betas[k - 3])
                .into_iter()
                .zip(diff(betas[k - 1], betas[k - 2]))
                .map(|(d2, d1)| (1.0 - a2) * d2 + a1 * d1)
                .collect()
        };
        let rhs = g.mul_vec(&v)?;
        out.push(norm_of_diff(&lhs, &rhs));
    }
    Ok(out)
}

/// Largest defect of the chain-scheme identity
/// `s^k - s^{k-1} = alpha^k (G + (1 - alpha^{k-1}) / alpha^{k-1} I)(s^{k-1} - s^{k-2})`
/// over a recorded run at `lambda = 0`.
pub fn srrc_telescoping_defect(
    problem: &Problem,
    history: &History,
    split: &LduSplit,
) -> Result<f64> {
    require_smooth(problem)?;
    let s = &history.search_points;
    let alphas = history.alphas();
    if s.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "telescoping check needs at least 3 search points, got {}",
            s.len()
        )));
    }
    let g = gauss_seidel_matrix(split);
    let mut worst = 0.0f64;
    for k in 2..s.len() {
        let (a, a_prev) = (alphas[k - 1], alphas[k - 2]);
        let v = diff(&s[k - 1], &s[k - 2]);
        let gv = g.mul_vec(&v)?;
        let shift = (1.0 - a_prev) / a_prev;
        let rhs: Vec<f64> = gv.iter().zip(&v).map(|(x, y)| a * (x + shift * y)).collect();
        worst = worst.max(norm_of_diff(&diff(&s[k], &s[k - 1]), &rhs));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenValue {
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
}

/// Which product recursion a report's `products` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductScheme {
    /// Plain sweeps: powers of the eigenvalues.
    Cd,
    Srrc,
    Srrt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub p: usize,
    pub eigenvalues: Vec<EigenValue>,
    pub max_magnitude: f64,
    /// `max_magnitude <= 1 + SPECTRAL_BOUND_TOL`.
    pub within_bound: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scheme: Option<ProductScheme>,
    /// `products[k - 1][i]` is the magnitude of the sweep-`k` product along
    /// eigenvalue `i` (same order as `eigenvalues`).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub products: Vec<Vec<f64>>,
}

/// Eigenvalues of `G` for `x`, plus the factor products for a sequence of
/// refinement factors when given.
pub fn eigen_report(
    x: &DesignMatrix,
    factors: Option<(ProductScheme, &[f64])>,
    max_dim: usize,
) -> Result<EigenReport> {
    let split = ldu_split_capped(x, max_dim)?;
    let eigs = eigenvalues(&gauss_seidel_matrix(&split))?;
    let max_magnitude = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let products = match factors {
        None => Vec::new(),
        Some((ProductScheme::Cd, a)) => srrc_factor_products(&eigs, &vec![1.0; a.len()]),
        Some((ProductScheme::Srrc, a)) => srrc_factor_products(&eigs, a),
        Some((ProductScheme::Srrt, a)) => srrt_factor_products(&eigs, a),
    };
    Ok(EigenReport {
        p: x.p(),
        eigenvalues: eigs
            .iter()
            .map(|z| EigenValue {
                re: z.re,
                im: z.im,
                magnitude: z.norm(),
            })
            .collect(),
        max_magnitude,
        within_bound: max_magnitude <= 1.0 + SPECTRAL_BOUND_TOL,
        scheme: factors.map(|(s, _)| s),
        products,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cd::cd_sweep;
    use crate::fixtures::demo_problem;

    const DEMO_EIGS: [f64; 5] = [0.0, 0.00219338, 0.12412229, 0.62606165, 0.93956707];

    #[test]
    fn split_reassembles_gram() {
        let p = demo_problem(0.0);
        let split = ldu_split(p.x()).unwrap();
        let gram = split.gram();
        for i in 0..5 {
            for j in 0..5 {
                let want: f64 = (0..5).map(|r| p.x().get(r, i) * p.x().get(r, j)).sum();
                assert!((gram.get(i, j) - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn single_column_split() {
        let x = DesignMatrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
        let split = ldu_split(&x).unwrap();
        assert_eq!(split.diag, vec![25.0]);
        assert_eq!(gauss_seidel_matrix(&split).data(), &[0.0]);
    }

    #[test]
    fn orthogonal_columns_give_zero_iteration_matrix() {
        let x = DesignMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let split = ldu_split(&x).unwrap();
        assert!(split.lower.data().iter().all(|&v| v == 0.0));
        assert!(gauss_seidel_matrix(&split).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ceiling_is_enforced() {
        let x = DesignMatrix::from_rows(&[vec![1.0, 1.0, 1.0]]).unwrap();
        assert!(matches!(ldu_split_capped(&x, 2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn demo_eigenvalues() {
        let p = demo_problem(0.0);
        let g = gauss_seidel_matrix(&ldu_split(p.x()).unwrap());
        let eig = eigenvalues(&g).unwrap();
        for (e, want) in eig.iter().zip(DEMO_EIGS) {
            assert!((e.re - want).abs() < 1e-6 && e.im.abs() < 1e-6, "{eig:?}");
        }
    }

    #[test]
    fn step_matches_a_sweep() {
        let p = demo_problem(0.0);
        let split = ldu_split(p.x()).unwrap();
        let xty = p.x().tr_mul_vec(p.y()).unwrap();
        let beta = vec![0.2, -0.1, 0.4, 0.0, 0.3];
        let r = crate::linalg::residual(&p, &beta).unwrap();
        let (swept, _) = cd_sweep(&p, &beta, &r).unwrap();
        let gs = gauss_seidel_step(&split, &xty, &beta).unwrap();
        for (a, b) in swept.iter().zip(&gs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_factors_give_powers() {
        let eigs = [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.9)];
        let t = srrc_factor_products(&eigs, &[1.0; 4]);
        assert_eq!(t.len(), 4);
        assert!((t[3][0] - 0.5f64.powi(4)).abs() < 1e-15);
        assert!((t[3][1] - 0.9f64.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn triangle_products_with_unit_factors_are_powers() {
        let eigs = [Complex64::new(0.7, 0.0)];
        let t = srrt_factor_products(&eigs, &[1.0; 5]);
        for (k, row) in t.iter().enumerate() {
            assert!((row[0] - 0.7f64.powi(k as i32 + 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn determinant_of_permutation() {
        let m = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(m.determinant(), -1.0);
        assert_eq!(SquareMatrix::identity(3).determinant(), 1.0);
    }

    #[test]
    fn recursion_rejects_lasso() {
        let p = demo_problem(0.1);
        let split = ldu_split(p.x()).unwrap();
        let h = History::default();
        assert!(matches!(
            srrt_recursion_check(&p, &h, &split),
            Err(Error::Unsupported(_))
        ));
    }
}
