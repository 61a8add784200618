//! Eigenvalues of a dense real nonsymmetric matrix: diagonal balancing,
//! Householder reduction to upper Hessenberg form and the Francis
//! double-shift QR iteration.

use num_complex::Complex64;

use super::SquareMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub balance: bool,
    /// QR iterations allowed per deflated eigenvalue.
    pub max_iter_per_eigenvalue: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            balance: true,
            max_iter_per_eigenvalue: 60,
        }
    }
}

/// All eigenvalues of `m`, sorted by magnitude, then real part, then
/// imaginary part.
pub fn eigenvalues(m: &SquareMatrix) -> Result<Vec<Complex64>> {
    eigenvalues_with(m, EigenOptions::default())
}

pub fn eigenvalues_with(m: &SquareMatrix, opts: EigenOptions) -> Result<Vec<Complex64>> {
    let n = m.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFailure("matrix has non-finite entries".into()));
    }
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    if opts.balance {
        balance(&mut a);
    }
    hessenberg(&mut a);
    let mut eig = hessenberg_qr(&mut a, opts.max_iter_per_eigenvalue)?;
    eig.sort_by(|x, y| {
        x.norm()
            .total_cmp(&y.norm())
            .then(x.re.total_cmp(&y.re))
            .then(x.im.total_cmp(&y.im))
    });
    Ok(eig)
}

/// Scales rows and columns by powers of two so their off-diagonal norms are
/// comparable. A similarity transform, so the spectrum is unchanged.
fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let n = a.len();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[i][j] *= g;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    let high = n - 1;
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| a[i][m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (m..=high).rev() {
            ort[i] = a[i][m - 1] / scale;
            h += ort[i] * ort[i];
        }
        let g = if ort[m] > 0.0 { -h.sqrt() } else { h.sqrt() };
        h -= ort[m] * g;
        ort[m] -= g;

        // (I - u u^T / h) A
        for j in m..n {
            let f = (m..=high).rev().map(|i| ort[i] * a[i][j]).sum::<f64>() / h;
            for i in m..=high {
                a[i][j] -= f * ort[i];
            }
        }
        // A (I - u u^T / h)
        for row in a.iter_mut().take(high + 1) {
            let f = (m..=high).rev().map(|j| ort[j] * row[j]).sum::<f64>() / h;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        a[m][m - 1] = scale * g;
        for row in a.iter_mut().skip(m + 1) {
            row[m - 1] = 0.0;
        }
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix. Destroys `a`.
fn hessenberg_qr(a: &mut [Vec<f64>], max_iter: usize) -> Result<Vec<Complex64>> {
    let n = a.len();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }

    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // Look for a negligible subdiagonal element.
            let mut l = nu;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                // One real root.
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                // A 2x2 block: two real roots or a conjugate pair.
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its >= max_iter {
                return Err(Error::NumericFailure(format!(
                    "QR iteration did not deflate eigenvalue {nu} within {max_iter} iterations"
                )));
            }
            if its > 0 && its % 10 == 0 {
                // Exceptional shift.
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // Form the shift and look for two consecutive small subdiagonals.
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }

            // Double QR step on rows l..=nu and columns m..=nu.
            let mut xk = 0.0;
            for k in m..nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k != nu - 1 { a[k + 2][k - 1] } else { 0.0 };
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[k][k - 1] = -a[k][k - 1];
                    }
                } else {
                    a[k][k - 1] = -s * xk;
                }
                p += s;
                let xx = p / s;
                let yy = q / s;
                let zz = r / s;
                q /= p;
                r /= p;
                for j in k..=nu {
                    let mut pp = a[k][j] + q * a[k + 1][j];
                    if k != nu - 1 {
                        pp += r * a[k + 2][j];
                        a[k + 2][j] -= pp * zz;
                    }
                    a[k + 1][j] -= pp * yy;
                    a[k][j] -= pp * xx;
                }
                let mmin = if nu < k + 3 { nu } else { k + 3 };
                for row in a.iter_mut().take(mmin + 1).skip(l) {
                    let mut pp = xx * row[k] + yy * row[k + 1];
                    if k != nu - 1 {
                        pp += zz * row[k + 2];
                        row[k + 2] -= pp * r;
                    }
                    row[k + 1] -= pp * q;
                    row[k] -= pp;
                }
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn identity_is_all_ones() {
        let eig = eigenvalues(&SquareMatrix::identity(6)).unwrap();
        assert!(eig.iter().all(|e| close(*e, Complex64::new(1.0, 0.0), 1e-14)));
    }

    #[test]
    fn companion_of_z2_minus_1() {
        let m = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let eig = eigenvalues(&m).unwrap();
        assert!(close(eig[0], Complex64::new(-1.0, 0.0), 1e-14));
        assert!(close(eig[1], Complex64::new(1.0, 0.0), 1e-14));
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let m = SquareMatrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let eig = eigenvalues(&m).unwrap();
        assert!(close(eig[0], Complex64::new(0.0, -1.0), 1e-14));
        assert!(close(eig[1], Complex64::new(0.0, 1.0), 1e-14));
    }

    #[test]
    fn companion_of_cubic() {
        // roots 1, 2, 3: z^3 - 6 z^2 + 11 z - 6
        let m = SquareMatrix::from_rows(&[
            vec![6.0, -11.0, 6.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let eig = eigenvalues(&m).unwrap();
        for (e, want) in eig.iter().zip([1.0, 2.0, 3.0]) {
            assert!(close(*e, Complex64::new(want, 0.0), 1e-10), "{eig:?}");
        }
    }

    #[test]
    fn upper_triangular_reads_diagonal() {
        let m = SquareMatrix::from_rows(&[
            vec![0.5, 7.0, -3.0, 1.0],
            vec![0.0, -2.0, 4.0, 2.0],
            vec![0.0, 0.0, 3.0, 9.0],
            vec![0.0, 0.0, 0.0, 0.25],
        ])
        .unwrap();
        let eig = eigenvalues(&m).unwrap();
        let want = [0.25, 0.5, -2.0, 3.0];
        for (e, w) in eig.iter().zip(want) {
            assert!(close(*e, Complex64::new(w, 0.0), 1e-12), "{eig:?}");
        }
    }

    #[test]
    fn trace_and_determinant_are_preserved() {
        let m = SquareMatrix::from_rows(&[
            vec![4.0, -2.0, 1.0, 0.5, 3.0],
            vec![1.0, 3.0, -1.0, 2.0, 0.0],
            vec![0.0, 2.0, 5.0, -3.0, 1.0],
            vec![2.0, 1.0, 0.5, 1.0, -2.0],
            vec![-1.0, 0.0, 2.0, 1.0, 6.0],
        ])
        .unwrap();
        let eig = eigenvalues(&m).unwrap();
        let tr: Complex64 = eig.iter().sum();
        let want_tr: f64 = (0..5).map(|i| m.get(i, i)).sum();
        assert!((tr.re - want_tr).abs() < 1e-10 && tr.im.abs() < 1e-10);
        let det: Complex64 = eig.iter().product();
        let want_det = m.determinant();
        assert!((det.re - want_det).abs() < 1e-9 * want_det.abs().max(1.0));
    }
}
