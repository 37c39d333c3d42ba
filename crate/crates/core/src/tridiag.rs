//! Implicit-shift QL eigensolver for real symmetric tridiagonal matrices.
//!
//! Independent verification oracle for the dual Hahn spectral path; kept
//! free of any dependency on the polynomial code.

use nalgebra::DMatrix;

use crate::error::{FwmError, Result};

const MAX_SWEEPS: usize = 50;

/// Eigendecomposition of a symmetric tridiagonal matrix given by its
/// diagonal and off-diagonal. Returns (eigenvalues ascending, matrix of
/// column eigenvectors in the same order).
pub fn eigh_tridiagonal(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = diag.len();
    assert_eq!(offdiag.len(), n.saturating_sub(1));
    let mut d = diag.to_vec();
    // e is padded so e[l] is the subdiagonal below row l
    let mut e: Vec<f64> = offdiag.to_vec();
    e.push(0.0);
    let mut z = DMatrix::<f64>::identity(n, n);

    for l in 0..n {
        let mut iter = 0usize;
        loop {
            // find a small off-diagonal element
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(FwmError::NoConvergence(MAX_SWEEPS));
            }
            // implicit shift from the 2x2 block at l
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // accumulate the rotation into the eigenvector matrix
                for k in 0..n {
                    f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // sort ascending, carrying eigenvectors along
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vecs = DMatrix::<f64>::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vecs.set_column(j, &z.column(i));
    }
    Ok((vals, vecs))
}

/// Eigendecomposition of a dense symmetric matrix, accepted when it is
/// tridiagonal and symmetric within 1e-12 of its largest entry.
pub fn eigh_symmetric_tridiagonal_matrix(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let scale = m.amax().max(1.0);
    for i in 0..n {
        for j in 0..n {
            let expect_zero = (i as i64 - j as i64).abs() > 1;
            if expect_zero && m[(i, j)].abs() > 1e-12 * scale {
                return Err(FwmError::NumericalInstability(format!(
                    "matrix is not tridiagonal at ({i}, {j})"
                )));
            }
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(FwmError::NumericalInstability(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    let off: Vec<f64> = (0..n - 1).map(|i| 0.5 * (m[(i, i + 1)] + m[(i + 1, i)])).collect();
    eigh_tridiagonal(&diag, &off)
}

/// Largest residual ||M v - lambda v||_2 over all eigenpairs.
pub fn residual(diag: &[f64], offdiag: &[f64], vals: &[f64], vecs: &DMatrix<f64>) -> f64 {
    let n = diag.len();
    let mut worst = 0.0f64;
    for j in 0..n {
        let v = vecs.column(j);
        let mut res = 0.0f64;
        for i in 0..n {
            let mut mv = diag[i] * v[i];
            if i > 0 {
                mv += offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                mv += offdiag[i] * v[i + 1];
            }
            res += (mv - vals[j] * v[i]).powi(2);
        }
        worst = worst.max(res.sqrt());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two_by_hand() {
        let (vals, _) = eigh_tridiagonal(&[1.0, 1.0], &[1.0]).unwrap();
        assert_relative_eq!(vals[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_input_sorted() {
        let (vals, _) = eigh_tridiagonal(&[3.0, -1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn random_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let n = rng.gen_range(2..=200);
            let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let off: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let (vals, vecs) = eigh_tridiagonal(&diag, &off).unwrap();
            let norm: f64 = diag
                .iter()
                .chain(off.iter())
                .fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(residual(&diag, &off, &vals, &vecs) <= 1e-10 * norm.max(1.0) * n as f64);
            for w in vals.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let (_, vecs) = eigh_tridiagonal(&diag, &off).unwrap();
        let gram = vecs.transpose() * &vecs;
        for i in 0..n {
            for j in 0..n {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - t).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn rejects_non_tridiagonal() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 5.0, 0.0, 1.0, 0.0, 5.0, 0.0, 1.0]);
        assert!(eigh_symmetric_tridiagonal_matrix(&m).is_err());
    }
}
