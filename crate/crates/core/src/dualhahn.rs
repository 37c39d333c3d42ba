//! Dual Hahn polynomial engine: eigenvalues, polynomial values, norms and
//! the orthogonal sector transition matrix, numerically stable to N ~ 80.
//!
//! All sums and recurrences are carried out in exact big-rational
//! arithmetic (the parameters and eigenvalues are integers), then mapped
//! to f64 through log-magnitudes. This sidesteps the catastrophic
//! cancellation of the terminating 3F2 sum in floating point. The matrix
//! `R` carries the `(-1)^n` gauge so that its columns are literally the
//! eigenvectors of the tridiagonal sector Hamiltonian.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{FwmError, Result};

/// Hard cap on N; double precision degrades beyond this.
pub const MAX_N: u32 = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DualHahnParams {
    pub gamma: u32,
    pub delta: u32,
    pub n: u32,
}

impl DualHahnParams {
    pub fn new(gamma: u32, delta: u32, n: u32) -> Self {
        Self { gamma, delta, n }
    }
}

/// Eigenvalues, norms and transition matrix for one sector.
#[derive(Debug, Clone)]
pub struct SpectralTable {
    /// lambda_k = k(k + gamma + delta + 1), exact integers.
    pub lambdas: Vec<f64>,
    /// Squared norms <lambda_k | lambda_k>.
    pub norms: Vec<f64>,
    /// Orthogonal matrix, R[(n, k)] = (-1)^n norm(k)^{-1/2} R_n(lambda_k).
    pub r: DMatrix<f64>,
    /// The (-1)^n gauge is applied.
    pub signed: bool,
}

impl SpectralTable {
    /// CSV with header `k,lambda,norm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,lambda,norm\n");
        for (k, (l, nrm)) in self.lambdas.iter().zip(&self.norms).enumerate() {
            out.push_str(&format!("{k},{:.16e},{:.16e}\n", l, nrm));
        }
        out
    }

    /// Row-major CSV of the R matrix.
    pub fn r_to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.r.nrows() {
            let row: Vec<String> = (0..self.r.ncols())
                .map(|j| format!("{:.16e}", self.r[(i, j)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// `[k(k + gamma + delta + 1)]` for k = 0..=N, in exact integer arithmetic.
pub fn eigenvalues(p: &DualHahnParams) -> Vec<f64> {
    let s = (p.gamma + p.delta + 1) as u64;
    (0..=p.n as u64).map(|k| (k * (k + s)) as f64).collect()
}

/// Diagonal of the tridiagonal operator: a_n = n(N-n+delta+1) + (N-n)(gamma+n+1).
pub fn diag_coeff(n: u32, p: &DualHahnParams) -> f64 {
    let (nn, g, d) = (p.n as f64, p.gamma as f64, p.delta as f64);
    let x = n as f64;
    x * (nn - x + d + 1.0) + (nn - x) * (g + x + 1.0)
}

/// Off-diagonal: b_n = sqrt((n+1)(N-n)(gamma+n+1)(N-n+delta)), for n < N.
pub fn offdiag_coeff(n: u32, p: &DualHahnParams) -> f64 {
    let (nn, g, d) = (p.n as f64, p.gamma as f64, p.delta as f64);
    let x = n as f64;
    ((x + 1.0) * (nn - x) * (g + x + 1.0) * (nn - x + d)).sqrt()
}

fn check_indices(n: usize, k: usize, p: &DualHahnParams) -> Result<()> {
    let max = p.n as usize;
    if n > max {
        return Err(FwmError::IndexOutOfRange { index: n, max });
    }
    if k > max {
        return Err(FwmError::IndexOutOfRange { index: k, max });
    }
    Ok(())
}

/// ln |x| for a nonzero big integer.
fn big_ln_abs(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 960 {
        return x.magnitude().to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (x.magnitude() >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// (sign, ln|r|) of a nonzero rational; None for zero.
fn rational_sign_ln(r: &BigRational) -> Option<(f64, f64)> {
    if r.is_zero() {
        return None;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    Some((sign, big_ln_abs(r.numer()) - big_ln_abs(r.denom())))
}

#[cfg(test)]
fn rational_to_f64(r: &BigRational) -> f64 {
    match rational_sign_ln(r) {
        None => 0.0,
        Some((sign, ln)) => sign * ln.exp(),
    }
}

fn big_pochhammer(a: i64, k: u32) -> BigInt {
    let mut out = BigInt::one();
    for i in 0..k as i64 {
        out *= BigInt::from(a + i);
    }
    out
}

fn big_factorial(n: u32) -> BigInt {
    big_pochhammer(1, n)
}

fn big_binomial(n: u32, k: u32) -> BigInt {
    debug_assert!(k <= n);
    big_pochhammer(n as i64 - k as i64 + 1, k) / big_factorial(k)
}

/// Squared binomial prefactor C(gamma+n, n) C(delta+N-n, N-n), exact.
fn pref2_big(n: u32, p: &DualHahnParams) -> BigInt {
    big_binomial(p.gamma + n, n) * big_binomial(p.delta + p.n - n, p.n - n)
}

/// The terminating 3F2 sum of R_n(lambda_k), exact.
fn hyper_sum_exact(n: usize, k: usize, p: &DualHahnParams) -> BigRational {
    let s = (p.gamma + p.delta + 1) as i64;
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for j in 0..n.min(k) as i64 {
        let num = BigInt::from((j - n as i64) * (j - k as i64) * (k as i64 + s + j));
        let den = BigInt::from((p.gamma as i64 + 1 + j) * (j - p.n as i64) * (j + 1));
        term *= BigRational::new(num, den);
        sum += &term;
    }
    sum
}

/// Exact squared norm as a ratio of integer factorial products:
/// k! (delta+1)_k (k+s)_{N+1} (N-k)! / (N!^2 (gamma+1)_k (2k+s)),
/// s = gamma + delta + 1.
fn norm_exact(k: u32, p: &DualHahnParams) -> BigRational {
    let s = (p.gamma + p.delta + 1) as i64;
    let num = big_factorial(k)
        * big_pochhammer(p.delta as i64 + 1, k)
        * big_pochhammer(k as i64 + s, p.n + 1)
        * big_factorial(p.n - k);
    let nf = big_factorial(p.n);
    let den = &nf * &nf * big_pochhammer(p.gamma as i64 + 1, k) * BigInt::from(2 * k as i64 + s);
    BigRational::new(num, den)
}

/// R_n(lambda_k) via the terminating 3F2 sum times the square-root
/// binomial prefactor (unsigned paper convention).
pub fn polynomial_value(n: usize, k: usize, p: &DualHahnParams) -> Result<f64> {
    check_indices(n, k, p)?;
    let sum = hyper_sum_exact(n, k, p);
    match rational_sign_ln(&sum) {
        None => Ok(0.0),
        Some((sign, ln_sum)) => {
            let ln_pref = 0.5 * big_ln_abs(&pref2_big(n as u32, p));
            Ok(sign * (ln_pref + ln_sum).exp())
        }
    }
}

/// Same values as [`polynomial_value`], by the forward three-term
/// recurrence seeded at n = 0. The unsigned values satisfy the recurrence
/// with the off-diagonal sign flipped:
/// lambda R_n = -b_{n-1} R_{n-1} + a_n R_n - b_n R_{n+1}.
/// Scaling out the square-root binomial prefactor turns the coefficients
/// into integers, so the recurrence is run exactly and only the final
/// value is rounded to f64.
pub fn polynomial_value_recurrence(n: usize, k: usize, p: &DualHahnParams) -> Result<f64> {
    check_indices(n, k, p)?;
    let sums = column_sums_exact(k as u32, p);
    match rational_sign_ln(&sums[n]) {
        None => Ok(0.0),
        Some((sign, ln_s)) => {
            let ln_pref = 0.5 * big_ln_abs(&pref2_big(n as u32, p));
            Ok(sign * (ln_pref + ln_s).exp())
        }
    }
}

/// Squared norm <lambda_k|lambda_k>.
pub fn norm(k: usize, p: &DualHahnParams) -> Result<f64> {
    check_indices(0, k, p)?;
    let (sign, ln) = rational_sign_ln(&norm_exact(k as u32, p)).expect("norm is positive");
    debug_assert!(sign > 0.0);
    Ok(ln.exp())
}

/// The 3F2 sums S_0..S_N for column k by the exact rational three-term
/// recurrence (the square-root prefactors cancel into integer
/// coefficients):
/// (a_n - lambda) S_n = n(N-n+delta+1) S_{n-1} + (gamma+n+1)(N-n) S_{n+1}.
fn column_sums_exact(k: u32, p: &DualHahnParams) -> Vec<BigRational> {
    let s = (p.gamma + p.delta + 1) as i64;
    let lambda = BigInt::from(k as i64 * (k as i64 + s));
    let (nn, g, d) = (p.n as i64, p.gamma as i64, p.delta as i64);
    let mut out = Vec::with_capacity(p.n as usize + 1);
    out.push(BigRational::one());
    for n in 0..nn {
        let a_n = BigInt::from(n * (nn - n + d + 1) + (nn - n) * (g + n + 1));
        let down = BigInt::from(n * (nn - n + d + 1));
        let up = BigInt::from((g + n + 1) * (nn - n));
        let prev = if n == 0 {
            BigRational::zero()
        } else {
            out[n as usize - 1].clone() * BigRational::from(down)
        };
        let cur = out[n as usize].clone() * BigRational::from(a_n - &lambda);
        out.push((cur - prev) / BigRational::from(up));
    }
    out
}

/// Build the full spectral table. Column k holds the normalized values
/// (-1)^n R_n(lambda_k) / sqrt(norm_k), assembled from exact rationals.
pub fn transition_matrix(p: &DualHahnParams) -> Result<SpectralTable> {
    if p.n > MAX_N {
        return Err(FwmError::NumericalInstability(format!(
            "N = {} exceeds the supported cap {}",
            p.n, MAX_N
        )));
    }
    let dim = p.n as usize + 1;
    let lambdas = eigenvalues(p);
    let ln_pref: Vec<f64> = (0..dim)
        .map(|n| 0.5 * big_ln_abs(&pref2_big(n as u32, p)))
        .collect();
    let mut norms = Vec::with_capacity(dim);
    let mut r = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..dim {
        let nrm = norm_exact(k as u32, p);
        let (_, ln_norm) = rational_sign_ln(&nrm).expect("norm is positive");
        norms.push(ln_norm.exp());
        let sums = column_sums_exact(k as u32, p);
        let mut sumsq = 0.0f64;
        for (n, s) in sums.iter().enumerate() {
            let gauge = if n % 2 == 0 { 1.0 } else { -1.0 };
            let entry = match rational_sign_ln(s) {
                None => 0.0,
                Some((sign, ln_s)) => gauge * sign * (ln_pref[n] + ln_s - 0.5 * ln_norm).exp(),
            };
            r[(n, k)] = entry;
            sumsq += entry * entry;
        }
        if (sumsq.sqrt() - 1.0).abs() > 1e-8 {
            return Err(FwmError::NumericalInstability(format!(
                "column {k} norm deviates by {:e} (N = {})",
                (sumsq.sqrt() - 1.0).abs(),
                p.n
            )));
        }
    }
    Ok(SpectralTable {
        lambdas,
        norms,
        r,
        signed: true,
    })
}

/// Max-entry deviation of R R^T from the identity.
pub fn orthogonality_defect(t: &SpectralTable) -> f64 {
    let prod = &t.r * t.r.transpose();
    identity_defect(&prod)
}

/// Max-entry deviation of R^T R from the identity (dual orthogonality).
pub fn dual_orthogonality_defect(t: &SpectralTable) -> f64 {
    let prod = t.r.transpose() * &t.r;
    identity_defect(&prod)
}

fn identity_defect(prod: &DMatrix<f64>) -> f64 {
    let dim = prod.nrows();
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - target).abs());
        }
    }
    worst
}
