//! Coherent-state machinery: four-mode Glauber states on the truncated
//! Fock space, covariant symbols, the hbar-graded star product, reduced
//! coherent states on sectors with their reproducing kernel and measure,
//! the holomorphic realization of the sector ladder algebra, and
//! Fock-coherent transition amplitudes.
//!
//! Conventions: [a_k, a_k*] = hbar, so a_k |n> = sqrt(hbar n) |n-1> and
//! the unnormalized coherent state has Fock coefficients
//! prod z_k^{n_k} / sqrt(hbar^{n_k} n_k!).

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::classical::{self, ModeState, ReducedCoords};
use crate::error::{FwmError, Result};
use crate::fock::TruncatedFockSpace;
use crate::quantum;
use crate::sector::{self, FourWaveParams, SectorLabel};
use crate::special::{hyp2f1, ln_factorial};

/// Unnormalized coherent state truncated to total quanta <= T.
#[derive(Debug, Clone)]
pub struct CoherentState {
    /// Coefficients aligned with the basis of the space used to build it.
    pub coeffs: Vec<Complex64>,
    /// Norm^2 of the truncated expansion.
    pub norm_sq_truncated: f64,
    /// exp(sum |z_k|^2 / hbar), the exact norm^2 of the full state.
    pub norm_sq_full: f64,
}

impl CoherentState {
    /// Weight of the discarded tail relative to the full norm^2.
    pub fn tail_bound(&self) -> f64 {
        ((self.norm_sq_full - self.norm_sq_truncated) / self.norm_sq_full).max(0.0)
    }
}

/// Fock coefficients of the (unnormalized) coherent state |z> on the
/// truncated space.
pub fn coherent_coeffs(z: &ModeState, hbar: f64, space: &TruncatedFockSpace) -> CoherentState {
    let mut coeffs = Vec::with_capacity(space.dim());
    let mut norm_sq_truncated = 0.0f64;
    for tuple in &space.basis {
        let mut c = Complex64::new(1.0, 0.0);
        for (k, &n) in tuple.iter().enumerate() {
            c *= z.z[k].powu(n) / (hbar.powi(n as i32) * ln_factorial(n).exp()).sqrt();
        }
        norm_sq_truncated += c.norm_sqr();
        coeffs.push(c);
    }
    let norm_sq_full = (z.z.iter().map(|w| w.norm_sqr()).sum::<f64>() / hbar).exp();
    CoherentState {
        coeffs,
        norm_sq_truncated,
        norm_sq_full,
    }
}

/// Residual of the annihilation-eigenstate property on the interior of
/// the truncation: max over modes and interior states of
/// |(a_k |z>)_n - z_k (|z>)_n|.
pub fn annihilation_residual(
    z: &ModeState,
    hbar: f64,
    space: &TruncatedFockSpace,
    state: &CoherentState,
) -> f64 {
    let mut worst = 0.0f64;
    let t = space.max_total_quanta;
    for (i, tuple) in space.basis.iter().enumerate() {
        let total: u32 = tuple.iter().sum();
        if total >= t {
            // the raised neighbor falls outside the truncation
            continue;
        }
        for k in 0..4 {
            let mut up = *tuple;
            up[k] += 1;
            let j = space.index_of(&up).unwrap();
            let lowered = (hbar * up[k] as f64).sqrt() * state.coeffs[j];
            worst = worst.max((lowered - z.z[k] * state.coeffs[i]).norm());
        }
    }
    worst
}

/// Normal-ordered observable: finitely supported map from creation /
/// annihilation multi-indices (m; n) to coefficients, representing
/// sum f_{m;n} a*^m a^n.
#[derive(Debug, Clone, Default)]
pub struct NormalOrderedObservable {
    pub terms: BTreeMap<([u32; 4], [u32; 4]), Complex64>,
}

impl NormalOrderedObservable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, m: [u32; 4], n: [u32; 4], coeff: Complex64) {
        let entry = self.terms.entry((m, n)).or_insert(Complex64::new(0.0, 0.0));
        *entry += coeff;
    }

    /// Covariant symbol <z|F|z>/<z|z> = sum f_{m;n} conj(z)^m z^n.
    pub fn covariant_symbol(&self, z: &ModeState) -> Complex64 {
        let mut out = Complex64::new(0.0, 0.0);
        for (&(m, n), &coeff) in &self.terms {
            let mut term = coeff;
            for k in 0..4 {
                term *= z.z[k].conj().powu(m[k]) * z.z[k].powu(n[k]);
            }
            out += term;
        }
        out
    }
}

/// The quantum Hamiltonian in normal-ordered form. Its covariant symbol
/// is H(z) + hbar g (|z0|^2 + |z1|^2) exactly.
pub fn hamiltonian_observable(p: &FourWaveParams) -> NormalOrderedObservable {
    let mut h = NormalOrderedObservable::new();
    let g = Complex64::new(p.g, 0.0);
    let hb = p.hbar;
    for k in 0..4 {
        let mut e = [0u32; 4];
        e[k] = 1;
        h.add_term(e, e, Complex64::new(p.omega[k], 0.0));
    }
    // a0* a0 a3 a3* = a0* a3* a0 a3 + hbar a0* a0, and symmetrically
    h.add_term([1, 0, 0, 1], [1, 0, 0, 1], g);
    h.add_term([1, 0, 0, 0], [1, 0, 0, 0], g * hb);
    h.add_term([0, 1, 1, 0], [0, 1, 1, 0], g);
    h.add_term([0, 1, 0, 0], [0, 1, 0, 0], g * hb);
    // a0 a1* a2 a3* and its adjoint, already normal ordered
    h.add_term([0, 1, 0, 1], [1, 0, 1, 0], g);
    h.add_term([1, 0, 1, 0], [0, 1, 0, 1], g);
    h
}

/// Sparse polynomial in (z0..z3, conj(z0)..conj(z3)); the symbol algebra
/// on which the star product acts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    /// (powers of z, powers of conj z) -> coefficient.
    pub terms: BTreeMap<([u32; 4], [u32; 4]), Complex64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term([0; 4], [0; 4], c);
        p
    }

    /// The monomial z^a conj(z)^b.
    pub fn monomial(a: [u32; 4], b: [u32; 4], c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term(a, b, c);
        p
    }

    pub fn add_term(&mut self, a: [u32; 4], b: [u32; 4], c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry((a, b)).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            out.add_term(k.0, k.1, c);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        let mut out = Poly::zero();
        for (&k, &c) in &self.terms {
            out.add_term(k.0, k.1, c * s);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (&(a1, b1), &c1) in &self.terms {
            for (&(a2, b2), &c2) in &other.terms {
                let a = std::array::from_fn(|k| a1[k] + a2[k]);
                let b = std::array::from_fn(|k| b1[k] + b2[k]);
                out.add_term(a, b, c1 * c2);
            }
        }
        out
    }

    /// Partial derivative with respect to z_k.
    pub fn dz(&self, k: usize) -> Poly {
        let mut out = Poly::zero();
        for (&(a, b), &c) in &self.terms {
            if a[k] > 0 {
                let mut a2 = a;
                a2[k] -= 1;
                out.add_term(a2, b, c * a[k] as f64);
            }
        }
        out
    }

    /// Partial derivative with respect to conj(z_k).
    pub fn dzbar(&self, k: usize) -> Poly {
        let mut out = Poly::zero();
        for (&(a, b), &c) in &self.terms {
            if b[k] > 0 {
                let mut b2 = b;
                b2[k] -= 1;
                out.add_term(a, b2, c * b[k] as f64);
            }
        }
        out
    }

    pub fn eval(&self, z: &ModeState) -> Complex64 {
        let mut out = Complex64::new(0.0, 0.0);
        for (&(a, b), &c) in &self.terms {
            let mut term = c;
            for k in 0..4 {
                term *= z.z[k].powu(a[k]) * z.z[k].conj().powu(b[k]);
            }
            out += term;
        }
        out
    }

    pub fn max_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|(a, b)| a.iter().chain(b.iter()).sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}

/// The hbar-graded star product
/// f * g = sum_{j0..j3 <= J} hbar^{sum j} / prod j! *
///         (d^j/dz f) (d^j/dconj(z) g).
/// Exact when J is at least the maximal degree of f in z.
pub fn star_product(f: &Poly, g: &Poly, hbar: f64, j_max: u32) -> Poly {
    let mut out = Poly::zero();
    // iterate multi-indices (j0..j3) with each component <= j_max
    let mut j = [0u32; 4];
    loop {
        let total: u32 = j.iter().sum();
        let mut weight = hbar.powi(total as i32);
        for jk in j {
            weight /= ln_factorial(jk).exp();
        }
        let mut df = f.clone();
        let mut dg = g.clone();
        for (k, &jk) in j.iter().enumerate() {
            for _ in 0..jk {
                df = df.dz(k);
                dg = dg.dzbar(k);
            }
        }
        if !df.terms.is_empty() && !dg.terms.is_empty() {
            out = out.add(&df.mul(&dg).scale(Complex64::new(weight, 0.0)));
        }
        // next multi-index
        let mut carry = true;
        for jk in j.iter_mut() {
            if *jk < j_max {
                *jk += 1;
                carry = false;
                break;
            }
            *jk = 0;
        }
        if carry {
            break;
        }
    }
    out
}

/// The classical Poisson bracket on the mode space:
/// {f, g} = -i sum_k (df/dz_k dg/dconj(z_k) - df/dconj(z_k) dg/dz_k).
pub fn poisson_bracket(f: &Poly, g: &Poly) -> Poly {
    let mut out = Poly::zero();
    for k in 0..4 {
        out = out.add(&f.dz(k).mul(&g.dzbar(k)));
        out = out.sub(&f.dzbar(k).mul(&g.dz(k)));
    }
    out.scale(Complex64::new(0.0, -1.0))
}

/// zeta = z0 z2 / (z1 z3).
pub fn zeta_of(z: &ModeState) -> Result<Complex64> {
    if z.z[1].norm_sqr() == 0.0 || z.z[3].norm_sqr() == 0.0 {
        return Err(FwmError::DivisionByZero("zeta requires z1, z3 nonzero"));
    }
    Ok(z.z[0] * z.z[2] / (z.z[1] * z.z[3]))
}

/// zeta from reduced coordinates:
/// sqrt(I0 (I0-b3) / ((b1-I0)(b2+b3-I0))) e^{i psi0}.
pub fn zeta_of_reduced(rc: &ReducedCoords) -> Result<Complex64> {
    let (a, b) = classical::interval(rc.b);
    if !(rc.i0 > a && rc.i0 < b) {
        return Err(FwmError::OutOfInterval { i0: rc.i0, a, b });
    }
    let num = rc.i0 * (rc.i0 - rc.b[2]);
    let den = (rc.b[0] - rc.i0) * (rc.b[1] + rc.b[2] - rc.i0);
    Ok(Complex64::from_polar((num / den).sqrt(), rc.psi0))
}

/// Reduced coherent state |zeta; c>: N+1 coefficients
/// zeta^n / sqrt(n! (N-n)! (n+gamma)! (N+delta-n)!).
#[derive(Debug, Clone)]
pub struct ReducedCoherent {
    pub zeta: Complex64,
    pub sector: SectorLabel,
    pub coefficients: Vec<Complex64>,
}

/// The squared norm weight n! (N-n)! (n+gamma)! (N+delta-n)! of the
/// reduced basis monomial zeta^n.
pub fn reduced_weight(n: u32, shape: &crate::sector::SectorShape) -> f64 {
    ln_weight_sq(n, shape.n, shape.gamma, shape.delta).exp()
}

fn ln_weight_sq(n: u32, big_n: u32, gamma: u32, delta: u32) -> f64 {
    ln_factorial(n)
        + ln_factorial(big_n - n)
        + ln_factorial(n + gamma)
        + ln_factorial(big_n + delta - n)
}

/// Build |zeta; c>.
pub fn reduced_coherent(zeta: Complex64, c: &SectorLabel) -> Result<ReducedCoherent> {
    let shape = sector::shape_of(c)?;
    let coefficients = (0..=shape.n)
        .map(|n| zeta.powu(n) * (-0.5 * ln_weight_sq(n, shape.n, shape.gamma, shape.delta)).exp())
        .collect();
    Ok(ReducedCoherent {
        zeta,
        sector: *c,
        coefficients,
    })
}

/// Sector projection of the coherent state:
/// P_c |z> = (alpha / sqrt(hbar^{2N+gamma+delta})) |zeta; c> with
/// alpha = prod z_k^{t_k}, t the lowest sector basis tuple. Returns the
/// full scale alpha hbar^{-(2N+gamma+delta)/2} and the reduced state.
pub fn project_coherent(
    z: &ModeState,
    c: &SectorLabel,
    hbar: f64,
) -> Result<(Complex64, ReducedCoherent)> {
    let shape = sector::shape_of(c)?;
    let basis = sector::basis_states(c)?;
    let zeta = if shape.n > 0 {
        // the ratio between consecutive coefficients is zeta
        zeta_of(z)?
    } else {
        Complex64::new(0.0, 0.0)
    };
    let lowest = basis[0];
    let mut alpha = Complex64::new(1.0, 0.0);
    for (k, &t) in lowest.iter().enumerate() {
        alpha *= z.z[k].powu(t);
    }
    let power = (2 * shape.n + shape.gamma + shape.delta) as f64;
    alpha *= hbar.powf(-0.5 * power);
    Ok((alpha, reduced_coherent(zeta, c)?))
}

/// Max deviation between the sector restriction of coherent_coeffs and
/// alpha hbar^{-(2N+gamma+delta)/2} |zeta; c>, coefficient-wise.
pub fn projection_defect(z: &ModeState, c: &SectorLabel, hbar: f64) -> Result<f64> {
    let basis = sector::basis_states(c)?;
    let (scale, red) = project_coherent(z, c, hbar)?;
    let mut worst = 0.0f64;
    for (n, tuple) in basis.iter().enumerate() {
        let mut direct = Complex64::new(1.0, 0.0);
        for (k, &occ) in tuple.iter().enumerate() {
            direct *= z.z[k].powu(occ) / (hbar.powi(occ as i32) * ln_factorial(occ).exp()).sqrt();
        }
        worst = worst.max((direct - scale * red.coefficients[n]).norm());
    }
    Ok(worst)
}

/// Reproducing kernel <zeta; c | w; c> =
/// sum_n (conj(zeta) w)^n / (n! (N-n)! (n+gamma)! (N+delta-n)!).
pub fn reproducing_kernel(zeta: Complex64, w: Complex64, c: &SectorLabel) -> Result<Complex64> {
    let shape = sector::shape_of(c)?;
    let x = zeta.conj() * w;
    let mut out = Complex64::new(0.0, 0.0);
    for n in 0..=shape.n {
        out += x.powu(n) * (-ln_weight_sq(n, shape.n, shape.gamma, shape.delta)).exp();
    }
    Ok(out)
}

/// The same kernel via the terminating hypergeometric form
/// 2F1(-N, -(N+delta); gamma+1; x) / (N! gamma! (N+delta)!), for real
/// arguments (used by the measure cross-checks).
pub fn reproducing_kernel_hyp(x: f64, c: &SectorLabel) -> Result<f64> {
    let shape = sector::shape_of(c)?;
    let (n, g, d) = (shape.n as f64, shape.gamma as f64, shape.delta as f64);
    let norm = (-(ln_factorial(shape.n)
        + ln_factorial(shape.gamma)
        + ln_factorial(shape.n + shape.delta)))
    .exp();
    Ok(hyp2f1(-n, -(n + d), g + 1.0, x) * norm)
}

/// Radial density of the reproducing measure at s = |zeta|^2:
/// prefactor * 2F1(N+delta+2, N+2; 2N+gamma+delta+4; 1-s) with
/// prefactor = (N+1)! (N+gamma+1)! (N+delta+1)! (N+gamma+delta+1)! /
///             (2 pi (2N+gamma+delta+3)!).
pub fn measure_density(s: f64, c: &SectorLabel) -> Result<f64> {
    assert!(s >= 0.0, "radial coordinate must be nonnegative");
    let shape = sector::shape_of(c)?;
    let (n, g, d) = (shape.n, shape.gamma, shape.delta);
    let ln_pref = ln_factorial(n + 1) + ln_factorial(n + g + 1) + ln_factorial(n + d + 1)
        + ln_factorial(n + g + d + 1)
        - ln_factorial(2 * n + g + d + 3)
        - (2.0 * std::f64::consts::PI).ln();
    let f = hyp2f1(
        (n + d + 2) as f64,
        (n + 2) as f64,
        (2 * n + g + d + 4) as f64,
        1.0 - s,
    );
    Ok(ln_pref.exp() * f)
}

/// Radial moment integral 2 pi int_0^inf s^n density(s) ds, by adaptive
/// quadrature split at s = 1 with the tail mapped through s -> 1/u.
pub fn measure_moment(n: u32, c: &SectorLabel) -> Result<f64> {
    // start just above zero: for gamma = 0 the density has an integrable
    // logarithmic singularity at s = 0
    let inner = crate::special::adaptive_simpson(
        &|s: f64| s.powi(n as i32) * measure_density(s, c).unwrap_or(0.0),
        1e-12,
        1.0,
        1e-10,
        30,
    );
    // s = 1/u^2, ds = -2 du/u^3; the extra power suppresses the residual
    // logarithmic growth of s^n density(s) / u^2 at u -> 0 when the two
    // upper hypergeometric parameters coincide
    let outer = crate::special::adaptive_simpson(
        &|u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let s = 1.0 / (u * u);
            s.powi(n as i32) * measure_density(s, c).unwrap_or(0.0) * 2.0 / (u * u * u)
        },
        0.0,
        1.0,
        1e-10,
        30,
    );
    Ok(2.0 * std::f64::consts::PI * (inner + outer))
}

/// The three holomorphic operators on monomial coefficient vectors of
/// degree <= N: A0 = zeta d/dzeta, A = d/dzeta (gamma + zeta d/dzeta),
/// A* = zeta (N - zeta d/dzeta)(N + delta - zeta d/dzeta).
pub struct HolomorphicOps {
    pub a0: nalgebra::DMatrix<f64>,
    pub a: nalgebra::DMatrix<f64>,
    pub astar: nalgebra::DMatrix<f64>,
}

pub fn holomorphic_ops(c: &SectorLabel) -> Result<HolomorphicOps> {
    let shape = sector::shape_of(c)?;
    let dim = shape.n as usize + 1;
    let (big_n, g, d) = (shape.n as f64, shape.gamma as f64, shape.delta as f64);
    let mut a0 = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    let mut a = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    let mut astar = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for n in 0..dim {
        let x = n as f64;
        a0[(n, n)] = x;
        if n > 0 {
            // A zeta^n = n (gamma + n) zeta^{n-1}
            a[(n - 1, n)] = x * (g + x);
        }
        if n + 1 < dim {
            // A* zeta^n = (N - n)(N + delta - n) zeta^{n+1}
            astar[(n + 1, n)] = (big_n - x) * (big_n + d - x);
        }
    }
    Ok(HolomorphicOps { a0, a, astar })
}

/// Max-entry deviation between the weight-conjugated holomorphic
/// operators and the sector ladder matrices of the quantum module.
pub fn holomorphic_intertwining_defect(c: &SectorLabel) -> Result<f64> {
    let shape = sector::shape_of(c)?;
    let ops = holomorphic_ops(c)?;
    let (a0_q, a_q, astar_q) = quantum::sector_ops(c)?;
    let dim = shape.n as usize + 1;
    // D = diag(w_n), w_n = exp(-ln_weight/2); conjugate D^{-1} Op D
    let w: Vec<f64> = (0..dim)
        .map(|n| (-0.5 * ln_weight_sq(n as u32, shape.n, shape.gamma, shape.delta)).exp())
        .collect();
    let conj = |m: &nalgebra::DMatrix<f64>| -> nalgebra::DMatrix<f64> {
        let mut out = m.clone();
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] = m[(i, j)] * w[j] / w[i];
            }
        }
        out
    };
    let offset = shape.base_offset as f64;
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            // the quantum A0 carries the base offset; the holomorphic one
            // counts the monomial degree
            let a0_expected = a0_q.matrix[(i, j)].re - if i == j { offset } else { 0.0 };
            worst = worst.max((conj(&ops.a0)[(i, j)] - a0_expected).abs());
            worst = worst.max((conj(&ops.a)[(i, j)] - a_q.matrix[(i, j)].re).abs());
            worst = worst.max((conj(&ops.astar)[(i, j)] - astar_q.matrix[(i, j)].re).abs());
        }
    }
    Ok(worst)
}

/// Normalized transition amplitude <z| e^{itH/hbar} |fock> / ||z||,
/// computed through the sector propagator of the Fock state's sector.
pub fn fock_coherent_amplitude(
    z: &ModeState,
    fock: [u32; 4],
    t: f64,
    p: &FourWaveParams,
) -> Result<Complex64> {
    let (c, local) = sector::sector_of_fock(fock[0], fock[1], fock[2], fock[3]);
    let u = quantum::propagator(&c, p, t)?;
    let basis = sector::basis_states(&c)?;
    let hbar = p.hbar;
    let mut amp = Complex64::new(0.0, 0.0);
    for (m, tuple) in basis.iter().enumerate() {
        let mut coeff = Complex64::new(1.0, 0.0);
        for (k, &occ) in tuple.iter().enumerate() {
            coeff *= z.z[k].powu(occ) / (hbar.powi(occ as i32) * ln_factorial(occ).exp()).sqrt();
        }
        amp += coeff.conj() * u.matrix[(m, local)];
    }
    let norm = (z.z.iter().map(|w| w.norm_sqr()).sum::<f64>() / (2.0 * hbar)).exp();
    Ok(amp / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ones() -> ModeState {
        ModeState::new([Complex64::new(1.0, 0.0); 4])
    }

    fn random_state(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> ModeState {
        ModeState::new(std::array::from_fn(|_| {
            Complex64::from_polar(rng.gen_range(lo..hi), rng.gen_range(-PI..PI))
        }))
    }

    fn resonant(g: f64, hbar: f64) -> FourWaveParams {
        FourWaveParams::new([1.0, 1.0, 1.0, 1.0], g, hbar)
    }

    #[test]
    fn vacuum_state() {
        let space = TruncatedFockSpace::new(4).unwrap();
        let z = ModeState::new([Complex64::new(0.0, 0.0); 4]);
        let st = coherent_coeffs(&z, 1.0, &space);
        for (i, tuple) in space.basis.iter().enumerate() {
            let expect = if tuple == &[0, 0, 0, 0] { 1.0 } else { 0.0 };
            assert_eq!(st.coeffs[i], Complex64::new(expect, 0.0));
        }
        assert_eq!(st.norm_sq_full, 1.0);
        assert_eq!(st.tail_bound(), 0.0);
    }

    #[test]
    fn norm_converges_to_exponential() {
        let z = ones();
        let full = (4.0f64).exp();
        let mut prev = 0.0;
        for t in 2..=12u32 {
            let space = TruncatedFockSpace::new(t).unwrap();
            let st = coherent_coeffs(&z, 1.0, &space);
            assert!(st.norm_sq_truncated >= prev);
            assert!(st.norm_sq_truncated <= full * (1.0 + 1e-12));
            prev = st.norm_sq_truncated;
        }
        assert_relative_eq!(prev, full, max_relative = 1e-3);
    }

    #[test]
    fn annihilation_eigenstate() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let space = TruncatedFockSpace::new(10).unwrap();
        for _ in 0..5 {
            let z = random_state(&mut rng, 0.1, 0.8);
            let st = coherent_coeffs(&z, 1.0, &space);
            assert!(annihilation_residual(&z, 1.0, &space, &st) <= 1e-12);
        }
    }

    #[test]
    fn covariant_symbol_examples() {
        let mut n00 = NormalOrderedObservable::new();
        n00.add_term([1, 0, 0, 0], [1, 0, 0, 0], Complex64::new(1.0, 0.0));
        let z = ModeState::new([
            Complex64::new(1.0, 2.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        let s = n00.covariant_symbol(&z);
        assert_relative_eq!(s.re, 5.0, epsilon = 1e-14);
        assert!(s.im.abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_symbol_identity() {
        // <H>(z) - H(z) = hbar g (|z0|^2 + |z1|^2) exactly
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..50 {
            let p = FourWaveParams::new(
                std::array::from_fn(|_| rng.gen_range(0.2..2.0)),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(0.05..2.0),
            );
            let z = random_state(&mut rng, 0.2, 1.5);
            let obs = hamiltonian_observable(&p);
            let sym = obs.covariant_symbol(&z);
            let expect = classical::hamiltonian(&z, &p)
                + p.hbar * p.g * (z.z[0].norm_sqr() + z.z[1].norm_sqr());
            assert!(sym.im.abs() <= 1e-12 * sym.re.abs().max(1.0));
            assert_relative_eq!(sym.re, expect, epsilon = 1e-11, max_relative = 1e-11);
        }
    }

    #[test]
    fn classical_limit_of_symbol() {
        // linear-in-hbar approach to H as hbar -> 0
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let z = random_state(&mut rng, 0.3, 1.2);
        let mut p = FourWaveParams::new([1.2, 0.8, 0.5, 1.4], 0.7, 1.0);
        let h = classical::hamiltonian(&z, &p);
        let slope = p.g * (z.z[0].norm_sqr() + z.z[1].norm_sqr());
        for hbar in [1e-1, 1e-2, 1e-3, 1e-4] {
            p.hbar = hbar;
            let sym = hamiltonian_observable(&p).covariant_symbol(&z).re;
            assert_relative_eq!(sym - h, hbar * slope, max_relative = 1e-9);
        }
    }

    #[test]
    fn star_product_zeroth_order_is_pointwise() {
        let f = Poly::monomial([1, 0, 0, 0], [1, 0, 0, 0], Complex64::new(1.0, 0.0));
        let g = Poly::monomial([0, 1, 0, 0], [0, 0, 1, 0], Complex64::new(2.0, 0.0));
        let prod = star_product(&f, &g, 0.7, 0);
        assert_eq!(prod, f.mul(&g));
    }

    #[test]
    fn star_commutator_gives_bracket() {
        // f = |z0|^2, g = z0: (-i/hbar)(f*g - g*f) = i z0 exactly
        let hbar = 0.3;
        let f = Poly::monomial([1, 0, 0, 0], [1, 0, 0, 0], Complex64::new(1.0, 0.0));
        let g = Poly::monomial([1, 0, 0, 0], [0, 0, 0, 0], Complex64::new(1.0, 0.0));
        let comm = star_product(&f, &g, hbar, 3).sub(&star_product(&g, &f, hbar, 3));
        let scaled = comm.scale(Complex64::new(0.0, -1.0 / hbar));
        let expect = Poly::monomial([1, 0, 0, 0], [0, 0, 0, 0], Complex64::new(0.0, 1.0));
        let diff = scaled.sub(&expect);
        for (_, c) in diff.terms {
            assert!(c.norm() <= 1e-14);
        }
    }

    #[test]
    fn star_associativity_on_monomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let hbar = 0.37;
        let z = random_state(&mut rng, 0.3, 1.1);
        for _ in 0..10 {
            let rand_mono = |rng: &mut ChaCha8Rng| -> Poly {
                let a = std::array::from_fn(|_| rng.gen_range(0..=2u32));
                let b = std::array::from_fn(|_| rng.gen_range(0..=2u32));
                Poly::monomial(
                    a,
                    b,
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            };
            let f = rand_mono(&mut rng);
            let g = rand_mono(&mut rng);
            let h = rand_mono(&mut rng);
            let j = 8; // beyond every degree: star product exact
            let left = star_product(&star_product(&f, &g, hbar, j), &h, hbar, j);
            let right = star_product(&f, &star_product(&g, &h, hbar, j), hbar, j);
            let diff = left.sub(&right).eval(&z);
            assert!(diff.norm() <= 1e-12, "associativity defect {}", diff.norm());
        }
    }

    #[test]
    fn star_correspondence_for_shape_generators() {
        // I0 = |z0|^2, x + iy = z0 conj(z1) z2 conj(z3); the first-order
        // star commutator reproduces the bracket relations of the shape
        // algebra in the hbar -> 0 limit
        let one = Complex64::new(1.0, 0.0);
        let half = Complex64::new(0.5, 0.0);
        let i0 = Poly::monomial([1, 0, 0, 0], [1, 0, 0, 0], one);
        let m = Poly::monomial([1, 0, 1, 0], [0, 1, 0, 1], one);
        let mbar = Poly::monomial([0, 1, 0, 1], [1, 0, 1, 0], one);
        let x = m.add(&mbar).scale(half);
        let y = m.sub(&mbar).scale(Complex64::new(0.0, -0.5));
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let z = random_state(&mut rng, 0.4, 1.3);
        // exact brackets
        let b_i0x = poisson_bracket(&i0, &x).eval(&z);
        let b_i0y = poisson_bracket(&i0, &y).eval(&z);
        assert!((b_i0x - (-y.eval(&z))).norm() <= 1e-12);
        assert!((b_i0y - x.eval(&z)).norm() <= 1e-12);
        // star commutator approaches the bracket linearly in hbar
        for (f, g) in [(&i0, &x), (&i0, &y), (&x, &y)] {
            let exact = poisson_bracket(f, g).eval(&z);
            let mut prev_err = f64::INFINITY;
            for hbar in [1e-1, 1e-2, 1e-3] {
                let comm = star_product(f, g, hbar, 6).sub(&star_product(g, f, hbar, 6));
                let approx_val = comm.scale(Complex64::new(0.0, -1.0 / hbar)).eval(&z);
                let err = (approx_val - exact).norm();
                assert!(err < prev_err.max(1e-13), "no hbar improvement: {err}");
                prev_err = err;
            }
            assert!(prev_err <= 1e-2 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn zeta_examples() {
        assert_eq!(zeta_of(&ones()).unwrap(), Complex64::new(1.0, 0.0));
        let rc = ReducedCoords {
            i0: 1.0,
            psi0: 0.0,
            b: [2.0, 2.0, 0.0],
        };
        assert_eq!(zeta_of_reduced(&rc).unwrap(), Complex64::new(1.0, 0.0));
        let mut z = ones();
        z.z[1] = Complex64::new(0.0, 0.0);
        assert!(matches!(zeta_of(&z), Err(FwmError::DivisionByZero(_))));
    }

    #[test]
    fn zeta_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..100 {
            let z = random_state(&mut rng, 0.3, 1.4);
            let aa = classical::to_action_angle(&z).unwrap();
            let rc = ReducedCoords {
                i0: aa.i0,
                psi0: aa.psi[0],
                b: aa.b,
            };
            let direct = zeta_of(&z).unwrap();
            let reduced = zeta_of_reduced(&rc).unwrap();
            assert!(
                (direct - reduced).norm() <= 1e-12 * direct.norm().max(1.0),
                "zeta mismatch {direct} vs {reduced}"
            );
        }
    }

    #[test]
    fn projection_examples() {
        // subcase i alpha = z1^N z2^gamma z3^{N+delta}
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let z = random_state(&mut rng, 0.4, 1.2);
        let c = SectorLabel::new(2, 3, 0); // N=2, gamma=0, delta=1
        let (alpha, _) = project_coherent(&z, &c, 1.0).unwrap();
        let expect = z.z[1].powu(2) * z.z[3].powu(3);
        assert!((alpha - expect).norm() <= 1e-13 * expect.norm());

        // identity instance
        let (alpha, red) = project_coherent(&ones(), &c, 1.0).unwrap();
        assert_eq!(alpha, Complex64::new(1.0, 0.0));
        assert_eq!(red.zeta, Complex64::new(1.0, 0.0));

        // vacuum sector
        let (alpha, red) = project_coherent(&z, &SectorLabel::new(0, 0, 0), 1.0).unwrap();
        assert_eq!(alpha, Complex64::new(1.0, 0.0));
        assert_eq!(red.coefficients.len(), 1);
        assert_eq!(red.coefficients[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn projection_matches_coherent_coeffs() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..20 {
            let z = random_state(&mut rng, 0.4, 1.3);
            let hbar = rng.gen_range(0.3..2.0);
            for c in [
                SectorLabel::new(2, 3, 0),
                SectorLabel::new(3, 1, 1),
                SectorLabel::new(4, 4, -2),
                SectorLabel::new(1, 1, 0),
            ] {
                let defect = projection_defect(&z, &c, hbar).unwrap();
                assert!(defect <= 1e-12, "projection defect {defect} for {c:?}");
            }
        }
    }

    #[test]
    fn kernel_examples_and_consistency() {
        let c = SectorLabel::new(2, 3, 0); // N=2, gamma=0, delta=1
        // w = 0: only the constant term
        let k0 = reproducing_kernel(Complex64::new(0.7, 0.3), Complex64::new(0.0, 0.0), &c)
            .unwrap();
        let expect = (-(ln_factorial(2) + ln_factorial(0) + ln_factorial(3))).exp();
        assert_relative_eq!(k0.re, expect, max_relative = 1e-13);

        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..50 {
            let zeta = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let w = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let k = reproducing_kernel(zeta, w, &c).unwrap();
            // brute-force inner product of coefficient vectors
            let a = reduced_coherent(zeta, &c).unwrap();
            let b = reduced_coherent(w, &c).unwrap();
            let direct: Complex64 = a
                .coefficients
                .iter()
                .zip(&b.coefficients)
                .map(|(u, v)| u.conj() * v)
                .sum();
            assert!((k - direct).norm() <= 1e-14 * direct.norm().max(1.0));
            // positivity on the diagonal
            let diag = reproducing_kernel(zeta, zeta, &c).unwrap();
            assert!(diag.re > 0.0 && diag.im.abs() <= 1e-15 * diag.re);
        }
    }

    #[test]
    fn kernel_hypergeometric_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        for c in [
            SectorLabel::new(2, 3, 0),
            SectorLabel::new(3, 1, 1),
            SectorLabel::new(4, 2, -1),
        ] {
            for _ in 0..20 {
                let x = rng.gen_range(-3.0..1.0);
                let series = reproducing_kernel(
                    Complex64::new(1.0, 0.0),
                    Complex64::new(x, 0.0),
                    &c,
                )
                .unwrap();
                let hyp = reproducing_kernel_hyp(x, &c).unwrap();
                assert_relative_eq!(series.re, hyp, epsilon = 1e-12, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn measure_density_examples() {
        let c = SectorLabel::new(2, 3, 0);
        let shape = sector::shape_of(&c).unwrap();
        let (n, g, d) = (shape.n, shape.gamma, shape.delta);
        let pref = (ln_factorial(n + 1) + ln_factorial(n + g + 1) + ln_factorial(n + d + 1)
            + ln_factorial(n + g + d + 1)
            - ln_factorial(2 * n + g + d + 3)
            - (2.0 * PI).ln())
        .exp();
        assert_relative_eq!(measure_density(1.0, &c).unwrap(), pref, max_relative = 1e-13);
        // positivity sweep (s = 0 excluded: log-singular for gamma = 0)
        for i in 1..200 {
            let s = 0.5 * i as f64;
            assert!(measure_density(s, &c).unwrap() >= 0.0);
        }
    }

    #[test]
    fn measure_moments_reproduce_weights() {
        for (c1, c2, c3) in [(1i64, 1i64, 0i64), (2, 3, 0), (3, 3, -1), (3, 2, 1), (2, 4, -2)] {
            let c = SectorLabel::new(c1, c2, c3);
            let shape = sector::shape_of(&c).unwrap();
            if shape.n > 3 || shape.gamma > 2 || shape.delta > 2 {
                continue;
            }
            for n in 0..=shape.n {
                let moment = measure_moment(n, &c).unwrap();
                let expect = ln_weight_sq(n, shape.n, shape.gamma, shape.delta).exp();
                assert_relative_eq!(moment, expect, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn holomorphic_op_examples() {
        let c = SectorLabel::new(2, 3, 0); // N=2
        let ops = holomorphic_ops(&c).unwrap();
        // A0 zeta^n = n zeta^n
        assert_eq!(ops.a0[(1, 1)], 1.0);
        assert_eq!(ops.a0[(2, 2)], 2.0);
        // A* on zeta^N vanishes
        for i in 0..3 {
            assert_eq!(ops.astar[(i, 2)], 0.0);
        }
    }

    #[test]
    fn holomorphic_intertwining() {
        for c in sector::sectors_within(6) {
            let defect = holomorphic_intertwining_defect(&c).unwrap();
            assert!(defect <= 1e-12, "intertwining defect {defect} for {c:?}");
        }
    }

    #[test]
    fn amplitude_plain_overlap_at_zero_time() {
        let p = resonant(0.8, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let z = random_state(&mut rng, 0.4, 1.0);
        let fock = [1, 1, 1, 2];
        let amp = fock_coherent_amplitude(&z, fock, 0.0, &p).unwrap();
        let mut overlap = Complex64::new(1.0, 0.0);
        for (k, &occ) in fock.iter().enumerate() {
            overlap *= z.z[k].conj().powu(occ) / ln_factorial(occ).exp().sqrt();
        }
        overlap /= (z.z.iter().map(|w| w.norm_sqr()).sum::<f64>() / 2.0).exp();
        assert!((amp - overlap).norm() <= 1e-13);
    }

    #[test]
    fn amplitude_decays_with_hbar() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let z = random_state(&mut rng, 0.6, 1.2);
        let fock = [1, 1, 1, 2];
        let t = 0.7;
        let mut prev = f64::INFINITY;
        for hbar in [1.0, 0.5, 0.25, 0.125] {
            let p = resonant(0.8, hbar);
            let amp = fock_coherent_amplitude(&z, fock, t, &p).unwrap().norm();
            assert!(amp < prev, "no decay at hbar={hbar}: {amp} vs {prev}");
            prev = amp;
        }
    }

    #[test]
    fn amplitude_matches_block_oracle() {
        let space = TruncatedFockSpace::new(8).unwrap();
        let p = resonant(0.6, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        let z = random_state(&mut rng, 0.4, 0.9);
        let h = quantum::build_full_hamiltonian(&space, &p);
        for fock in [[1u32, 1, 1, 2], [2, 1, 2, 0], [0, 2, 0, 3]] {
            let (c, local) = sector::sector_of_fock(fock[0], fock[1], fock[2], fock[3]);
            let block = quantum::sector_block(&h, &space, &c).unwrap();
            let (vals, vecs) = quantum::oracle_diagonalize(&block).unwrap();
            let basis = sector::basis_states(&c).unwrap();
            let t = 1.3;
            // e^{itB/hbar} column `local`, contracted with <z|
            let mut oracle = Complex64::new(0.0, 0.0);
            for (m, tuple) in basis.iter().enumerate() {
                let mut u_ml = Complex64::new(0.0, 0.0);
                for (k, &e) in vals.iter().enumerate() {
                    u_ml += Complex64::from_polar(vecs[(m, k)] * vecs[(local, k)], e * t / p.hbar);
                }
                let mut coeff = Complex64::new(1.0, 0.0);
                for (kk, &occ) in tuple.iter().enumerate() {
                    coeff *= z.z[kk].powu(occ)
                        / (p.hbar.powi(occ as i32) * ln_factorial(occ).exp()).sqrt();
                }
                oracle += coeff.conj() * u_ml;
            }
            oracle /= (z.z.iter().map(|w| w.norm_sqr()).sum::<f64>() / (2.0 * p.hbar)).exp();
            let amp = fock_coherent_amplitude(&z, fock, t, &p).unwrap();
            assert!(
                (amp - oracle).norm() <= 1e-8,
                "amplitude mismatch {} vs oracle {}",
                amp,
                oracle
            );
        }
    }
}
