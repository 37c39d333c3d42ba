//! Sector operators, reduced Hamiltonians, spectral decomposition,
//! propagators, transition probabilities, Heisenberg evolution and the
//! N = 1 closed form.
//!
//! Sector-level quantities are dimensionless or carry 1/time; the full
//! truncated Hamiltonian carries action/time, so its per-sector
//! eigenvalues are `hbar^2 g lambda_k + hbar lambda0`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dualhahn::{self, DualHahnParams, SpectralTable};
use crate::error::{FwmError, Result};
use crate::fock::TruncatedFockSpace;
use crate::sector::{self, FourWaveParams, SectorLabel, SectorShape};
use crate::tridiag;

/// An observable restricted to one sector: a dense complex
/// (N+1) x (N+1) matrix.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    pub sector: SectorLabel,
    pub matrix: DMatrix<Complex64>,
}

impl SectorOperator {
    pub fn new(sector: SectorLabel, matrix: DMatrix<Complex64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols());
        Self { sector, matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn from_real(sector: SectorLabel, m: &DMatrix<f64>) -> Self {
        Self::new(sector, m.map(|x| Complex64::new(x, 0.0)))
    }
}

pub fn dual_hahn_params(shape: &SectorShape) -> DualHahnParams {
    DualHahnParams::new(shape.gamma, shape.delta, shape.n)
}

/// The reduced ladder triple (A0, A, A*) acting on the sector basis.
/// A lowers, A* = A^T raises, A0 is diagonal with entries n (subcases
/// i/ii) or c3 + n (iii/iv).
pub fn sector_ops(c: &SectorLabel) -> Result<(SectorOperator, SectorOperator, SectorOperator)> {
    let shape = sector::shape_of(c)?;
    let dim = shape.n as usize + 1;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for n in 1..dim {
        // sqrt(n (N-n+1) (gamma+n) (N-n+delta+1)) = sqrt(G(offset+n))
        let (nn, g, d) = (shape.n as f64, shape.gamma as f64, shape.delta as f64);
        let x = n as f64;
        a[(n - 1, n)] = (x * (nn - x + 1.0) * (g + x) * (nn - x + d + 1.0)).sqrt();
    }
    let astar = a.transpose();
    let mut a0 = DMatrix::<f64>::zeros(dim, dim);
    for n in 0..dim {
        a0[(n, n)] = n as f64 + shape.base_offset as f64;
    }
    Ok((
        SectorOperator::from_real(*c, &a0),
        SectorOperator::from_real(*c, &a),
        SectorOperator::from_real(*c, &astar),
    ))
}

/// Factor function G(x) = x (c1-x+1) (x-c3) (c2+c3-x+1) in dimensionless
/// sector units; A*A = diag(G(a0_n)) and AA* = diag(G(a0_n + 1)).
pub fn factor_function(c: &SectorLabel, x: f64) -> f64 {
    x * (c.c1 as f64 - x + 1.0) * (x - c.c3 as f64) * ((c.c2 + c.c3) as f64 - x + 1.0)
}

/// Max-entry deviation of the three commutation relations
/// [A0,A] = -A, [A0,A*] = A*, [A,A*] = G(A0+1) - G(A0).
pub fn commutator_check(c: &SectorLabel) -> Result<f64> {
    let (a0, a, astar) = sector_ops(c)?;
    let (a0, a, astar) = (&a0.matrix, &a.matrix, &astar.matrix);
    let dim = a0.nrows();
    let r1 = a0 * a - a * a0 + a;
    let r2 = a0 * astar - astar * a0 - astar;
    let mut g_diff = DMatrix::<Complex64>::zeros(dim, dim);
    for n in 0..dim {
        let x = a0[(n, n)].re;
        g_diff[(n, n)] = Complex64::new(factor_function(c, x + 1.0) - factor_function(c, x), 0.0);
    }
    let r3 = a * astar - astar * a - g_diff;
    let max = |m: &DMatrix<Complex64>| m.iter().fold(0.0f64, |w, z| w.max(z.norm()));
    Ok(max(&r1).max(max(&r2)).max(max(&r3)))
}

/// The dimensionless tridiagonal operator H0c: diagonal
/// a_n = n(N-n+delta+1) + (N-n)(gamma+n+1), off-diagonal
/// b_n = sqrt((n+1)(N-n)(gamma+n+1)(N-n+delta)).
pub fn tridiagonal_h0(shape: &SectorShape) -> DMatrix<f64> {
    let p = dual_hahn_params(shape);
    let dim = shape.n as usize + 1;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = dualhahn::diag_coeff(n as u32, &p);
        if n + 1 < dim {
            let b = dualhahn::offdiag_coeff(n as u32, &p);
            m[(n, n + 1)] = b;
            m[(n + 1, n)] = b;
        }
    }
    m
}

/// Reduced sector Hamiltonian (units 1/time):
/// H_c = (omega0-omega1+omega2-omega3) A0 + g hbar H0c + lambda0c I.
pub fn reduced_hamiltonian(c: &SectorLabel, p: &FourWaveParams) -> Result<SectorOperator> {
    let shape = sector::shape_of(c)?;
    let lambda0 = sector::lambda0(c, p)?;
    let detuning = p.detuning();
    let gh = p.g * p.hbar;
    let mut m = tridiagonal_h0(&shape) * gh;
    for n in 0..m.nrows() {
        m[(n, n)] += detuning * (n as f64 + shape.base_offset as f64) + lambda0;
    }
    Ok(SectorOperator::from_real(*c, &m))
}

fn require_resonance(p: &FourWaveParams) -> Result<()> {
    if p.is_resonant() {
        Ok(())
    } else {
        Err(FwmError::NotResonant(p.detuning()))
    }
}

/// Sector energies (1/time) and the dual Hahn transition table, valid
/// under exact frequency resonance:
/// energies[k] = g hbar lambda_k + lambda0c.
pub fn spectral_decomposition(
    c: &SectorLabel,
    p: &FourWaveParams,
) -> Result<(Vec<f64>, SpectralTable)> {
    require_resonance(p)?;
    let shape = sector::shape_of(c)?;
    let lambda0 = sector::lambda0(c, p)?;
    let table = dualhahn::transition_matrix(&dual_hahn_params(&shape))?;
    let gh = p.g * p.hbar;
    let energies = table.lambdas.iter().map(|l| gh * l + lambda0).collect();
    Ok((energies, table))
}

/// Resonant propagator U(t) = e^{it lambda0} R diag(e^{it g hbar lambda_k}) R^T.
pub fn propagator(c: &SectorLabel, p: &FourWaveParams, t: f64) -> Result<SectorOperator> {
    let (energies, table) = spectral_decomposition(c, p)?;
    Ok(propagator_from_modes(c, &table.r, &energies, t))
}

/// General propagator via the QL eigendecomposition of the reduced
/// Hamiltonian; works off resonance too.
pub fn propagator_general(c: &SectorLabel, p: &FourWaveParams, t: f64) -> Result<SectorOperator> {
    let h = reduced_hamiltonian(c, p)?;
    let real = h.matrix.map(|z| z.re);
    let (vals, vecs) = tridiag::eigh_symmetric_tridiagonal_matrix(&real)?;
    Ok(propagator_from_modes(c, &vecs, &vals, t))
}

fn propagator_from_modes(
    c: &SectorLabel,
    vecs: &DMatrix<f64>,
    energies: &[f64],
    t: f64,
) -> SectorOperator {
    let dim = vecs.nrows();
    let mut u = DMatrix::<Complex64>::zeros(dim, dim);
    for m in 0..dim {
        for n in 0..dim {
            let mut z = Complex64::new(0.0, 0.0);
            for (k, &e) in energies.iter().enumerate() {
                z += Complex64::from_polar(vecs[(m, k)] * vecs[(n, k)], e * t);
            }
            u[(m, n)] = z;
        }
    }
    SectorOperator::new(*c, u)
}

/// Max-entry deviation of U U^dagger from the identity.
pub fn unitarity_defect(u: &SectorOperator) -> f64 {
    let dim = u.dim();
    let prod = &u.matrix * u.matrix.adjoint();
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// |U_{mn}(t)|^2 for the sector propagator (resonant path, falling back
/// to the general eigendecomposition off resonance).
pub fn transition_probability(
    c: &SectorLabel,
    p: &FourWaveParams,
    m: usize,
    n: usize,
    t: f64,
) -> Result<f64> {
    let shape = sector::shape_of(c)?;
    let max = shape.n as usize;
    if m > max {
        return Err(FwmError::IndexOutOfRange { index: m, max });
    }
    if n > max {
        return Err(FwmError::IndexOutOfRange { index: n, max });
    }
    let u = if p.is_resonant() {
        propagator(c, p, t)?
    } else {
        propagator_general(c, p, t)?
    };
    Ok(u.matrix[(m, n)].norm_sqr())
}

/// Closed-form N = 1 propagator for shape parameters (gamma, delta),
/// with the stay/flip probabilities. The matrix omits the sector phase
/// e^{it lambda0c} and is gauge-equivalent to `propagator` entries.
pub fn two_level_closed_form(
    gamma: u32,
    delta: u32,
    p: &FourWaveParams,
    t: f64,
) -> Result<(DMatrix<Complex64>, f64, f64)> {
    require_resonance(p)?;
    let (g, d) = (gamma as f64, delta as f64);
    let lambda1 = g + d + 2.0;
    let phase = Complex64::from_polar(1.0, p.g * p.hbar * lambda1 * t);
    let one = Complex64::new(1.0, 0.0);
    let off = ((g + 1.0) * (d + 1.0)).sqrt() * (one - phase) / lambda1;
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            ((d + 1.0) * one + (g + 1.0) * phase) / lambda1,
            off,
            off,
            ((g + 1.0) * one + (d + 1.0) * phase) / lambda1,
        ],
    );
    let kappa = (g + 1.0) / (d + 1.0);
    let p_flip = 2.0 * kappa / (1.0 + kappa).powi(2) * (1.0 - (p.g * p.hbar * lambda1 * t).cos());
    let p_stay = 1.0 - p_flip;
    Ok((m, p_stay, p_flip))
}

/// Heisenberg evolution F(t) = U(t) F(0) U(t)^dagger with
/// U(t) = e^{it H_c}, so that dF/dt = i [H_c, F] holds.
pub fn heisenberg_evolve(
    f: &SectorOperator,
    c: &SectorLabel,
    p: &FourWaveParams,
    t: f64,
) -> Result<SectorOperator> {
    if f.sector != *c {
        return Err(FwmError::ShapeMismatch {
            expected: sector::shape_of(c)?.n as usize + 1,
            got: f.dim(),
        });
    }
    let shape = sector::shape_of(c)?;
    if f.dim() != shape.n as usize + 1 {
        return Err(FwmError::ShapeMismatch {
            expected: shape.n as usize + 1,
            got: f.dim(),
        });
    }
    let u = if p.is_resonant() {
        propagator(c, p, t)?
    } else {
        propagator_general(c, p, t)?
    };
    let evolved = &u.matrix * &f.matrix * u.matrix.adjoint();
    Ok(SectorOperator::new(*c, evolved))
}

/// The quantum Hamiltonian assembled on the truncated Fock space
/// (units action/time). Real symmetric; exactly block-diagonal over the
/// sector partition.
pub fn build_full_hamiltonian(space: &TruncatedFockSpace, p: &FourWaveParams) -> DMatrix<f64> {
    let dim = space.dim();
    let hb = p.hbar;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (i, &[n0, n1, n2, n3]) in space.basis.iter().enumerate() {
        let occ = [n0 as f64, n1 as f64, n2 as f64, n3 as f64];
        let mut diag = 0.0;
        for k in 0..4 {
            diag += p.omega[k] * hb * occ[k];
        }
        // a0*a0 a3 a3* + a1*a1 a2 a2* = a0*a0 (a3*a3 + hbar) + a1*a1 (a2*a2 + hbar)
        diag += p.g * hb * hb * (occ[0] * (occ[3] + 1.0) + occ[1] * (occ[2] + 1.0));
        h[(i, i)] = diag;
        // a0 a1* a2 a3*: (n0,n1,n2,n3) -> (n0-1, n1+1, n2-1, n3+1)
        if n0 > 0 && n2 > 0 {
            let target = [n0 - 1, n1 + 1, n2 - 1, n3 + 1];
            if let Some(j) = space.index_of(&target) {
                let amp =
                    p.g * hb * hb * (occ[0] * (occ[1] + 1.0) * occ[2] * (occ[3] + 1.0)).sqrt();
                h[(j, i)] += amp;
                h[(i, j)] += amp;
            }
        }
    }
    h
}

/// Extract the sector block of a full-space matrix, ordered by the
/// sector basis.
pub fn sector_block(
    full: &DMatrix<f64>,
    space: &TruncatedFockSpace,
    c: &SectorLabel,
) -> Result<DMatrix<f64>> {
    let basis = sector::basis_states(c)?;
    let idx: Option<Vec<usize>> = basis.iter().map(|b| space.index_of(b)).collect();
    let idx = idx.ok_or(FwmError::TruncationTooLarge(
        space.max_total_quanta,
        crate::fock::MAX_TRUNCATION,
    ))?;
    let dim = idx.len();
    let mut block = DMatrix::<f64>::zeros(dim, dim);
    for (a, &ia) in idx.iter().enumerate() {
        for (b, &ib) in idx.iter().enumerate() {
            block[(a, b)] = full[(ia, ib)];
        }
    }
    Ok(block)
}

/// Largest |H_{ij}| between basis states of different sectors; exactly
/// zero by charge conservation.
pub fn off_block_defect(full: &DMatrix<f64>, space: &TruncatedFockSpace) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in space.basis.iter().enumerate() {
        let (ca, _) = sector::sector_of_fock(a[0], a[1], a[2], a[3]);
        for (j, b) in space.basis.iter().enumerate() {
            let (cb, _) = sector::sector_of_fock(b[0], b[1], b[2], b[3]);
            if ca != cb {
                worst = worst.max(full[(i, j)].abs());
            }
        }
    }
    worst
}

/// Eigendecomposition oracle for real symmetric tridiagonal input,
/// re-exported from the QL solver.
pub fn oracle_diagonalize(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    tridiag::eigh_symmetric_tridiagonal_matrix(m)
}
