//! Angular-momentum rewriting of the Hamiltonian: two commuting su(2)
//! copies (M from modes 0,1 and S from modes 2,3) assembled on the
//! truncated Fock space, the operator identities tying the mode
//! Hamiltonian to its Dicke-like and magnetic-spin forms, and the
//! classical counterpart functions.
//!
//! Convention: [a_k, a_k*] = hbar, so a*a has eigenvalue hbar n. Every
//! named operator conserves the quanta pair it acts on, so the truncated
//! matrices satisfy the algebra without edge defects.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::classical::ModeState;
use crate::error::Result;
use crate::fock::TruncatedFockSpace;
use crate::quantum;
use crate::sector::FourWaveParams;

type CMatrix = DMatrix<Complex64>;

/// The two su(2) copies and their diagonal generators, in action units.
pub struct SpinOperators {
    pub hbar: f64,
    pub l: CMatrix,
    pub m1: CMatrix,
    pub m2: CMatrix,
    pub m3: CMatrix,
    pub mplus: CMatrix,
    pub mminus: CMatrix,
    pub r: CMatrix,
    pub s1: CMatrix,
    pub s2: CMatrix,
    pub s3: CMatrix,
    pub splus: CMatrix,
    pub sminus: CMatrix,
}

/// Build a matrix from an action on basis tuples: `f(tuple)` returns the
/// image tuple and amplitude, or None when annihilating.
fn matrix_from_action<F>(space: &TruncatedFockSpace, f: F) -> CMatrix
where
    F: Fn(&[u32; 4]) -> Option<([u32; 4], f64)>,
{
    let dim = space.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for (j, tuple) in space.basis.iter().enumerate() {
        if let Some((image, amp)) = f(tuple) {
            if amp != 0.0 {
                let i = space
                    .index_of(&image)
                    .expect("quanta-conserving action stays inside the truncation");
                m[(i, j)] += Complex64::new(amp, 0.0);
            }
        }
    }
    m
}

fn diagonal_from(space: &TruncatedFockSpace, f: impl Fn(&[u32; 4]) -> f64) -> CMatrix {
    matrix_from_action(space, |t| Some((*t, f(t))))
}

/// Assemble both su(2) copies on the truncated space.
pub fn build_spin_ops(space: &TruncatedFockSpace, hbar: f64) -> SpinOperators {
    let h = hbar;
    let l = diagonal_from(space, |t| 0.5 * h * (t[0] + t[1]) as f64);
    let m3 = diagonal_from(space, |t| 0.5 * h * (t[1] as f64 - t[0] as f64));
    let r = diagonal_from(space, |t| 0.5 * h * (t[2] + t[3]) as f64);
    let s3 = diagonal_from(space, |t| 0.5 * h * (t[2] as f64 - t[3] as f64));
    // M+ = a0 a1*: (n0, n1) -> (n0-1, n1+1), amplitude hbar sqrt(n0 (n1+1))
    let mplus = matrix_from_action(space, |t| {
        if t[0] == 0 {
            return None;
        }
        let amp = h * ((t[0] as f64) * (t[1] + 1) as f64).sqrt();
        Some(([t[0] - 1, t[1] + 1, t[2], t[3]], amp))
    });
    let mminus = mplus.adjoint();
    // S+ = a2* a3: (n2, n3) -> (n2+1, n3-1), amplitude hbar sqrt((n2+1) n3)
    let splus = matrix_from_action(space, |t| {
        if t[3] == 0 {
            return None;
        }
        let amp = h * ((t[2] + 1) as f64 * t[3] as f64).sqrt();
        Some(([t[0], t[1], t[2] + 1, t[3] - 1], amp))
    });
    let sminus = splus.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, -0.5);
    let m1 = (&mplus + &mminus) * half;
    let m2 = (&mplus - &mminus) * half_i;
    let s1 = (&splus + &sminus) * half;
    let s2 = (&splus - &sminus) * half_i;
    SpinOperators {
        hbar,
        l,
        m1,
        m2,
        m3,
        mplus,
        mminus,
        r,
        s1,
        s2,
        s3,
        splus,
        sminus,
    }
}

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// One audited relation: its name and the max-entry deviation.
#[derive(Debug, Clone, Serialize)]
pub struct RelationCheck {
    pub relation: String,
    pub deviation: f64,
}

/// Commutator audit over the so(4) = su(2) + su(2) structure, the
/// Casimir identities and the conserved set of the spin Hamiltonian.
#[derive(Debug, Clone, Serialize)]
pub struct CommutatorAudit {
    pub truncation: u32,
    pub hbar: f64,
    pub checks: Vec<RelationCheck>,
    pub max_deviation: f64,
}

/// Run the full relation audit at the given truncation.
pub fn commutator_audit(space: &TruncatedFockSpace, p: &FourWaveParams) -> CommutatorAudit {
    let ops = build_spin_ops(space, p.hbar);
    let ih = Complex64::new(0.0, p.hbar);
    let mut checks = Vec::new();
    let mut push = |name: &str, dev: f64| {
        checks.push(RelationCheck {
            relation: name.to_string(),
            deviation: dev,
        });
    };
    let su2 = [
        ("[M1,M2] - i hbar M3", &ops.m1, &ops.m2, &ops.m3),
        ("[M2,M3] - i hbar M1", &ops.m2, &ops.m3, &ops.m1),
        ("[M3,M1] - i hbar M2", &ops.m3, &ops.m1, &ops.m2),
        ("[S1,S2] - i hbar S3", &ops.s1, &ops.s2, &ops.s3),
        ("[S2,S3] - i hbar S1", &ops.s2, &ops.s3, &ops.s1),
        ("[S3,S1] - i hbar S2", &ops.s3, &ops.s1, &ops.s2),
    ];
    for (name, a, b, c) in su2 {
        push(name, max_abs(&(commutator(a, b) - c * ih)));
    }
    for (mname, m) in [("M1", &ops.m1), ("M2", &ops.m2), ("M3", &ops.m3)] {
        for (sname, s) in [("S1", &ops.s1), ("S2", &ops.s2), ("S3", &ops.s3)] {
            push(&format!("[{mname},{sname}]"), max_abs(&commutator(m, s)));
        }
    }
    for (name, x) in [
        ("[L,M1]", &ops.m1),
        ("[L,M2]", &ops.m2),
        ("[L,M3]", &ops.m3),
    ] {
        push(name, max_abs(&commutator(&ops.l, x)));
    }
    for (name, x) in [
        ("[R,S1]", &ops.s1),
        ("[R,S2]", &ops.s2),
        ("[R,S3]", &ops.s3),
    ] {
        push(name, max_abs(&commutator(&ops.r, x)));
    }
    let hb = Complex64::new(p.hbar, 0.0);
    let m_sq = &ops.m1 * &ops.m1 + &ops.m2 * &ops.m2 + &ops.m3 * &ops.m3;
    let s_sq = &ops.s1 * &ops.s1 + &ops.s2 * &ops.s2 + &ops.s3 * &ops.s3;
    push(
        "M^2 - L(L + hbar)",
        max_abs(&(&m_sq - (&ops.l * &ops.l + &ops.l * hb))),
    );
    push(
        "S^2 - R(R + hbar)",
        max_abs(&(&s_sq - (&ops.r * &ops.r + &ops.r * hb))),
    );
    let h_ms = h_ms(space, p);
    let m3s3 = &ops.m3 + &ops.s3;
    push("[H_MS, L]", max_abs(&commutator(&h_ms, &ops.l)));
    push("[H_MS, R]", max_abs(&commutator(&h_ms, &ops.r)));
    push("[H_MS, M3+S3]", max_abs(&commutator(&h_ms, &m3s3)));
    let max_deviation = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
    CommutatorAudit {
        truncation: space.max_total_quanta,
        hbar: p.hbar,
        checks,
        max_deviation,
    }
}

/// Dicke-like form: (w0 + w1 + 2 g hbar) L + (w1 - w0) M3
/// + w2 a2*a2 + w3 a3*a3 + g (2 L R + 2 M3 S3 + M+ S- + M- S+).
pub fn h_dicke(space: &TruncatedFockSpace, p: &FourWaveParams) -> CMatrix {
    let ops = build_spin_ops(space, p.hbar);
    let [w0, w1, w2, w3] = p.omega;
    let g = Complex64::new(p.g, 0.0);
    let n2 = diagonal_from(space, |t| p.hbar * t[2] as f64);
    let n3 = diagonal_from(space, |t| p.hbar * t[3] as f64);
    &ops.l * Complex64::new(w0 + w1 + 2.0 * p.g * p.hbar, 0.0)
        + &ops.m3 * Complex64::new(w1 - w0, 0.0)
        + n2 * Complex64::new(w2, 0.0)
        + n3 * Complex64::new(w3, 0.0)
        + (&ops.l * &ops.r * Complex64::new(2.0, 0.0)
            + &ops.m3 * &ops.s3 * Complex64::new(2.0, 0.0)
            + &ops.mplus * &ops.sminus
            + &ops.mminus * &ops.splus)
            * g
}

/// Magnetic-spin form: (w0 + w1 + 2 g hbar) L + (w1 - w0) M3
/// + (w2 + w3) R + (w2 - w3) S3 + 2 g (L R + M.S).
pub fn h_ms(space: &TruncatedFockSpace, p: &FourWaveParams) -> CMatrix {
    let ops = build_spin_ops(space, p.hbar);
    let [w0, w1, w2, w3] = p.omega;
    let two_g = Complex64::new(2.0 * p.g, 0.0);
    let m_dot_s = &ops.m1 * &ops.s1 + &ops.m2 * &ops.s2 + &ops.m3 * &ops.s3;
    &ops.l * Complex64::new(w0 + w1 + 2.0 * p.g * p.hbar, 0.0)
        + &ops.m3 * Complex64::new(w1 - w0, 0.0)
        + &ops.r * Complex64::new(w2 + w3, 0.0)
        + &ops.s3 * Complex64::new(w2 - w3, 0.0)
        + (&ops.l * &ops.r + m_dot_s) * two_g
}

/// Max-entry distance between the Dicke form and the mode Hamiltonian.
pub fn dicke_identity_defect(space: &TruncatedFockSpace, p: &FourWaveParams) -> Result<f64> {
    let h_mode = quantum::build_full_hamiltonian(space, p);
    let hd = h_dicke(space, p);
    let mut worst = 0.0f64;
    for i in 0..space.dim() {
        for j in 0..space.dim() {
            let d = (hd[(i, j)] - Complex64::new(h_mode[(i, j)], 0.0)).norm();
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

/// Classical counterpart functions of the spin generators.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalSpin {
    pub l: f64,
    pub m: [f64; 3],
    pub r: f64,
    pub s: [f64; 3],
}

/// Evaluate the bilinear spin functions at a mode configuration:
/// L = (|z0|^2 + |z1|^2)/2, M3 = (|z1|^2 - |z0|^2)/2, M1 + iM2 = z0 conj(z1),
/// and the same on modes (2, 3) for (R, S) with S1 + iS2 = conj(z2) z3.
pub fn classical_spin_functions(z: &ModeState) -> ClassicalSpin {
    let n: [f64; 4] = std::array::from_fn(|k| z.z[k].norm_sqr());
    let mp = z.z[0] * z.z[1].conj();
    let sp = z.z[2].conj() * z.z[3];
    ClassicalSpin {
        l: 0.5 * (n[0] + n[1]),
        m: [mp.re, mp.im, 0.5 * (n[1] - n[0])],
        r: 0.5 * (n[2] + n[3]),
        s: [sp.re, sp.im, 0.5 * (n[2] - n[3])],
    }
}
