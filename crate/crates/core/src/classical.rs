//! Classical phase-space dynamics: Hamiltonian evaluation, the
//! action-angle transform, reduced equations, resonant closed-form
//! solutions, outer-phase quadratures and the RK4 oracle.
//!
//! Conventions: z_k carry sqrt(action) units; the frozen actions are
//! b1 = |z0|^2 + |z1|^2, b2 = |z2|^2 + |z3|^2, b3 = |z0|^2 - |z2|^2, and
//! the dynamical action is I0 = |z0|^2 with max{0, b3} < I0 < min{b1,
//! b2 + b3} in the interior.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FwmError, Result};
use crate::sector::FourWaveParams;

/// Point of the four-mode phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub z: [Complex64; 4],
}

impl ModeState {
    pub fn new(z: [Complex64; 4]) -> Self {
        Self { z }
    }

    /// True when every amplitude is nonzero (interior of the phase space,
    /// where all angles are defined).
    pub fn is_interior(&self) -> bool {
        self.z.iter().all(|w| w.norm_sqr() > 0.0)
    }
}

/// Action-angle coordinates: the dynamical action I0, the frozen actions
/// (b1, b2, b3) and the angles (psi0, psi1, psi2, psi3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionAngle {
    pub i0: f64,
    pub b: [f64; 3],
    pub psi: [f64; 4],
}

/// Reduced coordinates: only (I0, psi0) evolve; b is frozen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCoords {
    pub i0: f64,
    pub psi0: f64,
    pub b: [f64; 3],
}

/// The Hamilton function
/// H = sum omega_k |z_k|^2 + g(|z0|^2|z3|^2 + |z1|^2|z2|^2
///     + 2 Re(z0 conj(z1) z2 conj(z3))).
pub fn hamiltonian(z: &ModeState, p: &FourWaveParams) -> f64 {
    let n: Vec<f64> = z.z.iter().map(|w| w.norm_sqr()).collect();
    let linear: f64 = (0..4).map(|k| p.omega[k] * n[k]).sum();
    let cross = (z.z[0] * z.z[1].conj() * z.z[2] * z.z[3].conj()).re;
    linear + p.g * (n[0] * n[3] + n[1] * n[2] + 2.0 * cross)
}

/// Forward action-angle transform. Fails on the boundary where some
/// amplitude vanishes and its angle is undefined.
pub fn to_action_angle(z: &ModeState) -> Result<ActionAngle> {
    for (k, w) in z.z.iter().enumerate() {
        if w.norm_sqr() == 0.0 {
            return Err(FwmError::OnBoundary(k));
        }
    }
    let n: Vec<f64> = z.z.iter().map(|w| w.norm_sqr()).collect();
    let i0 = n[0];
    let b = [n[0] + n[1], n[2] + n[3], n[0] - n[2]];
    let arg: Vec<f64> = z.z.iter().map(|w| w.arg()).collect();
    let psi1 = arg[1];
    let psi2 = arg[3];
    let psi3 = arg[3] - arg[2];
    let psi0 = arg[0] - arg[1] + arg[2] - arg[3];
    Ok(ActionAngle {
        i0,
        b,
        psi: [psi0, psi1, psi2, psi3],
    })
}

/// Inverse transform:
/// z0 = sqrt(I0) e^{i(psi0+psi1+psi3)}, z1 = sqrt(b1-I0) e^{i psi1},
/// z2 = sqrt(I0-b3) e^{i(psi2-psi3)}, z3 = sqrt(b2+b3-I0) e^{i psi2}.
pub fn from_action_angle(aa: &ActionAngle) -> ModeState {
    let [b1, b2, b3] = aa.b;
    let [p0, p1, p2, p3] = aa.psi;
    ModeState::new([
        Complex64::from_polar(aa.i0.max(0.0).sqrt(), p0 + p1 + p3),
        Complex64::from_polar((b1 - aa.i0).max(0.0).sqrt(), p1),
        Complex64::from_polar((aa.i0 - b3).max(0.0).sqrt(), p2 - p3),
        Complex64::from_polar((b2 + b3 - aa.i0).max(0.0).sqrt(), p2),
    ])
}

/// The quartic factor G0(I0) = I0 (b1-I0) (I0-b3) (b2+b3-I0).
pub fn g0(i0: f64, b: [f64; 3]) -> f64 {
    i0 * (b[0] - i0) * (i0 - b[2]) * (b[1] + b[2] - i0)
}

/// d G0 / d I0 with the frozen actions held fixed.
pub fn g0_prime(i0: f64, b: [f64; 3]) -> f64 {
    let s = b[0] + b[1] + 2.0 * b[2];
    let x = b[0] + b[2];
    let y = b[1] + b[2];
    4.0 * i0.powi(3) - 3.0 * s * i0 * i0 + 2.0 * (x * y + b[0] * b[2]) * i0 - b[0] * b[2] * y
}

/// The open interval ]a, b[ of admissible I0.
pub fn interval(b: [f64; 3]) -> (f64, f64) {
    (0.0f64.max(b[2]), b[0].min(b[1] + b[2]))
}

fn check_interior(i0: f64, b: [f64; 3]) -> Result<()> {
    let (a, bb) = interval(b);
    if i0 > a && i0 < bb {
        Ok(())
    } else {
        Err(FwmError::OutOfInterval { i0, a, b: bb })
    }
}

/// Quadratic part of the reduced Hamiltonian:
/// A(I0) = I0(b2+b3-I0) + (b1-I0)(I0-b3).
pub(crate) fn quad_part(i0: f64, b: [f64; 3]) -> f64 {
    i0 * (b[1] + b[2] - i0) + (b[0] - i0) * (i0 - b[2])
}

/// Frozen part omega1 b1 + omega3 b2 + (omega3-omega2) b3.
pub(crate) fn frozen_part(b: [f64; 3], p: &FourWaveParams) -> f64 {
    p.omega[1] * b[0] + p.omega[3] * b[1] + (p.omega[3] - p.omega[2]) * b[2]
}

/// Reduced Hamiltonian
/// H = frozen + detuning*I0 + g[A(I0) + 2 sqrt(G0) cos psi0].
pub fn reduced_hamiltonian(rc: &ReducedCoords, p: &FourWaveParams) -> Result<f64> {
    check_interior(rc.i0, rc.b)?;
    let root = g0(rc.i0, rc.b).max(0.0).sqrt();
    Ok(frozen_part(rc.b, p)
        + p.detuning() * rc.i0
        + p.g * (quad_part(rc.i0, rc.b) + 2.0 * root * rc.psi0.cos()))
}

/// Sign pattern of the quadratic (I0')^2 = p I0^2 + q I0 + r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Delta > 0 and p < 0: bounded oscillation (case a).
    Oscillatory,
    /// Delta = 0 and p > 0: exponential (case b).
    Exponential,
    /// Delta < 0 and p > 0: hyperbolic-sine (case c).
    Hyperbolic,
    /// Any other sign pattern; solved numerically.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticCoeffs {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub delta: f64,
    pub regime: Regime,
}

/// Coefficients of the I0 equation of motion under frequency resonance:
/// with E~ = E - frozen,
/// p = -g^2 (b1-b2)^2 - 4 g E~,
/// q = 2 g^2 b1 b3 (b1-b2) + 2 g (b1+b2+2b3) E~,
/// r = -(E~ + g b1 b3)^2.
pub fn pqr(e: f64, b: [f64; 3], params: &FourWaveParams) -> Result<QuadraticCoeffs> {
    if !params.is_resonant() {
        return Err(FwmError::NotResonant(params.detuning()));
    }
    if params.g == 0.0 {
        return Err(FwmError::ZeroCoupling);
    }
    let g = params.g;
    let [b1, b2, b3] = b;
    let et = e - frozen_part(b, params);
    let p = -g * g * (b1 - b2).powi(2) - 4.0 * g * et;
    let q = 2.0 * g * g * b1 * b3 * (b1 - b2) + 2.0 * g * (b1 + b2 + 2.0 * b3) * et;
    let r = -(et + g * b1 * b3).powi(2);
    let delta = q * q - 4.0 * p * r;
    let regime = if delta > 0.0 && p < 0.0 {
        Regime::Oscillatory
    } else if delta == 0.0 && p > 0.0 {
        Regime::Exponential
    } else if delta < 0.0 && p > 0.0 {
        Regime::Hyperbolic
    } else {
        Regime::Fallback
    };
    Ok(QuadraticCoeffs {
        p,
        q,
        r,
        delta,
        regime,
    })
}

/// Closed-form (I0, e^{i psi0}) trajectory for one of the three resonant
/// regimes. Evaluate with [`ClosedFormTrajectory::eval`].
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormTrajectory {
    pub coeffs: QuadraticCoeffs,
    pub energy: f64,
    pub b: [f64; 3],
    pub params: FourWaveParams,
    pub t0: f64,
    /// Integration constant of the matched case.
    pub c: f64,
    /// +1/-1 time orientation chosen to match the initial slope.
    pub s: f64,
}

impl ClosedFormTrajectory {
    /// I0 at time t.
    pub fn i0(&self, t: f64) -> f64 {
        let QuadraticCoeffs { p, q, delta, .. } = self.coeffs;
        let dt = t - self.t0;
        match self.coeffs.regime {
            Regime::Oscillatory => {
                // I0 = (sqrt(D)/2p) sin(-sqrt(-p)(t-t0) + C) - q/2p
                (delta.sqrt() / (2.0 * p)) * (-(-p).sqrt() * self.s * dt + self.c).sin()
                    - q / (2.0 * p)
            }
            Regime::Exponential => self.c * (self.s * p.sqrt() * dt).exp() - q / (2.0 * p),
            Regime::Hyperbolic => {
                ((-delta).sqrt() / (2.0 * p)) * (self.s * p.sqrt() * dt + self.c).sinh()
                    - q / (2.0 * p)
            }
            Regime::Fallback => unreachable!("fallback has no closed form"),
        }
    }

    /// dI0/dt at time t.
    pub fn di0(&self, t: f64) -> f64 {
        let QuadraticCoeffs { p, delta, .. } = self.coeffs;
        let dt = t - self.t0;
        match self.coeffs.regime {
            Regime::Oscillatory => {
                let w = (-p).sqrt();
                (delta.sqrt() / (2.0 * p)) * (-w * self.s * dt + self.c).cos() * (-w * self.s)
            }
            Regime::Exponential => self.c * self.s * p.sqrt() * (self.s * p.sqrt() * dt).exp(),
            Regime::Hyperbolic => {
                ((-delta).sqrt() / 2.0 / p.sqrt()) * self.s * (self.s * p.sqrt() * dt + self.c).cosh()
            }
            Regime::Fallback => unreachable!(),
        }
    }

    /// (I0, e^{i psi0}) at time t. The phase is recovered algebraically:
    /// cos psi0 from the energy identity and sin psi0 from dI0/dt, which
    /// is exactly unit-modulus by the defining quadratic.
    pub fn eval(&self, t: f64) -> (f64, Complex64) {
        let i0 = self.i0(t);
        let root = g0(i0, self.b).max(0.0).sqrt();
        let denom = 2.0 * self.params.g * root;
        if denom == 0.0 {
            // endpoint contact; the angle degenerates
            return (i0, Complex64::new(1.0, 0.0));
        }
        let et = self.energy - frozen_part(self.b, &self.params);
        let cos = (et - self.params.g * quad_part(i0, self.b)) / denom;
        let sin = self.di0(t) / denom;
        let z = Complex64::new(cos, sin);
        (i0, z / z.norm())
    }
}

/// Build the case-matched closed form from initial reduced coordinates at
/// time t0. Fallback sign patterns return UnsupportedRegime; route those
/// to [`rk4_reduced`].
pub fn closed_form(
    rc0: &ReducedCoords,
    params: &FourWaveParams,
    t0: f64,
) -> Result<ClosedFormTrajectory> {
    check_interior(rc0.i0, rc0.b)?;
    let energy = reduced_hamiltonian(rc0, params)?;
    let mut coeffs = pqr(energy, rc0.b, params)?;
    // Delta = 0 with p < 0 only happens when the initial point sits at the
    // double root (a critical point of H_red): the motion is frozen, which
    // the oscillatory formula with zero amplitude represents exactly.
    let scale = coeffs.q * coeffs.q + (4.0 * coeffs.p * coeffs.r).abs();
    if coeffs.regime == Regime::Fallback
        && coeffs.p < 0.0
        && coeffs.delta >= -1e-10 * scale.max(1.0)
    {
        coeffs.delta = coeffs.delta.max(0.0);
        coeffs.regime = Regime::Oscillatory;
    }
    let slope = 2.0 * params.g * g0(rc0.i0, rc0.b).max(0.0).sqrt() * rc0.psi0.sin();
    trajectory_from_coeffs(coeffs, energy, rc0.b, params, rc0.i0, slope, t0)
}

/// Assemble a trajectory directly from quadratic coefficients, an initial
/// I0 and the initial slope dI0/dt. Used by [`closed_form`] and by the
/// identity tests for the exponential/hyperbolic cases, which are not
/// reachable from interior initial data.
pub fn trajectory_from_coeffs(
    coeffs: QuadraticCoeffs,
    energy: f64,
    b: [f64; 3],
    params: &FourWaveParams,
    i0: f64,
    slope: f64,
    t0: f64,
) -> Result<ClosedFormTrajectory> {
    let QuadraticCoeffs { p, q, delta, .. } = coeffs;
    let (c, s) = match coeffs.regime {
        Regime::Oscillatory => {
            if delta == 0.0 {
                // zero-amplitude (stationary) degenerate case; C arbitrary
                return Ok(ClosedFormTrajectory {
                    coeffs,
                    energy,
                    b,
                    params: *params,
                    t0,
                    c: 0.0,
                    s: 1.0,
                });
            }
            let arg = ((2.0 * p * i0 + q) / delta.sqrt()).clamp(-1.0, 1.0);
            let c_main = arg.asin();
            // slope at t0 is -sqrt(-p) (sqrt(D)/2p) cos C; pick the branch
            // whose sign matches
            let slope_main = -(-p).sqrt() * (delta.sqrt() / (2.0 * p)) * c_main.cos();
            if slope * slope_main >= 0.0 || slope_main == 0.0 {
                (c_main, 1.0)
            } else {
                (std::f64::consts::PI - c_main, 1.0)
            }
        }
        Regime::Exponential => {
            let c = i0 + q / (2.0 * p);
            let s = if slope * c >= 0.0 { 1.0 } else { -1.0 };
            (c, s)
        }
        Regime::Hyperbolic => {
            let c = ((2.0 * p * i0 + q) / (-delta).sqrt()).asinh();
            // slope at t0 is s sqrt(-delta) cosh(C) / (2 sqrt(p)) with
            // cosh > 0
            let s = if slope >= 0.0 { 1.0 } else { -1.0 };
            (c, s)
        }
        Regime::Fallback => return Err(FwmError::UnsupportedRegime { p, delta }),
    };
    Ok(ClosedFormTrajectory {
        coeffs,
        energy,
        b,
        params: *params,
        t0,
        c,
        s,
    })
}

/// Fixed-step RK4 on the reduced system
/// dI0/dt = 2 g sqrt(G0) sin psi0,
/// dpsi0/dt = detuning + g A'(I0) + g G0'(I0) cos(psi0) / sqrt(G0).
/// Numerical fallback for sign patterns without a closed form (and the
/// non-resonant case).
pub fn rk4_reduced(
    rc0: &ReducedCoords,
    params: &FourWaveParams,
    t1: f64,
    dt: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    assert!(dt > 0.0);
    check_interior(rc0.i0, rc0.b)?;
    let b = rc0.b;
    let g = params.g;
    let det = params.detuning();
    let deriv = |y: [f64; 2]| -> [f64; 2] {
        let (i0, psi0) = (y[0], y[1]);
        let root = g0(i0, b).max(0.0).sqrt();
        let s = b[0] + b[1] + 2.0 * b[2];
        let a_prime = -4.0 * i0 + s;
        let dpsi = if root > 0.0 {
            det + g * a_prime + g * g0_prime(i0, b) * psi0.cos() / root
        } else {
            det + g * a_prime
        };
        [2.0 * g * root * psi0.sin(), dpsi]
    };
    let steps = (t1 / dt).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = [rc0.i0, rc0.psi0];
    let mut t = 0.0;
    out.push((t, y[0], y[1]));
    for _ in 0..steps {
        let h = dt.min(t1 - t);
        let k1 = deriv(y);
        let k2 = deriv([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = deriv([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = deriv([y[0] + h * k3[0], y[1] + h * k3[1]]);
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        t += h;
        out.push((t, y[0], y[1]));
    }
    Ok(out)
}

/// Integrate the outer-phase equations along a known (I0, e^{i psi0})
/// trajectory by per-step Simpson quadrature (midpoints included, so the
/// global error is O(h^4)). Returns (psi1, psi2, psi3) at each grid time.
pub fn integrate_outer_phases<F>(
    traj: F,
    b: [f64; 3],
    params: &FourWaveParams,
    grid: &[f64],
    psi_init: [f64; 3],
) -> Result<Vec<[f64; 3]>>
where
    F: Fn(f64) -> (f64, Complex64),
{
    let g = params.g;
    let [w0, w1, w2, w3] = params.omega;
    let _ = w0;
    let [b1, b2, b3] = b;
    let rates = |t: f64| -> Result<[f64; 3]> {
        let (i0, phase) = traj(t);
        let gg = g0(i0, b);
        if gg <= 1e-14 {
            return Err(FwmError::SingularPoint(t));
        }
        let cos_over_root = phase.re / gg.sqrt();
        Ok([
            w1 + g * (i0 - b3) + g * i0 * (i0 - b3) * (b2 + b3 - i0) * cos_over_root,
            w3 + g * i0 + g * i0 * (b1 - i0) * (i0 - b3) * cos_over_root,
            (w3 - w2)
                + g * (2.0 * i0 - b1)
                + g * i0 * (b1 - i0) * ((i0 - b3) - (b2 + b3 - i0)) * cos_over_root,
        ])
    };
    let mut out = Vec::with_capacity(grid.len());
    let mut psi = psi_init;
    out.push(psi);
    for w in grid.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        let h = tb - ta;
        let fa = rates(ta)?;
        let fm = rates(0.5 * (ta + tb))?;
        let fb = rates(tb)?;
        for j in 0..3 {
            psi[j] += h / 6.0 * (fa[j] + 4.0 * fm[j] + fb[j]);
        }
        out.push(psi);
    }
    Ok(out)
}

/// A full-space RK4 run with conservation reporting.
#[derive(Debug, Clone)]
pub struct FullTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModeState>,
    /// Max |H(t) - H(0)| along the run.
    pub energy_drift: f64,
    /// Max |b_k(t) - b_k(0)| for the three frozen actions.
    pub action_drift: [f64; 3],
}

fn frozen_actions(z: &ModeState) -> [f64; 3] {
    let n: Vec<f64> = z.z.iter().map(|w| w.norm_sqr()).collect();
    [n[0] + n[1], n[2] + n[3], n[0] - n[2]]
}

/// Classic fixed-step RK4 on the equations of motion
/// dz_k/dt = i dH/d(conj z_k).
pub fn rk4_full(z0: &ModeState, params: &FourWaveParams, t1: f64, dt: f64) -> FullTrajectory {
    assert!(dt > 0.0);
    let g = params.g;
    let w = params.omega;
    let i = Complex64::new(0.0, 1.0);
    let deriv = |z: &[Complex64; 4]| -> [Complex64; 4] {
        let n: Vec<f64> = z.iter().map(|v| v.norm_sqr()).collect();
        [
            i * (w[0] * z[0] + g * (z[0] * n[3] + z[1] * z[2].conj() * z[3])),
            i * (w[1] * z[1] + g * (z[1] * n[2] + z[0] * z[2] * z[3].conj())),
            i * (w[2] * z[2] + g * (z[2] * n[1] + z[0].conj() * z[1] * z[3])),
            i * (w[3] * z[3] + g * (z[3] * n[0] + z[0] * z[1].conj() * z[2])),
        ]
    };
    let steps = (t1 / dt).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let e0 = hamiltonian(z0, params);
    let a0 = frozen_actions(z0);
    let mut energy_drift = 0.0f64;
    let mut action_drift = [0.0f64; 3];
    let mut z = z0.z;
    let mut t = 0.0;
    times.push(t);
    states.push(*z0);
    for _ in 0..steps {
        let h = dt.min(t1 - t);
        let k1 = deriv(&z);
        let add = |z: &[Complex64; 4], k: &[Complex64; 4], f: f64| -> [Complex64; 4] {
            [z[0] + f * k[0], z[1] + f * k[1], z[2] + f * k[2], z[3] + f * k[3]]
        };
        let k2 = deriv(&add(&z, &k1, 0.5 * h));
        let k3 = deriv(&add(&z, &k2, 0.5 * h));
        let k4 = deriv(&add(&z, &k3, h));
        for j in 0..4 {
            z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        t += h;
        let state = ModeState::new(z);
        energy_drift = energy_drift.max((hamiltonian(&state, params) - e0).abs());
        let a = frozen_actions(&state);
        for j in 0..3 {
            action_drift[j] = action_drift[j].max((a[j] - a0[j]).abs());
        }
        times.push(t);
        states.push(state);
    }
    FullTrajectory {
        times,
        states,
        energy_drift,
        action_drift,
    }
}
