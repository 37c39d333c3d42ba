//! `fwm verify`: runs the full invariant suite and reports one line per
//! check. Checks run in parallel across worker threads; FWM_THREADS caps
//! the worker count. Exit code 3 when any check fails.

use std::f64::consts::PI;
use std::sync::Mutex;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fwm_core::classical::{self, ModeState, ReducedCoords};
use fwm_core::coherent::{self, Poly};
use fwm_core::dualhahn::{self, DualHahnParams};
use fwm_core::fock::TruncatedFockSpace;
use fwm_core::kummer;
use fwm_core::quantum;
use fwm_core::sector::{self, FourWaveParams, SectorLabel};
use fwm_core::spinrep;
use fwm_core::tridiag;

use crate::config::{CliError, RunConfig};

struct Check {
    name: &'static str,
    tol: f64,
    run: Box<dyn Fn() -> Result<f64, String> + Send + Sync>,
}

struct Outcome {
    index: usize,
    name: &'static str,
    tol: f64,
    result: Result<f64, String>,
}

fn worker_count(n_checks: usize) -> usize {
    let cap = std::env::var("FWM_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1);
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    cap.unwrap_or(hw).min(n_checks).max(1)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32, CliError> {
    let checks = all_checks(cfg.trunc);
    let n = checks.len();
    let next = Mutex::new(0usize);
    let outcomes = Mutex::new(Vec::<Outcome>::with_capacity(n));
    std::thread::scope(|scope| {
        for _ in 0..worker_count(n) {
            scope.spawn(|| loop {
                let index = {
                    let mut guard = next.lock().unwrap();
                    let i = *guard;
                    if i >= n {
                        break;
                    }
                    *guard += 1;
                    i
                };
                let check = &checks[index];
                let result = (check.run)();
                outcomes.lock().unwrap().push(Outcome {
                    index,
                    name: check.name,
                    tol: check.tol,
                    result,
                });
            });
        }
    });
    let mut outcomes = outcomes.into_inner().unwrap();
    outcomes.sort_by_key(|o| o.index);
    let mut report = String::new();
    let mut failures = 0usize;
    for o in &outcomes {
        match &o.result {
            Ok(dev) if *dev <= o.tol => {
                report.push_str(&format!(
                    "PASS {:<42} deviation {:.3e} <= {:.1e}\n",
                    o.name, dev, o.tol
                ));
            }
            Ok(dev) => {
                failures += 1;
                report.push_str(&format!(
                    "FAIL {:<42} deviation {:.3e} > {:.1e}\n",
                    o.name, dev, o.tol
                ));
            }
            Err(msg) => {
                failures += 1;
                report.push_str(&format!("FAIL {:<42} error: {msg}\n", o.name));
            }
        }
    }
    report.push_str(&format!(
        "{} checks, {} failed\n",
        outcomes.len(),
        failures
    ));
    cfg.emit(&report)?;
    Ok(if failures == 0 { 0 } else { 3 })
}

fn all_checks(trunc: u32) -> Vec<Check> {
    vec![
        Check {
            name: "dual-hahn spectrum vs QL oracle",
            tol: 1e-8,
            run: Box::new(check_spectrum_oracle),
        },
        Check {
            name: "dual-hahn orthogonality",
            tol: 1e-8,
            run: Box::new(check_orthogonality),
        },
        Check {
            name: "full-space block diagonalization",
            tol: 1e-8,
            run: Box::new(move || check_full_blocks(trunc)),
        },
        Check {
            name: "two-level closed form",
            tol: 1e-10,
            run: Box::new(check_two_level),
        },
        Check {
            name: "classical worked trajectory vs RK4",
            tol: 1e-6,
            run: Box::new(check_classical_worked),
        },
        Check {
            name: "classical conserved quantities",
            tol: 1e-8,
            run: Box::new(check_classical_conserved),
        },
        Check {
            name: "classical phase contract",
            tol: 1e-8,
            run: Box::new(check_phase_contract),
        },
        Check {
            name: "kummer shape confinement",
            tol: 1e-8,
            run: Box::new(check_kummer),
        },
        Check {
            name: "nambu bracket finite-difference order",
            tol: 2.0,
            run: Box::new(check_nambu_order),
        },
        Check {
            name: "covariant symbol identity",
            tol: 1e-12,
            run: Box::new(check_symbol_identity),
        },
        Check {
            name: "star product bracket correspondence",
            tol: 1e-2,
            run: Box::new(check_star_bracket),
        },
        Check {
            name: "coherent sector projection",
            tol: 1e-12,
            run: Box::new(check_projection),
        },
        Check {
            name: "reproducing measure moments",
            tol: 1e-4,
            run: Box::new(check_moments),
        },
        Check {
            name: "holomorphic representation intertwining",
            tol: 1e-12,
            run: Box::new(check_holomorphic),
        },
        Check {
            name: "spin Hamiltonian identities",
            tol: 1e-10,
            run: Box::new(check_spin_hamiltonians),
        },
        Check {
            name: "so(4) commutator table",
            tol: 1e-12,
            run: Box::new(check_so4),
        },
    ]
}

fn resonant(g: f64, hbar: f64) -> FourWaveParams {
    FourWaveParams::new([1.0, 1.0, 1.0, 1.0], g, hbar)
}

fn check_spectrum_oracle() -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let gamma = rng.gen_range(0..=10u32);
        let delta = rng.gen_range(0..=10u32);
        let n = rng.gen_range(1..=40u32);
        let p = DualHahnParams::new(gamma, delta, n);
        let diag: Vec<f64> = (0..=n).map(|j| dualhahn::diag_coeff(j, &p)).collect();
        let off: Vec<f64> = (0..n).map(|j| dualhahn::offdiag_coeff(j, &p)).collect();
        let (vals, _) = tridiag::eigh_tridiagonal(&diag, &off).map_err(|e| e.to_string())?;
        for (k, &v) in vals.iter().enumerate() {
            let target = (k as f64) * (k as f64 + gamma as f64 + delta as f64 + 1.0);
            worst = worst.max((v - target).abs() / target.max(1.0));
        }
    }
    Ok(worst)
}

fn check_orthogonality() -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst_scaled = 0.0f64;
    for _ in 0..60 {
        let gamma = rng.gen_range(0..=10u32);
        let delta = rng.gen_range(0..=10u32);
        let n = rng.gen_range(1..=40u32);
        let table = dualhahn::transition_matrix(&DualHahnParams::new(gamma, delta, n))
            .map_err(|e| e.to_string())?;
        // tighter bound 1e-10 below N = 40; scale into the 1e-8 budget
        worst_scaled = worst_scaled.max(dualhahn::orthogonality_defect(&table) * 100.0);
    }
    for &n in &[60u32, 80] {
        let table = dualhahn::transition_matrix(&DualHahnParams::new(3, 5, n))
            .map_err(|e| e.to_string())?;
        worst_scaled = worst_scaled.max(dualhahn::orthogonality_defect(&table));
    }
    Ok(worst_scaled)
}

fn check_full_blocks(trunc: u32) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let p = resonant(rng.gen_range(0.3..1.2), rng.gen_range(0.5..1.5));
    let space = TruncatedFockSpace::new(trunc).map_err(|e| e.to_string())?;
    let full = quantum::build_full_hamiltonian(&space, &p);
    let mut worst = quantum::off_block_defect(&full, &space);
    for c in sector::sectors_within(trunc) {
        let block = quantum::sector_block(&full, &space, &c).map_err(|e| e.to_string())?;
        let (vals, _) = quantum::oracle_diagonalize(&block).map_err(|e| e.to_string())?;
        let shape = sector::shape_of(&c).map_err(|e| e.to_string())?;
        let lambda0 = sector::lambda0(&c, &p).map_err(|e| e.to_string())?;
        let dh = quantum::dual_hahn_params(&shape);
        let mut targets: Vec<f64> = dualhahn::eigenvalues(&dh)
            .iter()
            .map(|l| p.hbar * p.hbar * p.g * l + p.hbar * lambda0)
            .collect();
        targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, t) in sorted.iter().zip(&targets) {
            worst = worst.max((v - t).abs() / t.abs().max(1.0));
        }
    }
    Ok(worst)
}

fn check_two_level() -> Result<f64, String> {
    let p = resonant(0.8, 1.0);
    let mut worst = 0.0f64;
    // gamma = delta = 0: flip probability is sin^2(g hbar t)
    for i in 0..1000 {
        let t = 12.0 * i as f64 / 999.0;
        let (_, _, p_flip) =
            quantum::two_level_closed_form(0, 0, &p, t).map_err(|e| e.to_string())?;
        let dev = (p_flip - (p.g * p.hbar * t).sin().powi(2)).abs();
        if dev > 1e-12 {
            return Err(format!("resonance flip law off by {dev:.3e} at t = {t}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    for _ in 0..20 {
        let gamma = rng.gen_range(0..=6u32);
        let delta = rng.gen_range(0..=6u32);
        // sector with N = 1 and this shape: c = (1, gamma+delta+1, -gamma)
        let c = SectorLabel::new(1, (gamma + delta) as i64 + 1, -(gamma as i64));
        let t = rng.gen_range(0.0..8.0);
        let (m, p_stay, p_flip) =
            quantum::two_level_closed_form(gamma, delta, &p, t).map_err(|e| e.to_string())?;
        if (p_stay + p_flip - 1.0).abs() > 1e-14 {
            return Err("p_stay + p_flip != 1".into());
        }
        let u = quantum::propagator(&c, &p, t).map_err(|e| e.to_string())?;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((m[(i, j)].norm() - u.matrix[(i, j)].norm()).abs());
            }
        }
        worst = worst.max((p_flip - u.matrix[(1, 0)].norm_sqr()).abs());
    }
    Ok(worst)
}

fn worked_initial() -> (ReducedCoords, FourWaveParams) {
    (
        ReducedCoords {
            i0: 1.0,
            psi0: PI / 2.0,
            b: [2.0, 2.0, 0.0],
        },
        resonant(1.0, 1.0),
    )
}

fn check_classical_worked() -> Result<f64, String> {
    let (rc, p) = worked_initial();
    let traj = classical::closed_form(&rc, &p, 0.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    // closed form against the analytic target and the RK4 oracle
    let oracle = classical::rk4_reduced(&rc, &p, 10.0, 1e-3).map_err(|e| e.to_string())?;
    for (k, &(t, i0_oracle, _)) in oracle.iter().enumerate() {
        let i0 = traj.i0(t);
        let target = 1.0 + (0.5f64.sqrt()) * (2.0 * 2.0f64.sqrt() * t).sin();
        worst = worst.max((i0 - target).abs());
        worst = worst.max((i0 - i0_oracle).abs());
        let _ = k;
    }
    Ok(worst)
}

fn check_classical_conserved() -> Result<f64, String> {
    let (rc, p) = worked_initial();
    let aa = classical::ActionAngle {
        i0: rc.i0,
        b: rc.b,
        psi: [rc.psi0, 0.3, -0.4, 0.1],
    };
    let z0 = classical::from_action_angle(&aa);
    let full = classical::rk4_full(&z0, &p, 10.0, 1e-3);
    let action = full.action_drift.iter().fold(0.0f64, |a, &d| a.max(d));
    Ok(full.energy_drift.max(action))
}

fn check_phase_contract() -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut worst = 0.0f64;
    for run in 0..6 {
        let (rc, p) = if run == 0 {
            worked_initial()
        } else {
            let b = [
                rng.gen_range(1.0..3.0),
                rng.gen_range(1.0..3.0),
                rng.gen_range(-0.5..0.5),
            ];
            let (lo, hi) = classical::interval(b);
            let i0 = rng.gen_range(lo + 0.15 * (hi - lo)..hi - 0.15 * (hi - lo));
            (
                ReducedCoords {
                    i0,
                    psi0: rng.gen_range(0.3..PI - 0.3),
                    b,
                },
                resonant(rng.gen_range(0.4..1.3), 1.0),
            )
        };
        let traj = classical::closed_form(&rc, &p, 0.0).map_err(|e| e.to_string())?;
        let coeffs = classical::pqr(traj.energy, rc.b, &p).map_err(|e| e.to_string())?;
        for i in 0..200 {
            let t = 10.0 * i as f64 / 199.0;
            let (i0, phase) = traj.eval(t);
            if (phase.norm() - 1.0).abs() > 1e-9 {
                return Err(format!("|phase| - 1 = {:.3e}", phase.norm() - 1.0));
            }
            let h = classical::reduced_hamiltonian(
                &ReducedCoords {
                    i0,
                    psi0: phase.arg(),
                    b: rc.b,
                },
                &p,
            )
            .map_err(|e| e.to_string())?;
            worst = worst.max((h - traj.energy).abs());
            let di0 = traj.di0(t);
            let quad = coeffs.p * i0 * i0 + coeffs.q * i0 + coeffs.r;
            worst = worst.max((di0 * di0 - quad).abs());
        }
    }
    Ok(worst)
}

fn check_kummer() -> Result<f64, String> {
    let (rc, p) = worked_initial();
    let traj = classical::closed_form(&rc, &p, 0.0).map_err(|e| e.to_string())?;
    let times: Vec<f64> = (0..500).map(|i| 10.0 * i as f64 / 499.0).collect();
    let report = kummer::trajectory_on_shape(&traj, &times);
    // Casimir budget is 1e-9, energy budget 1e-8; scale the former
    Ok((report.max_casimir * 10.0).max(report.max_energy_dev))
}

fn check_nambu_order() -> Result<f64, String> {
    let b = [2.0, 2.0, 0.0];
    let pt = kummer::phi_map(&ReducedCoords {
        i0: 1.2,
        psi0: 0.7,
        b,
    })
    .map_err(|e| e.to_string())?;
    // observables with nonvanishing third derivatives so the central
    // difference carries a genuine O(h^2) truncation error
    let f = |v: [f64; 3]| v[0].powi(3) + v[1] * v[2];
    let g = |v: [f64; 3]| v[1].exp() + v[0] * v[2] * v[2];
    let gc = kummer::casimir_gradient(&pt);
    let gf = [3.0 * pt.x * pt.x, pt.i0, pt.y];
    let gg = [pt.i0 * pt.i0, pt.y.exp(), 2.0 * pt.x * pt.i0];
    let exact = gc[0] * (gf[1] * gg[2] - gf[2] * gg[1])
        - gc[1] * (gf[0] * gg[2] - gf[2] * gg[0])
        + gc[2] * (gf[0] * gg[1] - gf[1] * gg[0]);
    let approx_at = |h: f64| kummer::nambu_bracket_with_step(&f, &g, &pt, h);
    let e1 = (approx_at(2e-2) - exact).abs();
    let e2 = (approx_at(1e-2) - exact).abs();
    if e2 == 0.0 {
        return Ok(0.0);
    }
    // central differences: halving the step should divide the error by ~4
    Ok(((e1 / e2) - 4.0).abs())
}

fn check_symbol_identity() -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = FourWaveParams::new(
            std::array::from_fn(|_| rng.gen_range(0.2..2.0)),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(0.1..2.0),
        );
        let z = ModeState::new(std::array::from_fn(|_| {
            Complex64::from_polar(rng.gen_range(0.1..1.5), rng.gen_range(-PI..PI))
        }));
        let sym = coherent::hamiltonian_observable(&p).covariant_symbol(&z);
        let expect = classical::hamiltonian(&z, &p)
            + p.hbar * p.g * (z.z[0].norm_sqr() + z.z[1].norm_sqr());
        worst = worst.max(sym.im.abs());
        worst = worst.max((sym.re - expect).abs() / expect.abs().max(1.0));
    }
    Ok(worst)
}

fn check_star_bracket() -> Result<f64, String> {
    let one = Complex64::new(1.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let i0 = Poly::monomial([1, 0, 0, 0], [1, 0, 0, 0], one);
    let m = Poly::monomial([1, 0, 1, 0], [0, 1, 0, 1], one);
    let mbar = Poly::monomial([0, 1, 0, 1], [1, 0, 1, 0], one);
    let x = m.add(&mbar).scale(half);
    let y = m.sub(&mbar).scale(Complex64::new(0.0, -0.5));
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let z = ModeState::new(std::array::from_fn(|_| {
        Complex64::from_polar(rng.gen_range(0.4..1.2), rng.gen_range(-PI..PI))
    }));
    let mut worst = 0.0f64;
    for (f, g) in [(&i0, &x), (&i0, &y), (&x, &y)] {
        let exact = coherent::poisson_bracket(f, g).eval(&z);
        let hbar = 1e-3;
        let comm = coherent::star_product(f, g, hbar, 6)
            .sub(&coherent::star_product(g, f, hbar, 6));
        let approx_val = comm.scale(Complex64::new(0.0, -1.0 / hbar)).eval(&z);
        worst = worst.max((approx_val - exact).norm() / exact.norm().max(1.0));
    }
    Ok(worst)
}

fn check_projection() -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let z = ModeState::new(std::array::from_fn(|_| {
            Complex64::from_polar(rng.gen_range(0.4..1.2), rng.gen_range(-PI..PI))
        }));
        let hbar = rng.gen_range(0.4..1.6);
        for c in [
            SectorLabel::new(2, 3, 0),
            SectorLabel::new(3, 1, 1),
            SectorLabel::new(4, 4, -2),
        ] {
            worst = worst.max(coherent::projection_defect(&z, &c, hbar).map_err(|e| e.to_string())?);
        }
    }
    Ok(worst)
}

fn check_moments() -> Result<f64, String> {
    let mut worst = 0.0f64;
    for (c1, c2, c3) in [(1i64, 1i64, 0i64), (2, 3, 0), (3, 2, 1)] {
        let c = SectorLabel::new(c1, c2, c3);
        let shape = sector::shape_of(&c).map_err(|e| e.to_string())?;
        if shape.n > 3 || shape.gamma > 2 || shape.delta > 2 {
            continue;
        }
        for n in 0..=shape.n {
            let moment = coherent::measure_moment(n, &c).map_err(|e| e.to_string())?;
            let expect = coherent::reduced_weight(n, &shape);
            worst = worst.max((moment - expect).abs() / expect);
        }
    }
    Ok(worst)
}

fn check_holomorphic() -> Result<f64, String> {
    let mut worst = 0.0f64;
    for c in sector::sectors_within(6) {
        worst = worst.max(coherent::holomorphic_intertwining_defect(&c).map_err(|e| e.to_string())?);
    }
    Ok(worst)
}

fn check_spin_hamiltonians() -> Result<f64, String> {
    let space = TruncatedFockSpace::new(6).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let p = FourWaveParams::new(
        std::array::from_fn(|_| rng.gen_range(0.2..2.0)),
        rng.gen_range(-1.2..1.2),
        rng.gen_range(0.3..1.5),
    );
    let dicke = spinrep::dicke_identity_defect(&space, &p).map_err(|e| e.to_string())?;
    let hd = spinrep::h_dicke(&space, &p);
    let hms = spinrep::h_ms(&space, &p);
    let diff: DMatrix<Complex64> = hd - hms;
    let ms_defect = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
    // H_MS budget is 1e-12 against the 1e-10 line; scale it up
    Ok(dicke.max(ms_defect * 100.0))
}

fn check_so4() -> Result<f64, String> {
    let space = TruncatedFockSpace::new(6).map_err(|e| e.to_string())?;
    let p = resonant(0.7, 0.9);
    let audit = spinrep::commutator_audit(&space, &p);
    Ok(audit.max_deviation)
}
