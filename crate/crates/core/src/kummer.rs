//! Kummer-shape realization of the reduced phase space: the embedding
//! map, the Casimir function, Nambu bracket checks and verification that
//! closed-form trajectories live on the energy/shape intersection.
//!
//! Coordinates on the ambient space are (x, y, I0); the shape is the zero
//! set of the Casimir C = (G0(I0) - x^2 - y^2) / 2 over the admissible I0
//! interval, punctured at the interval endpoints.

use serde::Serialize;

use crate::classical::{self, ClosedFormTrajectory, ReducedCoords};
use crate::error::Result;
use crate::sector::FourWaveParams;

/// A point of the ambient (x, y, I0) space with its frozen actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapePoint {
    pub x: f64,
    pub y: f64,
    pub i0: f64,
    pub b: [f64; 3],
}

/// Embedding (I0, psi0) -> (sqrt(G0) cos psi0, sqrt(G0) sin psi0, I0).
pub fn phi_map(rc: &ReducedCoords) -> Result<ShapePoint> {
    let (a, bb) = classical::interval(rc.b);
    if !(rc.i0 > a && rc.i0 < bb) {
        return Err(crate::error::FwmError::OutOfInterval {
            i0: rc.i0,
            a,
            b: bb,
        });
    }
    let root = classical::g0(rc.i0, rc.b).max(0.0).sqrt();
    Ok(ShapePoint {
        x: root * rc.psi0.cos(),
        y: root * rc.psi0.sin(),
        i0: rc.i0,
        b: rc.b,
    })
}

/// Casimir C = (G0(I0, b) - x^2 - y^2) / 2; zero on the shape.
pub fn casimir(pt: &ShapePoint) -> f64 {
    0.5 * (classical::g0(pt.i0, pt.b) - pt.x * pt.x - pt.y * pt.y)
}

/// Analytic gradient of the Casimir: (-x, -y, G0'(I0)/2).
pub fn casimir_gradient(pt: &ShapePoint) -> [f64; 3] {
    [-pt.x, -pt.y, 0.5 * classical::g0_prime(pt.i0, pt.b)]
}

fn central_gradient<F>(f: &F, at: [f64; 3]) -> [f64; 3]
where
    F: Fn([f64; 3]) -> f64,
{
    std::array::from_fn(|j| {
        let h = 1e-5 * at[j].abs().max(1.0);
        let mut up = at;
        let mut dn = at;
        up[j] += h;
        dn[j] -= h;
        (f(up) - f(dn)) / (2.0 * h)
    })
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Nambu bracket {f, g} = det[grad C, grad f, grad g] at a point, with
/// the field gradients by central differences (error O(h^2)) and the
/// Casimir gradient analytic.
pub fn nambu_bracket<F, G>(f: &F, g: &G, pt: &ShapePoint) -> f64
where
    F: Fn([f64; 3]) -> f64,
    G: Fn([f64; 3]) -> f64,
{
    let at = [pt.x, pt.y, pt.i0];
    det3([casimir_gradient(pt), central_gradient(f, at), central_gradient(g, at)])
}

/// Nambu bracket with an explicit finite-difference step, for
/// convergence-order checks of the O(h^2) gradient approximation.
pub fn nambu_bracket_with_step<F, G>(f: &F, g: &G, pt: &ShapePoint, h: f64) -> f64
where
    F: Fn([f64; 3]) -> f64,
    G: Fn([f64; 3]) -> f64,
{
    let at = [pt.x, pt.y, pt.i0];
    let grad = |f: &dyn Fn([f64; 3]) -> f64| -> [f64; 3] {
        std::array::from_fn(|j| {
            let mut up = at;
            let mut dn = at;
            up[j] += h;
            dn[j] -= h;
            (f(up) - f(dn)) / (2.0 * h)
        })
    };
    det3([casimir_gradient(pt), grad(f), grad(g)])
}

/// The reduced Hamiltonian as a function on the ambient space:
/// H = frozen + detuning*I0 + g [I0(b2+b3-I0) + (b1-I0)(I0-b3) + 2x].
pub fn h_red_on_shape(x: f64, i0: f64, b: [f64; 3], p: &FourWaveParams) -> f64 {
    classical::frozen_part(b, p)
        + p.detuning() * i0
        + p.g * (classical::quad_part(i0, b) + 2.0 * x)
}

/// One sampled point of a trajectory pushed to the shape.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShapeSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub i0: f64,
}

/// Verification report for a closed-form trajectory on the shape.
#[derive(Debug, Clone, Serialize)]
pub struct ShapeReport {
    pub samples: Vec<ShapeSample>,
    /// max |C| over the samples.
    pub max_casimir: f64,
    /// max |H_red(x, y, I0) - E| over the samples.
    pub max_energy_dev: f64,
}

/// Push a closed-form trajectory through the embedding and verify that
/// every sample satisfies C = 0 and H_red = E.
pub fn trajectory_on_shape(traj: &ClosedFormTrajectory, times: &[f64]) -> ShapeReport {
    let b = traj.b;
    let p = traj.params;
    let mut samples = Vec::with_capacity(times.len());
    let mut max_casimir = 0.0f64;
    let mut max_energy_dev = 0.0f64;
    for &t in times {
        let (i0, phase) = traj.eval(t);
        let root = classical::g0(i0, b).max(0.0).sqrt();
        let pt = ShapePoint {
            x: root * phase.re,
            y: root * phase.im,
            i0,
            b,
        };
        max_casimir = max_casimir.max(casimir(&pt).abs());
        max_energy_dev =
            max_energy_dev.max((h_red_on_shape(pt.x, i0, b, &p) - traj.energy).abs());
        samples.push(ShapeSample {
            t,
            x: pt.x,
            y: pt.y,
            i0,
        });
    }
    ShapeReport {
        samples,
        max_casimir,
        max_energy_dev,
    }
}

/// Mesh of the shape parameterized by an (I0, psi0) grid, interval
/// endpoints excluded (the symplectic-leaf punctures). Rows are
/// (i0, psi0, x, y).
pub fn shape_mesh(b: [f64; 3], n_i0: usize, n_psi0: usize) -> Vec<(f64, f64, f64, f64)> {
    let (lo, hi) = classical::interval(b);
    let mut out = Vec::with_capacity(n_i0 * n_psi0);
    for i in 1..=n_i0 {
        // interior nodes only: endpoints lo, hi are excluded
        let i0 = lo + (hi - lo) * i as f64 / (n_i0 as f64 + 1.0);
        let root = classical::g0(i0, b).max(0.0).sqrt();
        for j in 0..n_psi0 {
            let psi0 = 2.0 * std::f64::consts::PI * j as f64 / n_psi0 as f64;
            out.push((i0, psi0, root * psi0.cos(), root * psi0.sin()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn unit_params() -> FourWaveParams {
        FourWaveParams::new([1.0, 1.0, 1.0, 1.0], 1.0, 1.0)
    }

    #[test]
    fn phi_map_examples() {
        let rc = ReducedCoords {
            i0: 1.0,
            psi0: 0.0,
            b: [2.0, 2.0, 0.0],
        };
        let pt = phi_map(&rc).unwrap();
        assert_relative_eq!(pt.x, 1.0, epsilon = 1e-14);
        assert_relative_eq!(pt.y, 0.0, epsilon = 1e-14);
        assert_eq!(pt.i0, 1.0);

        let pt = phi_map(&ReducedCoords {
            psi0: FRAC_PI_2,
            ..rc
        })
        .unwrap();
        assert!(pt.x.abs() < 1e-15);
        assert_relative_eq!(pt.y, 1.0, epsilon = 1e-14);

        assert!(phi_map(&ReducedCoords {
            i0: 2.0,
            psi0: 0.0,
            b: [2.0, 2.0, 0.0],
        })
        .is_err());
    }

    #[test]
    fn casimir_zero_on_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for _ in 0..100 {
            let b = [
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.5..3.0),
                rng.gen_range(-0.5..0.5),
            ];
            let (lo, hi) = classical::interval(b);
            if hi - lo < 0.1 {
                continue;
            }
            let rc = ReducedCoords {
                i0: rng.gen_range(lo + 0.01..hi - 0.01),
                psi0: rng.gen_range(-PI..PI),
                b,
            };
            let pt = phi_map(&rc).unwrap();
            assert!(casimir(&pt).abs() <= 1e-12);
        }
    }

    #[test]
    fn casimir_axis_value() {
        let b = [2.0, 2.0, 0.0];
        let pt = ShapePoint {
            x: 0.0,
            y: 0.0,
            i0: 1.0,
            b,
        };
        assert_relative_eq!(casimir(&pt), 0.5, epsilon = 1e-14);
        assert!(casimir(&pt) > 0.0);
    }

    #[test]
    fn nambu_coordinate_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..40 {
            let b = [
                rng.gen_range(0.8..2.5),
                rng.gen_range(0.8..2.5),
                rng.gen_range(-0.3..0.3),
            ];
            let (lo, hi) = classical::interval(b);
            if hi - lo < 0.3 {
                continue;
            }
            let rc = ReducedCoords {
                i0: rng.gen_range(lo + 0.1..hi - 0.1),
                psi0: rng.gen_range(-PI..PI),
                b,
            };
            let pt = phi_map(&rc).unwrap();
            let fx = |v: [f64; 3]| v[0];
            let fy = |v: [f64; 3]| v[1];
            let fi = |v: [f64; 3]| v[2];
            assert_relative_eq!(
                nambu_bracket(&fi, &fx, &pt),
                -pt.y,
                epsilon = 1e-8,
                max_relative = 1e-8
            );
            assert_relative_eq!(
                nambu_bracket(&fi, &fy, &pt),
                pt.x,
                epsilon = 1e-8,
                max_relative = 1e-8
            );
            assert_relative_eq!(
                nambu_bracket(&fx, &fy, &pt),
                0.5 * classical::g0_prime(pt.i0, pt.b),
                epsilon = 1e-7,
                max_relative = 1e-7
            );
        }
    }

    #[test]
    fn casimir_commutes_with_fields() {
        let b = [2.0, 3.0, 0.5];
        let pt = ShapePoint {
            x: 0.4,
            y: -0.3,
            i0: 1.2,
            b,
        };
        let poly = |v: [f64; 3]| 0.3 * v[0] * v[0] - 1.7 * v[1] * v[2] + v[2].powi(3);
        let cas = move |v: [f64; 3]| {
            0.5 * (classical::g0(v[2], b) - v[0] * v[0] - v[1] * v[1])
        };
        assert!(nambu_bracket(&cas, &poly, &pt).abs() <= 1e-6);
        assert!(nambu_bracket(&poly, &cas, &pt).abs() <= 1e-6);
    }

    #[test]
    fn finite_difference_order() {
        // the bracket error must shrink ~h^2; compare two explicit h's
        let b = [2.0, 2.0, 0.0];
        let pt = ShapePoint {
            x: 0.6,
            y: 0.2,
            i0: 1.3,
            b,
        };
        let f = |v: [f64; 3]| (v[0] * v[2]).sin();
        let g = |v: [f64; 3]| (v[1] + v[2] * v[2]).cos();
        let bracket_h = |h: f64| -> f64 {
            let at = [pt.x, pt.y, pt.i0];
            let grad = |f: &dyn Fn([f64; 3]) -> f64| -> [f64; 3] {
                std::array::from_fn(|j| {
                    let mut up = at;
                    let mut dn = at;
                    up[j] += h;
                    dn[j] -= h;
                    (f(up) - f(dn)) / (2.0 * h)
                })
            };
            det3([casimir_gradient(&pt), grad(&f), grad(&g)])
        };
        let exact = bracket_h(1e-7); // near-converged reference
        let e1 = (bracket_h(1e-2) - exact).abs();
        let e2 = (bracket_h(5e-3) - exact).abs();
        assert!(e1 > 0.0 && e2 > 0.0);
        let ratio = e1 / e2;
        assert!(
            (2.5..6.0).contains(&ratio),
            "expected ~4x error reduction, got {ratio}"
        );
    }

    #[test]
    fn worked_trajectory_on_shape() {
        let rc = ReducedCoords {
            i0: 1.0,
            psi0: FRAC_PI_2,
            b: [2.0, 2.0, 0.0],
        };
        let p = unit_params();
        let traj = classical::closed_form(&rc, &p, 0.0).unwrap();
        let times: Vec<f64> = (0..=500).map(|i| 0.02 * i as f64).collect();
        let report = trajectory_on_shape(&traj, &times);
        assert!(report.max_casimir <= 1e-9, "casimir {}", report.max_casimir);
        assert!(
            report.max_energy_dev <= 1e-8,
            "energy dev {}",
            report.max_energy_dev
        );
        assert_eq!(report.samples.len(), times.len());
    }

    #[test]
    fn stationary_trajectory_is_single_point() {
        let rc = ReducedCoords {
            i0: 1.0,
            psi0: 0.0,
            b: [2.0, 2.0, 0.0],
        };
        let p = unit_params();
        let traj = classical::closed_form(&rc, &p, 0.0).unwrap();
        let times: Vec<f64> = (0..=50).map(|i| 0.2 * i as f64).collect();
        let report = trajectory_on_shape(&traj, &times);
        let first = report.samples[0];
        for s in &report.samples {
            assert!((s.x - first.x).abs() < 1e-9);
            assert!((s.y - first.y).abs() < 1e-9);
            assert!((s.i0 - first.i0).abs() < 1e-9);
        }
    }

    #[test]
    fn mesh_shape_and_punctures() {
        let b = [2.0, 2.0, 0.0];
        let mesh = shape_mesh(b, 200, 100);
        assert_eq!(mesh.len(), 200 * 100);
        let (lo, hi) = classical::interval(b);
        for &(i0, _, x, y) in &mesh {
            assert!(i0 > lo && i0 < hi, "endpoint not excluded: {i0}");
            // every mesh node is on-shell
            assert!(
                (x * x + y * y - classical::g0(i0, b)).abs() <= 1e-10,
                "off-shell node"
            );
        }
    }
}
