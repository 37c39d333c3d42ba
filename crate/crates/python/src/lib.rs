//! Python bindings for the four-wave mixing library: sector reduction,
//! quantum spectra and propagation, classical closed-form dynamics, the
//! Kummer-shape reduction, reduced coherent states and the spin-operator
//! audits.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use fwm_core::classical::{self, ReducedCoords};
use fwm_core::coherent;
use fwm_core::fock::TruncatedFockSpace;
use fwm_core::kummer;
use fwm_core::quantum;
use fwm_core::sector::{self, FourWaveParams, SectorLabel};
use fwm_core::spinrep;
use fwm_core::FwmError;
use num_complex::Complex64;

fn domain(e: FwmError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Model parameters: mode frequencies, coupling and the action unit.
#[pyclass(name = "Params", skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: FourWaveParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (omega=None, g=1.0, hbar=1.0))]
    fn new(omega: Option<[f64; 4]>, g: f64, hbar: f64) -> PyResult<Self> {
        if hbar <= 0.0 {
            return Err(PyValueError::new_err("hbar must be positive"));
        }
        Ok(Self {
            inner: FourWaveParams::new(omega.unwrap_or([1.0; 4]), g, hbar),
        })
    }

    #[getter]
    fn omega(&self) -> [f64; 4] {
        self.inner.omega
    }

    #[getter]
    fn g(&self) -> f64 {
        self.inner.g
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.inner.hbar
    }

    fn detuning(&self) -> f64 {
        self.inner.detuning()
    }

    fn is_resonant(&self) -> bool {
        self.inner.is_resonant()
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(omega={:?}, g={}, hbar={})",
            self.inner.omega, self.inner.g, self.inner.hbar
        )
    }
}

/// A conserved-charge sector (c1, c2, c3) with its shape parameters.
#[pyclass(name = "Sector")]
struct PySector {
    label: SectorLabel,
    shape: sector::SectorShape,
}

#[pymethods]
impl PySector {
    #[new]
    fn new(c1: i64, c2: i64, c3: i64) -> PyResult<Self> {
        let label = SectorLabel::new(c1, c2, c3);
        let shape = sector::shape_of(&label).map_err(domain)?;
        Ok(Self { label, shape })
    }

    #[getter]
    fn label(&self) -> (i64, i64, i64) {
        (self.label.c1, self.label.c2, self.label.c3)
    }

    #[getter]
    fn gamma(&self) -> u32 {
        self.shape.gamma
    }

    #[getter]
    fn delta(&self) -> u32 {
        self.shape.delta
    }

    #[getter]
    fn n(&self) -> u32 {
        self.shape.n
    }

    #[getter]
    fn dim(&self) -> usize {
        self.shape.n as usize + 1
    }

    #[getter]
    fn subcase(&self) -> String {
        self.shape.subcase.to_string()
    }

    #[getter]
    fn base_offset(&self) -> i64 {
        self.shape.base_offset
    }

    /// Fock occupation tuples spanning the sector, lowest level first.
    fn basis(&self) -> PyResult<Vec<(u32, u32, u32, u32)>> {
        let basis = sector::basis_states(&self.label).map_err(domain)?;
        Ok(basis.iter().map(|t| (t[0], t[1], t[2], t[3])).collect())
    }

    /// Reduced spectrum k(k + gamma + delta + 1), k = 0..N.
    fn lambdas(&self) -> Vec<f64> {
        let s = (self.shape.gamma + self.shape.delta) as f64;
        (0..=self.shape.n)
            .map(|k| k as f64 * (k as f64 + s + 1.0))
            .collect()
    }

    /// Sector energy levels g*hbar*lambda_k + lambda0 (resonant case).
    fn energies(&self, p: &PyParams) -> PyResult<Vec<f64>> {
        let (energies, _) = quantum::spectral_decomposition(&self.label, &p.inner).map_err(domain)?;
        Ok(energies)
    }

    /// |<to| U(t) |from>|^2 for local levels of this sector.
    fn transition(&self, p: &PyParams, from: usize, to: usize, t: f64) -> PyResult<f64> {
        quantum::transition_probability(&self.label, &p.inner, to, from, t).map_err(domain)
    }

    /// Occupation probabilities over the local basis at each time,
    /// starting from local level `start`.
    fn evolve(&self, p: &PyParams, start: usize, times: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let dim = self.shape.n as usize + 1;
        if start >= dim {
            return Err(domain(FwmError::IndexOutOfRange {
                index: start,
                max: dim - 1,
            }));
        }
        let mut out = Vec::with_capacity(times.len());
        for t in times {
            let u = if p.inner.is_resonant() {
                quantum::propagator(&self.label, &p.inner, t).map_err(domain)?
            } else {
                quantum::propagator_general(&self.label, &p.inner, t).map_err(domain)?
            };
            out.push((0..dim).map(|k| u.matrix[(k, start)].norm_sqr()).collect());
        }
        Ok(out)
    }

    /// Coefficients of the reduced coherent state at zeta = re + i*im.
    fn reduced_coherent(&self, re: f64, im: f64) -> PyResult<Vec<(f64, f64)>> {
        let red =
            coherent::reduced_coherent(Complex64::new(re, im), &self.label).map_err(domain)?;
        Ok(red.coefficients.iter().map(|z| (z.re, z.im)).collect())
    }

    /// Radial density of the reproducing measure at s = |zeta|^2.
    fn measure_density(&self, s: f64) -> PyResult<f64> {
        coherent::measure_density(s, &self.label).map_err(domain)
    }

    fn __repr__(&self) -> String {
        format!(
            "Sector(c=({}, {}, {}), N={}, gamma={}, delta={}, subcase={})",
            self.label.c1,
            self.label.c2,
            self.label.c3,
            self.shape.n,
            self.shape.gamma,
            self.shape.delta,
            self.shape.subcase
        )
    }
}

/// Closed-form classical trajectory of the reduced system.
#[pyclass(name = "ClassicalTrajectory")]
struct PyTrajectory {
    inner: classical::ClosedFormTrajectory,
}

#[pymethods]
impl PyTrajectory {
    #[new]
    #[pyo3(signature = (b, i0, psi0, p, t0=0.0))]
    fn new(b: [f64; 3], i0: f64, psi0: f64, p: &PyParams, t0: f64) -> PyResult<Self> {
        let rc = ReducedCoords { i0, psi0, b };
        let inner = classical::closed_form(&rc, &p.inner, t0).map_err(domain)?;
        Ok(Self { inner })
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy
    }

    fn i0(&self, t: f64) -> f64 {
        self.inner.i0(t)
    }

    /// Resonance phase factor e^{i psi0(t)} as (re, im).
    fn phase(&self, t: f64) -> (f64, f64) {
        let (_, ph) = self.inner.eval(t);
        (ph.re, ph.im)
    }

    /// (t, I0, re phase, im phase) rows over the given times.
    fn sample(&self, times: Vec<f64>) -> Vec<(f64, f64, f64, f64)> {
        times
            .into_iter()
            .map(|t| {
                let (i0, ph) = self.inner.eval(t);
                (t, i0, ph.re, ph.im)
            })
            .collect()
    }

    /// Worst Casimir and energy deviations of the trajectory mapped onto
    /// the Kummer shape, over the given times.
    fn kummer_confinement(&self, times: Vec<f64>) -> (f64, f64) {
        let report = kummer::trajectory_on_shape(&self.inner, &times);
        (report.max_casimir, report.max_energy_dev)
    }
}

/// Largest deviation in the so(4) commutator table on the truncated
/// Fock space.
#[pyfunction]
fn commutator_audit_max(trunc: u32, p: &PyParams) -> PyResult<f64> {
    let space = TruncatedFockSpace::new(trunc).map_err(domain)?;
    Ok(spinrep::commutator_audit(&space, &p.inner).max_deviation)
}

/// Largest entry of H - H_D on the truncated Fock space.
#[pyfunction]
fn dicke_identity_defect(trunc: u32, p: &PyParams) -> PyResult<f64> {
    let space = TruncatedFockSpace::new(trunc).map_err(domain)?;
    spinrep::dicke_identity_defect(&space, &p.inner).map_err(domain)
}

/// All valid sector labels whose basis tuples fit within the given
/// total-quanta truncation.
#[pyfunction]
fn sectors_within(trunc: u32) -> Vec<(i64, i64, i64)> {
    sector::sectors_within(trunc)
        .into_iter()
        .map(|c| (c.c1, c.c2, c.c3))
        .collect()
}

#[pymodule]
fn fwm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PySector>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(commutator_audit_max, m)?)?;
    m.add_function(wrap_pyfunction!(dicke_identity_defect, m)?)?;
    m.add_function(wrap_pyfunction!(sectors_within, m)?)?;
    Ok(())
}
