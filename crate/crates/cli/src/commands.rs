//! Subcommand implementations: each resolves its inputs from the run
//! configuration, computes through the core library and emits CSV or
//! JSON deterministically.

use num_complex::Complex64;
use serde::Serialize;

use fwm_core::classical::{self, ReducedCoords};
use fwm_core::coherent;
use fwm_core::kummer;
use fwm_core::quantum;
use fwm_core::report;
use fwm_core::sector;

use crate::config::{config_err, CliError, OutputFormat, RunConfig};

fn render_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    report::to_json(value).map_err(|e| config_err(format!("JSON encoding failed: {e}")))
}

#[derive(Serialize)]
struct SectorOutput {
    #[serde(flatten)]
    report: sector::SectorReport,
    base_offset: i64,
    dim: usize,
    basis: Vec<[u32; 4]>,
}

pub fn cmd_sector(cfg: &RunConfig) -> Result<(), CliError> {
    let c = cfg.require_sector()?;
    let report = sector::sector_report(&c, &cfg.params)?;
    let shape = sector::shape_of(&c)?;
    let basis = sector::basis_states(&c)?;
    let out = SectorOutput {
        report,
        base_offset: shape.base_offset,
        dim: basis.len(),
        basis,
    };
    match cfg.format {
        OutputFormat::Json => cfg.emit(&render_json(&out)?),
        OutputFormat::Csv => {
            let rows: Vec<Vec<f64>> = out
                .basis
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    vec![
                        i as f64,
                        t[0] as f64,
                        t[1] as f64,
                        t[2] as f64,
                        t[3] as f64,
                    ]
                })
                .collect();
            cfg.emit(&report::to_csv(&["index", "n0", "n1", "n2", "n3"], &rows))
        }
    }
}

#[derive(Serialize)]
struct SpectrumOutput {
    sector: [i64; 3],
    lambda0: f64,
    energies: Vec<f64>,
    lambdas: Vec<f64>,
    norms: Vec<f64>,
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let c = cfg.require_sector()?;
    let (energies, table) = quantum::spectral_decomposition(&c, &cfg.params)?;
    let lambda0 = sector::lambda0(&c, &cfg.params)?;
    match cfg.format {
        OutputFormat::Json => cfg.emit(&render_json(&SpectrumOutput {
            sector: [c.c1, c.c2, c.c3],
            lambda0,
            energies,
            lambdas: table.lambdas.clone(),
            norms: table.norms.clone(),
        })?),
        OutputFormat::Csv => {
            let rows: Vec<Vec<f64>> = energies
                .iter()
                .enumerate()
                .map(|(k, &e)| vec![k as f64, table.lambdas[k], table.norms[k], e])
                .collect();
            cfg.emit(&report::to_csv(&["k", "lambda", "norm", "energy"], &rows))
        }
    }
}

pub fn cmd_transition(cfg: &RunConfig) -> Result<(), CliError> {
    let c = cfg.require_sector()?;
    let rows: Result<Vec<Vec<f64>>, CliError> = cfg
        .time_grid()
        .into_iter()
        .map(|t| {
            let p = quantum::transition_probability(&c, &cfg.params, cfg.m, cfg.n, t)?;
            Ok(vec![t, p])
        })
        .collect();
    let rows = rows?;
    match cfg.format {
        OutputFormat::Csv => cfg.emit(&report::to_csv(&["t", "probability"], &rows)),
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Out {
                sector: [i64; 3],
                from: usize,
                to: usize,
                t: Vec<f64>,
                probability: Vec<f64>,
            }
            cfg.emit(&render_json(&Out {
                sector: [c.c1, c.c2, c.c3],
                from: cfg.n,
                to: cfg.m,
                t: rows.iter().map(|r| r[0]).collect(),
                probability: rows.iter().map(|r| r[1]).collect(),
            })?)
        }
    }
}

pub fn cmd_evolve_quantum(cfg: &RunConfig) -> Result<(), CliError> {
    let c = cfg.require_sector()?;
    let shape = sector::shape_of(&c)?;
    let dim = shape.n as usize + 1;
    if cfg.n >= dim {
        return Err(CliError::Domain(fwm_core::FwmError::IndexOutOfRange {
            index: cfg.n,
            max: dim - 1,
        }));
    }
    let mut rows = Vec::new();
    for t in cfg.time_grid() {
        let u = if cfg.params.is_resonant() {
            quantum::propagator(&c, &cfg.params, t)?
        } else {
            quantum::propagator_general(&c, &cfg.params, t)?
        };
        let mut row = vec![t];
        for k in 0..dim {
            row.push(u.matrix[(k, cfg.n)].norm_sqr());
        }
        rows.push(row);
    }
    let mut header: Vec<String> = vec!["t".to_string()];
    for k in 0..dim {
        header.push(format!("p_{k}"));
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    match cfg.format {
        OutputFormat::Csv => cfg.emit(&report::to_csv(&header_refs, &rows)),
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Out {
                sector: [i64; 3],
                initial: usize,
                t: Vec<f64>,
                probabilities: Vec<Vec<f64>>,
            }
            cfg.emit(&render_json(&Out {
                sector: [c.c1, c.c2, c.c3],
                initial: cfg.n,
                t: rows.iter().map(|r| r[0]).collect(),
                probabilities: rows.iter().map(|r| r[1..].to_vec()).collect(),
            })?)
        }
    }
}

#[derive(Serialize)]
struct ClassicalOutput {
    regime: classical::Regime,
    energy: f64,
    p: f64,
    q: f64,
    r: f64,
    delta: f64,
    t: Vec<f64>,
    i0: Vec<f64>,
    re_phase: Vec<f64>,
    im_phase: Vec<f64>,
}

fn classical_trajectory(
    cfg: &RunConfig,
) -> Result<(classical::ClosedFormTrajectory, Vec<f64>), CliError> {
    let (b, i0, psi0) = cfg.require_classical()?;
    let rc = ReducedCoords { i0, psi0, b };
    let traj = classical::closed_form(&rc, &cfg.params, cfg.t0)?;
    Ok((traj, cfg.time_grid()))
}

pub fn cmd_classical(cfg: &RunConfig) -> Result<(), CliError> {
    let (traj, grid) = classical_trajectory(cfg)?;
    let samples: Vec<(f64, f64, Complex64)> = grid
        .iter()
        .map(|&t| {
            let (i0, phase) = traj.eval(t);
            (t, i0, phase)
        })
        .collect();
    match cfg.format {
        OutputFormat::Csv => {
            let rows: Vec<Vec<f64>> = samples
                .iter()
                .map(|&(t, i0, ph)| vec![t, i0, ph.re, ph.im])
                .collect();
            cfg.emit(&report::to_csv(&["t", "i0", "re_phase", "im_phase"], &rows))
        }
        OutputFormat::Json => cfg.emit(&render_json(&ClassicalOutput {
            regime: traj.coeffs.regime,
            energy: traj.energy,
            p: traj.coeffs.p,
            q: traj.coeffs.q,
            r: traj.coeffs.r,
            delta: traj.coeffs.delta,
            t: samples.iter().map(|s| s.0).collect(),
            i0: samples.iter().map(|s| s.1).collect(),
            re_phase: samples.iter().map(|s| s.2.re).collect(),
            im_phase: samples.iter().map(|s| s.2.im).collect(),
        })?),
    }
}

pub fn cmd_kummer(cfg: &RunConfig) -> Result<(), CliError> {
    let (traj, grid) = classical_trajectory(cfg)?;
    let shape_report = kummer::trajectory_on_shape(&traj, &grid);
    match cfg.format {
        OutputFormat::Json => cfg.emit(&render_json(&shape_report)?),
        OutputFormat::Csv => {
            let rows: Vec<Vec<f64>> = shape_report
                .samples
                .iter()
                .map(|s| vec![s.t, s.x, s.y, s.i0])
                .collect();
            cfg.emit(&report::to_csv(&["t", "x", "y", "i0"], &rows))
        }
    }
}

#[derive(Serialize)]
struct CoherentOutput {
    sector: [i64; 3],
    zeta: [f64; 2],
    coefficients: Vec<[f64; 2]>,
    kernel_diag: f64,
    measure_density_at_s: f64,
    s: f64,
}

pub fn cmd_coherent(cfg: &RunConfig) -> Result<(), CliError> {
    let c = cfg.require_sector()?;
    let (re, im) = cfg
        .zeta
        .ok_or_else(|| config_err("this command needs --zeta re,im"))?;
    let zeta = Complex64::new(re, im);
    let red = coherent::reduced_coherent(zeta, &c)?;
    let kernel = coherent::reproducing_kernel(zeta, zeta, &c)?;
    let s = zeta.norm_sqr();
    let density = coherent::measure_density(s, &c)?;
    match cfg.format {
        OutputFormat::Json => cfg.emit(&render_json(&CoherentOutput {
            sector: [c.c1, c.c2, c.c3],
            zeta: [re, im],
            coefficients: red.coefficients.iter().map(|z| [z.re, z.im]).collect(),
            kernel_diag: kernel.re,
            measure_density_at_s: density,
            s,
        })?),
        OutputFormat::Csv => {
            let rows: Vec<Vec<f64>> = red
                .coefficients
                .iter()
                .enumerate()
                .map(|(n, z)| vec![n as f64, z.re, z.im])
                .collect();
            cfg.emit(&report::to_csv(&["n", "re", "im"], &rows))
        }
    }
}
