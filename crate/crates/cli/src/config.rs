//! Flag and config-file handling. The config file is a JSON object whose
//! keys are exactly the long flag names; command-line flags win.

use clap::Args;
use fwm_core::{FourWaveParams, FwmError, SectorLabel};
use serde_json::Value;

#[derive(Debug)]
pub enum CliError {
    Domain(FwmError),
    Config(String),
}

impl From<FwmError> for CliError {
    fn from(e: FwmError) -> Self {
        CliError::Domain(e)
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Raw options shared by every subcommand; all optional so that config
/// file values can fill the gaps.
#[derive(Debug, Args, Clone)]
pub struct CommonOpts {
    /// JSON config file; keys are the long flag names, flags win
    #[arg(long)]
    pub config: Option<String>,
    /// Sector label c1,c2,c3
    #[arg(long)]
    pub c: Option<String>,
    /// Mode frequencies w0,w1,w2,w3
    #[arg(long)]
    pub omega: Option<String>,
    /// Coupling constant
    #[arg(long)]
    pub g: Option<f64>,
    /// Planck constant (action scale)
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Initial local level (evolve-quantum) or source level (transition)
    #[arg(long)]
    pub n: Option<usize>,
    /// Target level (transition)
    #[arg(long)]
    pub m: Option<usize>,
    /// Action invariants b1,b2,b3 (classical/kummer)
    #[arg(long)]
    pub b: Option<String>,
    /// Initial I0 (classical/kummer)
    #[arg(long)]
    pub i0: Option<f64>,
    /// Initial resonance phase psi0 (classical/kummer)
    #[arg(long)]
    pub psi0: Option<f64>,
    /// Reduced coherent parameter zeta as re,im
    #[arg(long)]
    pub zeta: Option<String>,
    /// Time grid start
    #[arg(long)]
    pub t0: Option<f64>,
    /// Time grid end
    #[arg(long)]
    pub t1: Option<f64>,
    /// Number of grid steps
    #[arg(long)]
    pub steps: Option<usize>,
    /// Fock truncation (total quanta)
    #[arg(long)]
    pub trunc: Option<u32>,
    /// Output format: csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Output file path (stdout when omitted)
    #[arg(long)]
    pub output: Option<String>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: FourWaveParams,
    pub sector: Option<SectorLabel>,
    pub n: usize,
    pub m: usize,
    pub b: Option<[f64; 3]>,
    pub i0: Option<f64>,
    pub psi0: Option<f64>,
    pub zeta: Option<(f64, f64)>,
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    pub trunc: u32,
    pub format: OutputFormat,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn parse_list<const K: usize>(s: &str, what: &str) -> Result<[f64; K], CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != K {
        return Err(config_err(format!("{what} needs {K} comma-separated values, got {s:?}")));
    }
    let mut out = [0.0; K];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|_| config_err(format!("invalid number {p:?} in {what}")))?;
    }
    Ok(out)
}

impl CommonOpts {
    /// Merge config-file values under the raw flags, then validate.
    pub fn resolve(mut self) -> Result<RunConfig, CliError> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {path}: {e}")))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| config_err(format!("invalid JSON in {path}: {e}")))?;
            let obj = value
                .as_object()
                .ok_or_else(|| config_err("config root must be a JSON object"))?;
            for (key, v) in obj {
                self.merge_key(key, v)?;
            }
        }
        let omega = match &self.omega {
            Some(s) => parse_list::<4>(s, "--omega")?,
            None => [1.0; 4],
        };
        let params = FourWaveParams::new(omega, self.g.unwrap_or(1.0), self.hbar.unwrap_or(1.0));
        let sector = match &self.c {
            Some(s) => {
                let parts: Vec<&str> = s.split(',').collect();
                if parts.len() != 3 {
                    return Err(config_err(format!("--c needs c1,c2,c3, got {s:?}")));
                }
                let mut c = [0i64; 3];
                for (i, p) in parts.iter().enumerate() {
                    c[i] = p
                        .trim()
                        .parse::<i64>()
                        .map_err(|_| config_err(format!("invalid integer {p:?} in --c")))?;
                }
                Some(SectorLabel::new(c[0], c[1], c[2]))
            }
            None => None,
        };
        let b = match &self.b {
            Some(s) => Some(parse_list::<3>(s, "--b")?),
            None => None,
        };
        let zeta = match &self.zeta {
            Some(s) => {
                let v = parse_list::<2>(s, "--zeta")?;
                Some((v[0], v[1]))
            }
            None => None,
        };
        let t0 = self.t0.unwrap_or(0.0);
        let t1 = self.t1.unwrap_or(10.0);
        let steps = self.steps.unwrap_or(100);
        if !(t1 > t0) {
            return Err(config_err(format!("need t1 > t0, got t0={t0}, t1={t1}")));
        }
        if steps < 1 {
            return Err(config_err("need steps >= 1"));
        }
        let trunc = self.trunc.unwrap_or(8);
        if trunc > 12 {
            return Err(config_err(format!("truncation {trunc} exceeds the supported bound 12")));
        }
        let format = match self.format.as_deref() {
            None | Some("json") => OutputFormat::Json,
            Some("csv") => OutputFormat::Csv,
            Some(other) => {
                return Err(config_err(format!("unknown format {other:?}; use csv or json")))
            }
        };
        Ok(RunConfig {
            params,
            sector,
            n: self.n.unwrap_or(0),
            m: self.m.unwrap_or(0),
            b,
            i0: self.i0,
            psi0: self.psi0,
            zeta,
            t0,
            t1,
            steps,
            trunc,
            format,
            output: self.output.clone(),
        })
    }

    fn merge_key(&mut self, key: &str, v: &Value) -> Result<(), CliError> {
        let as_str = |v: &Value| -> Result<String, CliError> {
            match v {
                Value::String(s) => Ok(s.clone()),
                Value::Array(items) => {
                    let parts: Result<Vec<String>, CliError> = items
                        .iter()
                        .map(|x| {
                            x.as_f64()
                                .map(|f| {
                                    if f.fract() == 0.0 && f.abs() < 1e15 {
                                        format!("{}", f as i64)
                                    } else {
                                        format!("{f}")
                                    }
                                })
                                .ok_or_else(|| config_err(format!("non-numeric entry in {key}")))
                        })
                        .collect();
                    Ok(parts?.join(","))
                }
                other => Err(config_err(format!("key {key}: expected string or array, got {other}"))),
            }
        };
        let as_f64 = |v: &Value| -> Result<f64, CliError> {
            v.as_f64()
                .ok_or_else(|| config_err(format!("key {key}: expected number")))
        };
        match key {
            "c" => {
                self.c.get_or_insert(as_str(v)?);
            }
            "omega" => {
                self.omega.get_or_insert(as_str(v)?);
            }
            "b" => {
                self.b.get_or_insert(as_str(v)?);
            }
            "zeta" => {
                self.zeta.get_or_insert(as_str(v)?);
            }
            "format" => {
                self.format.get_or_insert(as_str(v)?);
            }
            "output" => {
                self.output.get_or_insert(as_str(v)?);
            }
            "g" => {
                self.g.get_or_insert(as_f64(v)?);
            }
            "hbar" => {
                self.hbar.get_or_insert(as_f64(v)?);
            }
            "i0" => {
                self.i0.get_or_insert(as_f64(v)?);
            }
            "psi0" => {
                self.psi0.get_or_insert(as_f64(v)?);
            }
            "t0" => {
                self.t0.get_or_insert(as_f64(v)?);
            }
            "t1" => {
                self.t1.get_or_insert(as_f64(v)?);
            }
            "n" => {
                self.n.get_or_insert(as_f64(v)? as usize);
            }
            "m" => {
                self.m.get_or_insert(as_f64(v)? as usize);
            }
            "steps" => {
                self.steps.get_or_insert(as_f64(v)? as usize);
            }
            "trunc" => {
                self.trunc.get_or_insert(as_f64(v)? as u32);
            }
            other => return Err(config_err(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn require_sector(&self) -> Result<SectorLabel, CliError> {
        self.sector
            .ok_or_else(|| config_err("this command needs --c c1,c2,c3"))
    }

    pub fn require_classical(&self) -> Result<([f64; 3], f64, f64), CliError> {
        let b = self
            .b
            .ok_or_else(|| config_err("this command needs --b b1,b2,b3"))?;
        let i0 = self.i0.ok_or_else(|| config_err("this command needs --i0"))?;
        let psi0 = self
            .psi0
            .ok_or_else(|| config_err("this command needs --psi0"))?;
        Ok((b, i0, psi0))
    }

    /// Evenly spaced time grid with `steps + 1` points.
    pub fn time_grid(&self) -> Vec<f64> {
        let dt = (self.t1 - self.t0) / self.steps as f64;
        (0..=self.steps).map(|i| self.t0 + dt * i as f64).collect()
    }

    /// Write to the output path, or stdout when none is set.
    pub fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.output {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| config_err(format!("cannot write {path}: {e}"))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}
