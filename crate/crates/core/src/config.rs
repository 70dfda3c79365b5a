//! Run configuration as plain `key=value` text.
//!
//! Every output file starts with the resolved configuration echoed as
//! `# key=value` comment lines. [`RunConfig::from_text`] accepts either a
//! config file or such an output file, so any run can be repeated exactly.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::entanglement::Bell;
use crate::error::{Error, Result};
use crate::hilbert::{basis_vector, CVector, HilbertSpec, C64};
use crate::master_eq::{DensityMatrix, IntegratorConfig};
use crate::model::{CouplerParams, ThermalRates};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Bell(Bell),
    Fock(usize, usize),
    /// Amplitude file with lines `n_a,n_b,re,im`.
    File(PathBuf),
}

impl InitialState {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "B1" => return Ok(Self::Bell(Bell::B1)),
            "B2" => return Ok(Self::Bell(Bell::B2)),
            "B3" => return Ok(Self::Bell(Bell::B3)),
            _ => {}
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(Self::File(PathBuf::from(path)));
        }
        if let Some(inner) = s.strip_prefix("fock(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<_> = inner.split(',').map(str::trim).collect();
            if let [a, b] = parts.as_slice() {
                let na = a.parse().map_err(|_| Error::Config(format!("bad Fock index in '{s}'")))?;
                let nb = b.parse().map_err(|_| Error::Config(format!("bad Fock index in '{s}'")))?;
                return Ok(Self::Fock(na, nb));
            }
        }
        Err(Error::Config(format!(
            "unknown initial state '{s}' (expected B1, B2, B3, fock(n_a,n_b) or file:PATH)"
        )))
    }

    pub fn prepare(&self, spec: &HilbertSpec) -> Result<DensityMatrix> {
        let psi = match self {
            Self::Bell(b) => b.vector(spec),
            Self::Fock(na, nb) => basis_vector(*na, *nb, spec)?,
            Self::File(path) => read_amplitudes(path, spec)?,
        };
        DensityMatrix::from_pure(&psi, *spec)
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bell(b) => write!(f, "{b:?}"),
            Self::Fock(a, b) => write!(f, "fock({a},{b})"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn read_amplitudes(path: &Path, spec: &HilbertSpec) -> Result<CVector> {
    let text = std::fs::read_to_string(path)?;
    let mut psi = CVector::zeros(spec.total());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<_> = line.split(',').map(str::trim).collect();
        let bad = |msg: &str| Error::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        if fields.len() != 4 {
            return Err(bad("expected n_a,n_b,re,im"));
        }
        let na: usize = fields[0].parse().map_err(|_| bad("bad n_a"))?;
        let nb: usize = fields[1].parse().map_err(|_| bad("bad n_b"))?;
        let re: f64 = fields[2].parse().map_err(|_| bad("bad real part"))?;
        let im: f64 = fields[3].parse().map_err(|_| bad("bad imaginary part"))?;
        psi[spec.flatten(na, nb)?] += C64::new(re, im);
    }
    Ok(psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScale {
    /// Times as integrated.
    #[default]
    Raw,
    /// Times multiplied by `χ_a`.
    Chi,
}

impl TimeScale {
    pub fn factor(self, params: &CouplerParams) -> f64 {
        match self {
            TimeScale::Raw => 1.0,
            TimeScale::Chi => params.chi_a,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(TimeScale::Raw),
            "chi" => Ok(TimeScale::Chi),
            _ => Err(Error::Config(format!("time_scale must be raw or chi, got '{s}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeScale::Raw => "raw",
            TimeScale::Chi => "chi",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: CouplerParams,
    pub spec: HilbertSpec,
    pub integrator: IntegratorConfig,
    pub init: InitialState,
    pub time_scale: TimeScale,
}

impl Default for RunConfig {
    /// Vacuum-bath baseline: `χ = 25`, `ε = π/χ`, `γ = 0.001`, no drive, initial `B1`.
    fn default() -> Self {
        Self {
            params: CouplerParams::default(),
            spec: HilbertSpec::default(),
            integrator: IntegratorConfig {
                t_max: 20.0,
                ..IntegratorConfig::default()
            },
            init: InitialState::Bell(Bell::B1),
            time_scale: TimeScale::Raw,
        }
    }
}

pub const KEYS: &[&str] = &[
    "chi_a",
    "chi_b",
    "epsilon_re",
    "epsilon_im",
    "alpha_re",
    "alpha_im",
    "gamma_a",
    "gamma_b",
    "nbar_a",
    "nbar_b",
    "thermal_rates",
    "dim_a",
    "dim_b",
    "dt",
    "t_max",
    "record_every",
    "trace_drift_tol",
    "normalize_block",
    "init",
    "time_scale",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {key}='{value}'")))
}

impl RunConfig {
    /// Sets one key; the value is parsed as the key's type.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.params;
        let ic = &mut self.integrator;
        match key {
            "chi_a" => p.chi_a = parse_num(key, value)?,
            "chi_b" => p.chi_b = parse_num(key, value)?,
            "epsilon_re" => p.epsilon.re = parse_num(key, value)?,
            "epsilon_im" => p.epsilon.im = parse_num(key, value)?,
            "alpha_re" => p.alpha.re = parse_num(key, value)?,
            "alpha_im" => p.alpha.im = parse_num(key, value)?,
            "gamma_a" => p.gamma_a = parse_num(key, value)?,
            "gamma_b" => p.gamma_b = parse_num(key, value)?,
            "nbar_a" => p.nbar_a = parse_num(key, value)?,
            "nbar_b" => p.nbar_b = parse_num(key, value)?,
            "thermal_rates" => {
                p.thermal_rates = ThermalRates::parse(value.trim()).ok_or_else(|| {
                    Error::Config(format!("thermal_rates must be standard or additive, got '{value}'"))
                })?
            }
            "dim_a" => self.spec.dim_a = parse_num(key, value)?,
            "dim_b" => self.spec.dim_b = parse_num(key, value)?,
            "dt" => ic.dt = parse_num(key, value)?,
            "t_max" => ic.t_max = parse_num(key, value)?,
            "record_every" => ic.record_every = parse_num(key, value)?,
            "trace_drift_tol" => ic.trace_drift_tol = parse_num(key, value)?,
            "normalize_block" => ic.normalize_block = parse_num(key, value)?,
            "init" => self.init = InitialState::parse(value)?,
            "time_scale" => self.time_scale = TimeScale::parse(value.trim())?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let p = &self.params;
        let ic = &self.integrator;
        Some(match key {
            "chi_a" => p.chi_a.to_string(),
            "chi_b" => p.chi_b.to_string(),
            "epsilon_re" => p.epsilon.re.to_string(),
            "epsilon_im" => p.epsilon.im.to_string(),
            "alpha_re" => p.alpha.re.to_string(),
            "alpha_im" => p.alpha.im.to_string(),
            "gamma_a" => p.gamma_a.to_string(),
            "gamma_b" => p.gamma_b.to_string(),
            "nbar_a" => p.nbar_a.to_string(),
            "nbar_b" => p.nbar_b.to_string(),
            "thermal_rates" => p.thermal_rates.name().to_string(),
            "dim_a" => self.spec.dim_a.to_string(),
            "dim_b" => self.spec.dim_b.to_string(),
            "dt" => ic.dt.to_string(),
            "t_max" => ic.t_max.to_string(),
            "record_every" => ic.record_every.to_string(),
            "trace_drift_tol" => ic.trace_drift_tol.to_string(),
            "normalize_block" => ic.normalize_block.to_string(),
            "init" => self.init.to_string(),
            "time_scale" => self.time_scale.name().to_string(),
            _ => return None,
        })
    }

    /// All keys with their current values, in a fixed order.
    pub fn pairs(&self) -> Vec<(String, String)> {
        KEYS.iter()
            .map(|k| (k.to_string(), self.get(k).expect("known key")))
            .collect()
    }

    /// Applies `key=value` lines. Blank lines are skipped and a leading `#` is
    /// stripped; `#` lines without `=` are comments. Reading stops at the first
    /// other line, so CSV outputs with an echoed header are accepted.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let (commented, body) = match line.strip_prefix('#') {
                Some(rest) => (true, rest.trim()),
                None => (false, line),
            };
            let Some((key, value)) = body.split_once('=') else {
                if commented {
                    continue;
                }
                break;
            };
            let key = key.trim();
            if commented && !KEYS.contains(&key) {
                // echo lines from other tools (e.g. sweep settings)
                continue;
            }
            self.set(key, value.trim()).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        HilbertSpec::new(self.spec.dim_a, self.spec.dim_b)?;
        self.integrator.validate()?;
        if let InitialState::File(p) = &self.init {
            if !p.exists() {
                return Err(Error::Config(format!("initial-state file {} not found", p.display())));
            }
        }
        Ok(())
    }

    pub fn time_factor(&self) -> f64 {
        self.time_scale.factor(&self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.set("alpha_re", "0.3").unwrap();
        cfg.set("nbar_b", "1.25").unwrap();
        cfg.set("thermal_rates", "additive").unwrap();
        cfg.set("init", "fock(2,1)").unwrap();
        cfg.set("time_scale", "chi").unwrap();
        cfg.set("dim_a", "12").unwrap();
        let echoed: String = cfg.pairs().iter().map(|(k, v)| format!("# {k}={v}\n")).collect();
        let text = format!("{echoed}t,concurrence\n1,2\n");
        assert_eq!(RunConfig::from_text(&text).unwrap(), cfg);
        assert!((cfg.time_factor() - 25.0).abs() < 1e-15);
    }

    #[test]
    fn float_echo_is_exact() {
        let mut cfg = RunConfig::default();
        cfg.params.epsilon.re = std::f64::consts::PI / 25.0;
        let back = RunConfig::from_text(&format!("epsilon_re={}", cfg.get("epsilon_re").unwrap())).unwrap();
        assert_eq!(back.params.epsilon.re, cfg.params.epsilon.re);
    }

    #[test]
    fn bad_config_lines() {
        assert!(RunConfig::from_text("chi_a = abc").is_err());
        assert!(RunConfig::from_text("colour = blue").is_err());
        assert!(RunConfig::from_text("# just a comment\n\ngamma_a = 0.01").is_ok());
        assert!(RunConfig::from_text("init = B7").is_err());
        let mut cfg = RunConfig::default();
        cfg.integrator.dt = -1.0;
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            init: InitialState::File("/nonexistent/state.csv".into()),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn initial_states() {
        let spec = HilbertSpec::default();
        assert_eq!(InitialState::parse("fock(2, 0)").unwrap(), InitialState::Fock(2, 0));
        let rho = InitialState::parse("B1").unwrap().prepare(&spec).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("psi.csv");
        std::fs::write(&path, "# B1 unnormalized\n2,0,1,0\n0,2,0,1\n").unwrap();
        let from_file = InitialState::File(path.clone()).prepare(&spec).unwrap();
        assert!((&from_file.entries - &rho.entries).norm() < 1e-15);

        std::fs::write(&path, "2,0,1\n").unwrap();
        assert!(matches!(
            InitialState::File(path).prepare(&spec),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
