//! One-parameter sweeps over independent trajectories.
//!
//! Grid points share nothing, so with the `parallel` feature they run on a
//! rayon pool. Results are collected in grid order regardless of which
//! worker finished first.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::SweepRows;
use crate::master_eq::evolve;
use crate::model::ModelOperators;

/// Environment variable holding the sweep worker count.
pub const WORKERS_ENV: &str = "KERR_COUPLER_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    NbarA,
    NbarB,
    Alpha,
    GammaA,
    GammaB,
    Epsilon,
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "nbar_a" => Self::NbarA,
            "nbar_b" => Self::NbarB,
            "alpha" => Self::Alpha,
            "gamma_a" => Self::GammaA,
            "gamma_b" => Self::GammaB,
            "epsilon" => Self::Epsilon,
            _ => {
                return Err(Error::Config(format!(
                    "cannot sweep '{s}' (expected nbar_a, nbar_b, alpha, gamma_a, gamma_b or epsilon)"
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::NbarA => "nbar_a",
            Self::NbarB => "nbar_b",
            Self::Alpha => "alpha",
            Self::GammaA => "gamma_a",
            Self::GammaB => "gamma_b",
            Self::Epsilon => "epsilon",
        }
    }

    /// Sets the parameter; `alpha` and `epsilon` set the real part only.
    pub fn apply(self, cfg: &mut RunConfig, value: f64) {
        let p = &mut cfg.params;
        match self {
            Self::NbarA => p.nbar_a = value,
            Self::NbarB => p.nbar_b = value,
            Self::Alpha => p.alpha.re = value,
            Self::GammaA => p.gamma_a = value,
            Self::GammaB => p.gamma_b = value,
            Self::Epsilon => p.epsilon.re = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub template: RunConfig,
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.template.validate()?;
        if self.steps < 2 {
            return Err(Error::Config(format!("steps must be at least 2, got {}", self.steps)));
        }
        if !(self.from <= self.to) {
            return Err(Error::Config(format!(
                "sweep range must satisfy from <= to, got {} > {}",
                self.from, self.to
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let span = self.to - self.from;
        (0..self.steps)
            .map(|i| self.from + span * i as f64 / (self.steps - 1) as f64)
            .collect()
    }

    pub fn point_config(&self, value: f64) -> RunConfig {
        let mut cfg = self.template.clone();
        self.param.apply(&mut cfg, value);
        cfg
    }

    /// Template settings plus the sweep settings, for the output echo.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut pairs = self.template.pairs();
        pairs.push(("sweep_param".into(), self.param.name().into()));
        pairs.push(("sweep_from".into(), self.from.to_string()));
        pairs.push(("sweep_to".into(), self.to.to_string()));
        pairs.push(("sweep_steps".into(), self.steps.to_string()));
        pairs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub times: Vec<f64>,
    /// NaN throughout when the point failed.
    pub concurrence: Vec<f64>,
    pub error: Option<String>,
}

impl SweepRows for SweepPoint {
    fn value(&self) -> f64 {
        self.value
    }

    fn samples(&self) -> (&[f64], &[f64]) {
        (&self.times, &self.concurrence)
    }
}

/// Nominal sample times of a run, used to lay out failed points.
fn nominal_times(cfg: &RunConfig) -> Vec<f64> {
    let ic = &cfg.integrator;
    let n = ic.n_steps();
    let mut times: Vec<f64> = (0..=n)
        .filter(|s| s % ic.record_every == 0 || *s == n)
        .map(|s| s as f64 * ic.dt)
        .collect();
    times.dedup();
    times
}

/// Runs one trajectory; errors are folded into the returned point.
pub fn run_point(cfg: &RunConfig, value: f64) -> SweepPoint {
    let outcome = cfg.validate().and_then(|_| {
        let model = ModelOperators::new(&cfg.params, &cfg.spec)?;
        let rho0 = cfg.init.prepare(&cfg.spec)?;
        evolve(&rho0, &model, &cfg.integrator, &mut [])
    });
    match outcome {
        Ok(traj) => SweepPoint {
            value,
            concurrence: traj.concurrence(),
            times: traj.times,
            error: None,
        },
        Err(e) => {
            let times = if cfg.integrator.validate().is_ok() {
                nominal_times(cfg)
            } else {
                vec![0.0]
            };
            SweepPoint {
                value,
                concurrence: vec![f64::NAN; times.len()],
                times,
                error: Some(e.to_string()),
            }
        }
    }
}

pub fn run_sweep_sequential(cfg: &SweepConfig) -> Vec<SweepPoint> {
    cfg.values()
        .into_iter()
        .map(|v| run_point(&cfg.point_config(v), v))
        .collect()
}

#[cfg(feature = "parallel")]
pub fn run_sweep_parallel(cfg: &SweepConfig, workers: usize) -> Result<Vec<SweepPoint>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let values = cfg.values();
    Ok(pool.install(|| {
        values
            .par_iter()
            .map(|&v| run_point(&cfg.point_config(v), v))
            .collect()
    }))
}

/// Runs the sweep on `workers` threads (sequentially when 1 or when built
/// without the `parallel` feature).
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    #[cfg(feature = "parallel")]
    if workers > 1 {
        return run_sweep_parallel(cfg, workers);
    }
    let _ = workers;
    Ok(run_sweep_sequential(cfg))
}

/// Worker count from [`WORKERS_ENV`], defaulting to the available parallelism.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be an integer >= 1, got '{v}'"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}
