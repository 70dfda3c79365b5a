//! `kerr-coupler` command-line front end.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::dynamics::{DetectorConfig, EventReport};
use crate::error::{Error, Result};
use crate::io::{read_trajectory, write_events, write_sweep, write_trajectory};
use crate::master_eq::{evolve, Trajectory};
use crate::model::ModelOperators;
use crate::sweep::{run_sweep, workers_from_env, SweepConfig, SweepParam};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Times `dt` may be halved after a trace-drift abort.
const MAX_DT_HALVINGS: usize = 2;

#[derive(Debug, Parser)]
#[command(name = "kerr-coupler", version, about = "Damped Kerr coupler entanglement dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Sweep one parameter and write a long-format concurrence map.
    Sweep(SweepArgs),
    /// Find death intervals and birth events in a trajectory CSV.
    Detect(DetectArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// key=value configuration file (an earlier output file also works)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub chi_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub chi_b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_im: Option<f64>,
    #[arg(long)]
    pub gamma_a: Option<f64>,
    #[arg(long)]
    pub gamma_b: Option<f64>,
    #[arg(long)]
    pub nbar_a: Option<f64>,
    #[arg(long)]
    pub nbar_b: Option<f64>,
    /// standard | additive
    #[arg(long)]
    pub thermal_rates: Option<String>,
    /// Fock truncation as A,B
    #[arg(long)]
    pub dims: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub trace_drift_tol: Option<f64>,
    /// B1 | B2 | B3 | fock(n_a,n_b) | file:PATH
    #[arg(long)]
    pub init: Option<String>,
    /// raw | chi
    #[arg(long)]
    pub time_scale: Option<String>,
    /// Renormalize the projected qubit block before the concurrence
    #[arg(long)]
    pub normalize_block: bool,
}

impl RunArgs {
    fn overrides(&self) -> Result<Vec<(&'static str, String)>> {
        let mut out = Vec::new();
        let nums = [
            ("chi_a", self.chi_a),
            ("chi_b", self.chi_b),
            ("epsilon_re", self.epsilon_re),
            ("epsilon_im", self.epsilon_im),
            ("alpha_re", self.alpha_re),
            ("alpha_im", self.alpha_im),
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("nbar_a", self.nbar_a),
            ("nbar_b", self.nbar_b),
            ("dt", self.dt),
            ("t_max", self.tmax),
            ("trace_drift_tol", self.trace_drift_tol),
        ];
        for (k, v) in nums {
            if let Some(v) = v {
                out.push((k, v.to_string()));
            }
        }
        if let Some(v) = self.record_every {
            out.push(("record_every", v.to_string()));
        }
        if let Some(dims) = &self.dims {
            let (a, b) = dims
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("--dims expects A,B, got '{dims}'")))?;
            out.push(("dim_a", a.trim().to_string()));
            out.push(("dim_b", b.trim().to_string()));
        }
        if let Some(v) = &self.thermal_rates {
            out.push(("thermal_rates", v.clone()));
        }
        if let Some(v) = &self.init {
            out.push(("init", v.clone()));
        }
        if let Some(v) = &self.time_scale {
            out.push(("time_scale", v.clone()));
        }
        if self.normalize_block {
            out.push(("normalize_block", "true".into()));
        }
        Ok(out)
    }

    /// Defaults, then the config file, then command-line overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| with_path(path, e))?;
            cfg.apply_text(&text)?;
        }
        for (k, v) in self.overrides()? {
            cfg.set(k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value = "trajectory.csv")]
    pub out: PathBuf,
    /// Also write the death/birth event report here
    #[arg(long)]
    pub events: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// nbar_a | nbar_b | alpha | gamma_a | gamma_b | epsilon
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Trajectory CSV
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.2)]
    pub min_duration: f64,
    #[arg(long, default_value = "events.csv")]
    pub out: PathBuf,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

/// Runs `evolve`, halving `dt` after a numerical abort up to
/// `MAX_DT_HALVINGS` times. Returns the trajectory and the configuration
/// that produced it.
pub fn simulate(cfg: &RunConfig) -> Result<(Trajectory, RunConfig)> {
    cfg.validate()?;
    let model = ModelOperators::new(&cfg.params, &cfg.spec)?;
    let rho0 = cfg.init.prepare(&cfg.spec)?;
    let mut cfg = cfg.clone();
    let mut halvings = 0;
    loop {
        match evolve(&rho0, &model, &cfg.integrator, &mut []) {
            Ok(traj) => return Ok((traj, cfg)),
            Err(e) if e.is_numerical() && halvings < MAX_DT_HALVINGS => {
                eprintln!("warning: {e}; retrying with dt = {}", cfg.integrator.dt / 2.0);
                cfg.integrator = cfg.integrator.halved();
                halvings += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| with_path(path, e))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = args.run.resolve()?;
    let (traj, cfg) = simulate(&cfg)?;
    let mut w = create(&args.out)?;
    write_trajectory(&mut w, &cfg.pairs(), &traj, cfg.time_factor())?;
    w.flush()?;

    let report = EventReport::from_trajectory(&traj, &DetectorConfig::default())?;
    if let Some(path) = &args.events {
        let mut w = create(path)?;
        write_events(&mut w, &cfg.pairs(), &report)?;
        w.flush()?;
    }
    let last = traj.records.last().expect("trajectory has t = 0");
    let max_c = traj.concurrence().into_iter().fold(0.0, f64::max);
    println!("samples        {}", traj.len());
    println!("final trace    {:.12}", last.trace);
    println!("max C          {max_c:.6}");
    println!("death intervals {}", report.intervals.len());
    if traj.truncation_flagged(1e-5) {
        println!(
            "warning: top Fock level population reached {:.2e}; consider larger --dims",
            traj.max_top_population()
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let sweep = SweepConfig {
        template: args.run.resolve()?,
        param: SweepParam::parse(&args.param)?,
        from: args.from,
        to: args.to,
        steps: args.steps,
    };
    sweep.validate()?;
    let workers = workers_from_env()?;
    let points = run_sweep(&sweep, workers)?;
    for p in points.iter().filter(|p| p.error.is_some()) {
        eprintln!(
            "warning: {}={} failed: {}",
            sweep.param.name(),
            p.value,
            p.error.as_deref().unwrap_or_default()
        );
    }
    let mut w = create(&args.out)?;
    write_sweep(&mut w, &sweep.pairs(), &points, sweep.template.time_factor())?;
    w.flush()?;
    println!(
        "{} points ({} failed), wrote {}",
        points.len(),
        points.iter().filter(|p| p.error.is_some()).count(),
        args.out.display()
    );
    Ok(())
}

pub fn cmd_detect(args: &DetectArgs) -> Result<EventReport> {
    let det = DetectorConfig {
        eps: args.eps,
        min_duration: args.min_duration,
    };
    det.validate()?;
    let table = read_trajectory(BufReader::new(File::open(&args.input).map_err(|e| with_path(&args.input, e))?))?;
    let report = EventReport::analyze(&table.times(), &table.concurrence(), &det)?;
    let echo = vec![
        ("input".to_string(), args.input.display().to_string()),
        ("eps".to_string(), det.eps.to_string()),
        ("min_duration".to_string(), det.min_duration.to_string()),
    ];
    let mut w = create(&args.out)?;
    write_events(&mut w, &echo, &report)?;
    w.flush()?;
    if report.intervals.is_empty() {
        println!("no death intervals");
    }
    for (iv, birth) in report.intervals.iter().zip(&report.births) {
        match birth {
            Some(b) => println!(
                "death [{:.4}, {:.4}]  duration {:.4}  birth at {b:.4}",
                iv.t_start,
                iv.t_end,
                iv.duration()
            ),
            None => println!(
                "death [{:.4}, {:.4}]  duration {:.4}  no birth",
                iv.t_start,
                iv.t_end,
                iv.duration()
            ),
        }
    }
    Ok(report)
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Detect(a) => cmd_detect(a).map(|_| ()),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
