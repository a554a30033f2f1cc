//! `qnls`: experiment runner for the truncated quintic NLS studies.
//!
//! Every subcommand reads a flat JSON config (`--config`), applies command-line
//! overrides, writes `<command>.csv` plus a `<command>.json` manifest into
//! `output_path`, prints one PASS/FAIL line and exits 0 only on PASS.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use config::{Config, ConfigError};

/// Environment variable fixing the worker-thread count.
const THREADS_VAR: &str = "QNLS_THREADS";

#[derive(Parser)]
#[command(name = "qnls", version, about = "Simulator and Monte Carlo lab for the truncated quintic NLS on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one state and monitor mass, energy and Sobolev growth.
    Simulate(Flags),
    /// Compare the direct and normal-form log-densities on restricted draws.
    DensityCheck(Flags),
    /// Monte Carlo test of the change-of-variables identity.
    TransportMc(Flags),
    /// Sup-distance of R, Q and log G to their ambient values across N.
    Convergence(Flags),
    /// Divergence of the vector field and determinant of the flow map.
    Liouville(Flags),
    /// Counting, psi and Strichartz sweeps.
    Lemmas(Flags),
    /// L^p norms of the densities and of their truncation errors.
    LpDensity(Flags),
    /// Gaussian moment growth of the H^sigma norm.
    Moments(Flags),
}

type Runner = fn(&Config) -> Result<output::Report>;

impl Command {
    fn parts(&self) -> (&'static str, &Flags, Runner) {
        match self {
            Self::Simulate(f) => ("simulate", f, commands::simulate),
            Self::DensityCheck(f) => ("density-check", f, commands::density_check),
            Self::TransportMc(f) => ("transport-mc", f, commands::transport_mc),
            Self::Convergence(f) => ("convergence", f, commands::convergence),
            Self::Liouville(f) => ("liouville", f, commands::liouville),
            Self::Lemmas(f) => ("lemmas", f, commands::lemmas),
            Self::LpDensity(f) => ("lp-density", f, commands::lp_density),
            Self::Moments(f) => ("moments", f, commands::moments),
        }
    }
}

/// Command-line overrides; each sets the config key of the same name.
#[derive(Args, Default)]
struct Flags {
    /// Flat JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    s: Option<f64>,
    /// Truncation `N`.
    #[arg(long = "n")]
    n_cut: Option<usize>,
    /// Ambient truncation `M`.
    #[arg(long = "m")]
    m_ambient: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Integrator step.
    #[arg(long)]
    h: Option<f64>,
    /// Cutoff level `R`.
    #[arg(long = "r")]
    cutoff_r: Option<f64>,
    /// Drop the `C_N <= R` restriction.
    #[arg(long, conflicts_with = "cutoff_r")]
    no_cutoff: bool,
    /// Comma-separated `L^p` exponents.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short = 'o')]
    output_path: Option<PathBuf>,
    /// `japanese` or `equivalent`.
    #[arg(long)]
    weight_family: Option<String>,
    /// Comma-separated truncations.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    m_max: Option<u32>,
    #[arg(long)]
    snapshots: Option<usize>,
    #[arg(long)]
    quad_points: Option<usize>,
    /// `gaussian` or `plane_wave`.
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mode: Option<i64>,
}

impl Flags {
    /// The overrides as config keys.
    fn to_map(&self) -> Map<String, Value> {
        let mut m = Map::new();
        let mut put = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(key.into(), v);
            }
        };
        put("s", self.s.map(|v| json!(v)));
        put("N", self.n_cut.map(|v| json!(v)));
        put("M", self.m_ambient.map(|v| json!(v)));
        put("t", self.t.map(|v| json!(v)));
        put("h", self.h.map(|v| json!(v)));
        put("R", self.cutoff_r.map(|v| json!(v)));
        put("R", self.no_cutoff.then_some(Value::Null));
        put("p", self.p.as_ref().map(|v| json!(v)));
        put("n_samples", self.n_samples.map(|v| json!(v)));
        put("seed", self.seed.map(|v| json!(v)));
        put("output_path", self.output_path.as_ref().map(|v| json!(v)));
        put("weight_family", self.weight_family.as_ref().map(|v| json!(v)));
        put("n_list", self.n_list.as_ref().map(|v| json!(v)));
        put("sigma", self.sigma.map(|v| json!(v)));
        put("m_max", self.m_max.map(|v| json!(v)));
        put("snapshots", self.snapshots.map(|v| json!(v)));
        put("quad_points", self.quad_points.map(|v| json!(v)));
        put("initial", self.initial.as_ref().map(|v| json!(v)));
        put("amplitude", self.amplitude.map(|v| json!(v)));
        put("mode", self.mode.map(|v| json!(v)));
        m
    }
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError::Invalid { key: THREADS_VAR.into(), reason: format!("`{raw}` is not a positive integer") })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| ConfigError::Invalid {
        key: THREADS_VAR.into(),
        reason: e.to_string(),
    })
}

fn run(cli: &Cli) -> Result<bool> {
    let (name, flags, body) = cli.command.parts();
    init_threads()?;
    let cfg = Config::resolve(flags.config.as_deref(), flags.to_map())?;
    let report = body(&cfg).with_context(|| format!("{name} failed"))?;
    output::write(&cfg, name, &report)?;
    println!("{}", commands::headline(name, &report));
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
