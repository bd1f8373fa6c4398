use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use rolldisc_core::analytics::densities::Domain;
use rolldisc_core::langevin::{BondMode, DEFAULT_STIFFNESS};
use rolldisc_core::overdamped::Boundary;
use rolldisc_core::{ConstraintMode, Error, Result};

use crate::config::ConfigFile;
use crate::experiment::{default_spec, Engine, ExperimentSpec};

#[derive(Debug, Parser)]
#[command(name = "rolldisc", version, about = "Stochastic trimer of rolling or sliding discs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write trajectory, histogram and report files.
    Simulate(SimulateArgs),
    /// Run deterministic self-checks; exits nonzero if any check fails.
    Verify {
        /// Comma-separated suites, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Tabulate the four normalised equilibrium densities.
    DensityTable {
        #[arg(long, default_value_t = 181)]
        points: usize,
        /// `full` or `physical`.
        #[arg(long, default_value = "full")]
        domain: String,
    },
    /// Tail probabilities for every density, domain and angle variable.
    TailSweep {
        #[arg(long, default_value_t = 2.2)]
        threshold: f64,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `langevin`, `overdamped` or `reduced`.
    #[arg(long)]
    pub engine: Option<String>,
    /// `slide` or `roll`.
    #[arg(long)]
    pub mode: Option<String>,
    /// `hard` or `soft`.
    #[arg(long)]
    pub bonds: Option<String>,
    #[arg(long)]
    pub stiffness: Option<f64>,
    /// Keep the bond rows in the velocity projection with soft bonds.
    #[arg(long)]
    pub soft_bond_rows: Option<bool>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Sets `β = 2γ/σ²`; give either `sigma` or `beta`.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulated time; overrides `steps`.
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub record_stride: Option<u64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Histogram domain: `full` or `physical`.
    #[arg(long)]
    pub domain: Option<String>,
    /// Reduced engine boundary: `reflect` or `periodic`.
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Also write `density.svg`.
    #[arg(long)]
    pub svg: Option<bool>,
}

const CONFIG_KEYS: [&str; 20] = [
    "out", "engine", "mode", "bonds", "stiffness", "soft-bond-rows", "mass", "gamma", "sigma",
    "beta", "dt", "tmax", "steps", "seed", "record-stride", "replicas", "domain", "boundary",
    "bins", "svg",
];

fn pick<T: std::str::FromStr + Clone>(
    flag: &Option<T>,
    config: &ConfigFile,
    key: &str,
) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v.clone())),
        None => config.value(key),
    }
}

pub fn parse_domain(s: &str) -> Result<Domain> {
    match s {
        "full" => Ok(Domain::FULL),
        "physical" => Ok(Domain::PHYSICAL),
        other => Err(Error::InvalidArgument(format!(
            "unknown domain '{other}' (expected full or physical)"
        ))),
    }
}

fn parse_boundary(s: &str, domain: Domain) -> Result<Boundary> {
    match s {
        "reflect" => Ok(Boundary::Reflect { lo: domain.lo, hi: domain.hi }),
        "periodic" => Ok(Boundary::Periodic),
        other => Err(Error::InvalidArgument(format!(
            "unknown boundary '{other}' (expected reflect or periodic)"
        ))),
    }
}

/// Resolves flags over the config file over defaults.
pub fn resolve(args: &SimulateArgs) -> Result<ExperimentSpec> {
    let config = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(bad) = config.keys().find(|k| !CONFIG_KEYS.contains(k)) {
        return Err(Error::InvalidArgument(format!("unknown config key '{bad}'")));
    }
    let engine: Engine = pick(&args.engine, &config, "engine")?
        .as_deref()
        .unwrap_or("langevin")
        .parse()?;
    let mode: ConstraintMode = pick(&args.mode, &config, "mode")?
        .as_deref()
        .unwrap_or("slide")
        .parse()?;
    let out = pick(&args.out, &config, "out")?.unwrap_or_else(|| PathBuf::from("rolldisc-out"));
    let mut spec = default_spec(engine, mode, out);
    let p = &mut spec.params;

    match pick(&args.bonds, &config, "bonds")?.as_deref().unwrap_or("hard") {
        "hard" => {}
        "soft" => {
            p.bond_mode = BondMode::Soft {
                stiffness: pick(&args.stiffness, &config, "stiffness")?
                    .unwrap_or(DEFAULT_STIFFNESS),
            }
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown bond mode '{other}' (expected hard or soft)"
            )))
        }
    }
    if let Some(v) = pick(&args.soft_bond_rows, &config, "soft-bond-rows")? {
        p.soft_bond_rows = v;
    }
    if let Some(v) = pick(&args.mass, &config, "mass")? {
        p.mass = v;
    }
    if let Some(v) = pick(&args.gamma, &config, "gamma")? {
        p.gamma = v;
        p.sigma = (2.0 * v / p.beta).sqrt();
    }
    let sigma = pick(&args.sigma, &config, "sigma")?;
    let beta = pick(&args.beta, &config, "beta")?;
    match (sigma, beta) {
        (Some(s), Some(b)) => {
            p.sigma = s;
            p.beta = b;
        }
        (Some(s), None) => *p = p.clone().with_sigma(s),
        (None, Some(b)) => *p = p.clone().with_beta(b),
        (None, None) => {}
    }
    if let Some(v) = pick(&args.dt, &config, "dt")? {
        p.dt = v;
    }
    if let Some(v) = pick(&args.steps, &config, "steps")? {
        p.n_steps = v;
    }
    if let Some(v) = pick(&args.tmax, &config, "tmax")? {
        if !(v > 0.0) {
            return Err(Error::InvalidArgument(format!("tmax must be positive, got {v}")));
        }
        *p = p.clone().with_duration(v);
    }
    if let Some(v) = pick(&args.seed, &config, "seed")? {
        p.seed = v;
    }
    if let Some(v) = pick(&args.record_stride, &config, "record-stride")? {
        p.record_stride = v;
    }
    if let Some(v) = pick(&args.replicas, &config, "replicas")? {
        spec.replicas = v;
    }
    if let Some(v) = pick(&args.domain, &config, "domain")? {
        spec.domain = parse_domain(&v)?;
    }
    if let Some(v) = pick(&args.boundary, &config, "boundary")? {
        spec.boundary = parse_boundary(&v, Domain::FULL)?;
    }
    if let Some(v) = pick(&args.bins, &config, "bins")? {
        spec.bins = v;
    }
    if let Some(v) = pick(&args.svg, &config, "svg")? {
        spec.svg = v;
    }
    spec.validate()?;
    Ok(spec)
}
