//! Simulation experiments: one or more replicas of one engine, reduced to a
//! histogram and a KS score against the matching equilibrium law.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Value};

use rolldisc_core::analytics::densities::{DensityKind, DensityModel, Domain};
use rolldisc_core::langevin::{self, BondMode, PhaseState, SimParams};
use rolldisc_core::overdamped::{self, Boundary, ReducedState};
use rolldisc_core::rng::{stream, RNG_IDENTITY};
use rolldisc_core::stats::{lag1_autocorrelation, HistogramReport, DEFAULT_BINS};
use rolldisc_core::trajectory::Frame;
use rolldisc_core::trimer::{parameterize, AngleTracker};
use rolldisc_core::{ConstraintMode, Error, Result};

use crate::output::{fmt17, write_density_svg, write_histogram_csv};

pub const SCHEMA_VERSION: u32 = 1;
/// Fraction of each trajectory discarded before sampling.
pub const WARMUP_FRACTION: f64 = 0.01;
/// Thresholds on `ω` whose tail probabilities are reported.
pub const TAIL_THRESHOLDS: [f64; 1] = [2.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Langevin,
    Overdamped,
    Reduced,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Langevin => "langevin",
            Engine::Overdamped => "overdamped",
            Engine::Reduced => "reduced",
        }
    }
}

impl FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "langevin" => Ok(Engine::Langevin),
            "overdamped" => Ok(Engine::Overdamped),
            "reduced" => Ok(Engine::Reduced),
            other => Err(Error::InvalidArgument(format!(
                "unknown engine '{other}' (expected langevin, overdamped or reduced)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub engine: Engine,
    pub params: SimParams,
    pub replicas: usize,
    /// Histogram and KS domain; samples outside it are dropped.
    pub domain: Domain,
    /// Reduced engine only.
    pub boundary: Boundary,
    pub bins: usize,
    pub svg: bool,
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let soft = matches!(self.params.bond_mode, BondMode::Soft { .. });
        if soft && self.engine != Engine::Langevin {
            return Err(Error::InvalidArgument(format!(
                "engine '{}' requires hard bonds",
                self.engine.name()
            )));
        }
        if self.replicas == 0 || self.bins == 0 {
            return Err(Error::InvalidArgument(
                "replicas and bins must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Equilibrium law the samples are scored against.
    pub fn reference_kind(&self) -> DensityKind {
        let soft = matches!(self.params.bond_mode, BondMode::Soft { .. });
        match (self.params.constraint_mode, soft) {
            (ConstraintMode::Slide, false) => DensityKind::SlideHard,
            (ConstraintMode::Roll, false) => DensityKind::RollHard,
            (ConstraintMode::Slide, true) => DensityKind::SlideVibr,
            (ConstraintMode::Roll, true) => DensityKind::RollVibr,
        }
    }
}

/// Per-replica outcome.
#[derive(Debug, Clone)]
struct ReplicaResult {
    samples: Vec<f64>,
    frames: u64,
    q_drift: (f64, f64),
    max_bond_deviation: f64,
    max_velocity_residual: Option<f64>,
}

/// Streams frames to `trajectory.csv` and keeps folded `ω` after warm-up.
struct Recorder {
    writer: BufWriter<File>,
    skip: u64,
    seen: u64,
    samples: Vec<f64>,
    first: Option<(f64, f64)>,
    q_drift: (f64, f64),
    error: Option<std::io::Error>,
}

impl Recorder {
    fn create(path: &Path, expected_frames: u64) -> Result<Self> {
        let file = File::create(path).map_err(|e| io_error(path, e))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "t,omega,phi,theta1,theta2,theta3,Q1,Q2").map_err(|e| io_error(path, e))?;
        Ok(Self {
            writer,
            skip: (expected_frames as f64 * WARMUP_FRACTION).ceil() as u64,
            seen: 0,
            samples: Vec::with_capacity(expected_frames as usize),
            first: None,
            q_drift: (0.0, 0.0),
            error: None,
        })
    }

    fn push(&mut self, f: &Frame) {
        if self.error.is_none() {
            let line = format!(
                "{},{},{},{},{},{},{},{}",
                fmt17(f.t),
                fmt17(f.folded_omega()),
                fmt17(f.wrapped_phi()),
                fmt17(f.theta[0]),
                fmt17(f.theta[1]),
                fmt17(f.theta[2]),
                fmt17(f.q1),
                fmt17(f.q2)
            );
            if let Err(e) = writeln!(self.writer, "{line}") {
                self.error = Some(e);
            }
        }
        let (q1, q2) = *self.first.get_or_insert((f.q1, f.q2));
        self.q_drift.0 = self.q_drift.0.max((f.q1 - q1).abs());
        self.q_drift.1 = self.q_drift.1.max((f.q2 - q2).abs());
        if self.seen >= self.skip {
            self.samples.push(f.folded_omega());
        }
        self.seen += 1;
    }

    fn finish(mut self, path: &Path) -> Result<(Vec<f64>, u64, (f64, f64))> {
        if let Some(e) = self.error.take() {
            return Err(io_error(path, e));
        }
        self.writer.flush().map_err(|e| io_error(path, e))?;
        Ok((self.samples, self.seen, self.q_drift))
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

fn replica_dir(spec: &ExperimentSpec, r: usize) -> PathBuf {
    if spec.replicas == 1 {
        spec.out_dir.clone()
    } else {
        spec.out_dir.join(format!("replica-{r:04}"))
    }
}

fn bond_deviation(x: &rolldisc_core::Configuration) -> f64 {
    rolldisc_core::model::TRIMER_PAIRS
        .iter()
        .map(|&p| (x.bond_length(p) - 1.0).abs())
        .fold(0.0, f64::max)
}

fn run_replica(spec: &ExperimentSpec, r: usize) -> Result<ReplicaResult> {
    let dir = replica_dir(spec, r);
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let path = dir.join("trajectory.csv");
    let p = &spec.params;
    let expected = p.n_steps / p.record_stride;
    let mut rec = Recorder::create(&path, expected)?;
    let mut rng = stream(p.seed, r as u64);
    let start = parameterize(std::f64::consts::FRAC_PI_2, 0.0);
    let mut max_bond = 0.0f64;
    let mut max_vel = None;
    match spec.engine {
        Engine::Langevin => {
            let run = langevin::simulate_with(p, PhaseState::at_rest(start), &mut rng, |f| {
                rec.push(f)
            })?;
            max_bond = run.max_bond_deviation;
            max_vel = Some(run.max_velocity_residual);
        }
        Engine::Overdamped => {
            let mut x = start;
            let mut tracker = AngleTracker::new(&x)?;
            for n in 1..=p.n_steps {
                x = overdamped::step_cartesian_strat(&x, p.constraint_mode, p.dt, &mut rng)?;
                let (w, phi) = tracker.update(&x)?;
                if n % p.record_stride == 0 {
                    rec.push(&Frame::new(n as f64 * p.dt, w, phi, x.spins()));
                    max_bond = max_bond.max(bond_deviation(&x));
                }
            }
        }
        Engine::Reduced => {
            let mut s = ReducedState::new(std::f64::consts::FRAC_PI_2, 0.0, [0.0; 3]);
            for n in 1..=p.n_steps {
                s = overdamped::step_reduced(&s, p.constraint_mode, spec.boundary, p.dt, &mut rng);
                if n % p.record_stride == 0 {
                    rec.push(&Frame::new(n as f64 * p.dt, s.omega, s.phi, s.theta));
                }
            }
        }
    }
    let (samples, frames, q_drift) = rec.finish(&path)?;
    Ok(ReplicaResult {
        samples,
        frames,
        q_drift,
        max_bond_deviation: max_bond,
        max_velocity_residual: max_vel,
    })
}

/// Number of worker threads: `ROLLDISC_THREADS` if set, else all cores.
pub fn thread_count() -> usize {
    std::env::var("ROLLDISC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn check(name: &str, value: f64, tolerance: Option<f64>) -> Value {
    let pass = tolerance.map(|t| value.is_finite() && value < t);
    json!({ "name": name, "value": value, "tolerance": tolerance, "pass": pass })
}

/// Runs every replica, then writes `histogram.csv`, `report.json` and
/// optionally `density.svg` into the output directory. Returns the report.
pub fn run(spec: &ExperimentSpec) -> Result<Value> {
    spec.validate()?;
    fs::create_dir_all(&spec.out_dir).map_err(|e| io_error(&spec.out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count().min(spec.replicas))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<ReplicaResult> = pool.install(|| {
        (0..spec.replicas)
            .into_par_iter()
            .map(|r| run_replica(spec, r))
            .collect::<Result<Vec<_>>>()
    })?;

    let model = DensityModel::new(spec.reference_kind(), spec.domain)?;
    let mut samples = Vec::new();
    let mut lag1 = Vec::new();
    for r in &results {
        lag1.push(lag1_autocorrelation(&r.samples));
        samples.extend(r.samples.iter().copied().filter(|&w| spec.domain.contains(w)));
    }
    if samples.is_empty() {
        return Err(Error::Precondition(
            "no samples left after warm-up and domain truncation; increase tmax or lower stride"
                .into(),
        ));
    }
    let thresholds: Vec<f64> = TAIL_THRESHOLDS
        .iter()
        .copied()
        .filter(|&t| spec.domain.contains(t))
        .collect();
    let hist = HistogramReport::build(&samples, &model, spec.bins, &thresholds)?;
    write_histogram_csv(&spec.out_dir.join("histogram.csv"), &hist)?;
    if spec.svg {
        write_density_svg(&spec.out_dir.join("density.svg"), &hist, &model)?;
    }

    let hard = spec.params.bond_mode == BondMode::Hard;
    let rolling = spec.params.constraint_mode == ConstraintMode::Roll;
    let worst = |f: &dyn Fn(&ReplicaResult) -> f64| results.iter().map(f).fold(0.0, f64::max);
    let mut checks = Vec::new();
    if hard && spec.engine != Engine::Reduced {
        checks.push(check("max_bond_deviation", worst(&|r| r.max_bond_deviation), Some(1e-8)));
    }
    if spec.engine == Engine::Langevin {
        checks.push(check(
            "max_velocity_constraint_residual",
            worst(&|r| r.max_velocity_residual.unwrap_or(0.0)),
            Some(1e-8),
        ));
    }
    if rolling && hard {
        // Exact for the reduced scheme; first order in dt for the others.
        let tol = (spec.engine == Engine::Reduced).then_some(1e-8);
        checks.push(check("max_abs_dQ1", worst(&|r| r.q_drift.0), tol));
        checks.push(check("max_abs_dQ2", worst(&|r| r.q_drift.1), tol));
    }

    let p = &spec.params;
    let bond = match p.bond_mode {
        BondMode::Hard => json!({ "mode": "hard" }),
        BondMode::Soft { stiffness } => json!({
            "mode": "soft",
            "stiffness": stiffness,
            "bond_rows_in_velocity_projection": p.soft_bond_rows,
        }),
    };
    let boundary = match spec.boundary {
        Boundary::Periodic => json!({ "kind": "periodic" }),
        Boundary::Reflect { lo, hi } => json!({ "kind": "reflect", "lo": lo, "hi": hi }),
    };
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "rng": RNG_IDENTITY,
        "engine": spec.engine.name(),
        "params": {
            "constraint_mode": p.constraint_mode.name(),
            "bond": bond,
            "mass": p.mass,
            "gamma": p.gamma,
            "sigma": p.sigma,
            "beta": p.beta,
            "dt": p.dt,
            "n_steps": p.n_steps,
            "t_max": p.t_max(),
            "seed": p.seed,
            "record_stride": p.record_stride,
            "replicas": spec.replicas,
            "boundary": boundary,
        },
        "sampling": {
            "warmup_fraction": WARMUP_FRACTION,
            "frames_per_replica": results.iter().map(|r| r.frames).collect::<Vec<_>>(),
            "lag1_autocorrelation": lag1,
        },
        "histogram": {
            "reference": hist.reference,
            "domain": [spec.domain.lo, spec.domain.hi],
            "bins": spec.bins,
            "n_samples": hist.n_samples,
            "ks_statistic": hist.ks_statistic,
        },
        "tails": hist.tail_estimates.iter().map(|(t, emp, m)| json!({
            "threshold": t, "variable": "omega", "empirical": emp, "model": m,
        })).collect::<Vec<_>>(),
        "checks": checks,
    });
    let path = spec.out_dir.join("report.json");
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::InvalidArgument(format!("report serialisation: {e}")))?;
    fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
    Ok(report)
}

/// Default spec for an engine and mode, before any overrides.
pub fn default_spec(engine: Engine, mode: ConstraintMode, out_dir: PathBuf) -> ExperimentSpec {
    let mut params = SimParams::reference(mode);
    if engine != Engine::Langevin {
        params.dt = 1e-3;
    }
    ExperimentSpec {
        engine,
        params,
        replicas: 1,
        domain: Domain::FULL,
        boundary: Boundary::FULL,
        bins: DEFAULT_BINS,
        svg: false,
        out_dir,
    }
}
