//! Underdamped Langevin dynamics with bond, rolling and centre-of-mass
//! constraints.
//!
//! One step cycles through
//!
//! 1. `q += (p/m) Δt`,
//! 2. Newton projection of `q` back onto the bond manifold (hard bonds only),
//! 3. `p += -(γ/m) p Δt + σ √Δt N` plus the spring force for soft bonds,
//! 4. `p ← P(q) p` with `P` evaluated at the new position.
//!
//! The mass is the same for every coordinate; [`MassScaling`] maps a general
//! diagonal mass matrix onto that form.

use nalgebra::{DMatrix, DVector, SMatrix};

use crate::error::{Error, Result};
use crate::model::{
    assemble, ConstraintMode, ConstraintSet, ContactModel, Configuration, Matrix9, RowSpace,
    Vector9, DIM, MAX_ROWS, TRIMER_PAIRS,
};
use crate::rng::{normal_vector, SimRng};
use crate::trajectory::Frame;
use crate::trimer::{parameterize, AngleTracker};

/// Residual tolerance of the position projection.
pub const PROJECTION_TOL: f64 = 1e-10;
pub const PROJECTION_MAX_ITER: usize = 50;

/// Spring stiffness used for soft bonds unless configured otherwise.
pub const DEFAULT_STIFFNESS: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BondMode {
    Hard,
    /// `U = k Σ (|xi - xj| - 1)²` over the bonded pairs.
    Soft { stiffness: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub mass: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub beta: f64,
    pub dt: f64,
    pub n_steps: u64,
    pub seed: u64,
    pub constraint_mode: ConstraintMode,
    pub bond_mode: BondMode,
    pub record_stride: u64,
    /// With soft bonds, also keep the bond rows in the velocity projection.
    /// Off by default: the springs carry the bonds.
    pub soft_bond_rows: bool,
}

impl SimParams {
    /// m = 0.1, γ = 1, σ = 1 (so β = 2); Δt = 5e-3 when sliding, 1e-4 when
    /// rolling.
    pub fn reference(mode: ConstraintMode) -> Self {
        let dt = match mode {
            ConstraintMode::Slide => 5e-3,
            ConstraintMode::Roll => 1e-4,
        };
        Self {
            mass: 0.1,
            gamma: 1.0,
            sigma: 1.0,
            beta: 2.0,
            dt,
            n_steps: 1000,
            seed: 1,
            constraint_mode: mode,
            bond_mode: BondMode::Hard,
            record_stride: 1,
            soft_bond_rows: false,
        }
    }

    /// Sets `σ` from the temperature so that `σ² = 2γ/β`.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self.sigma = (2.0 * self.gamma / beta).sqrt();
        self
    }

    /// Sets `β` from the noise so that `σ² = 2γ/β`.
    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self.beta = 2.0 * self.gamma / (sigma * sigma);
        self
    }

    pub fn with_duration(mut self, t_max: f64) -> Self {
        self.n_steps = (t_max / self.dt).round().max(1.0) as u64;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.mass > 0.0) {
            return bad(format!("mass must be positive, got {}", self.mass));
        }
        if !(self.gamma >= 0.0) || !(self.sigma >= 0.0) {
            return bad("friction and noise must be non-negative".into());
        }
        if !(self.dt > 0.0) || self.n_steps < 1 || self.record_stride < 1 {
            return bad("need dt > 0, n_steps >= 1 and record_stride >= 1".into());
        }
        if let BondMode::Soft { stiffness } = self.bond_mode {
            if !(stiffness > 0.0) {
                return bad(format!("spring stiffness must be positive, got {stiffness}"));
            }
        }
        // Fluctuation-dissipation balance; zero friction with zero noise is a
        // legitimate deterministic limit at any temperature.
        if self.gamma > 0.0 || self.sigma > 0.0 {
            let lhs = self.sigma * self.sigma;
            let rhs = 2.0 * self.gamma / self.beta;
            if (lhs - rhs).abs() > 1e-12 * lhs.max(rhs).max(1.0) {
                return bad(format!(
                    "fluctuation-dissipation violated: sigma^2 = {lhs}, 2 gamma / beta = {rhs}"
                ));
            }
        }
        Ok(())
    }

    pub fn t_max(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    /// Rows applied to the momentum in step 4.
    pub fn velocity_constraints(&self) -> ConstraintSet {
        let cs = ConstraintSet::trimer(self.constraint_mode);
        match self.bond_mode {
            BondMode::Hard => cs,
            BondMode::Soft { .. } => {
                let cs = cs.with_contact(ContactModel::Compliant);
                if self.soft_bond_rows {
                    cs
                } else {
                    cs.without_bonds()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub q: Configuration,
    /// Momenta `m ẋ`.
    pub p: Vector9,
}

impl PhaseState {
    pub fn at_rest(q: Configuration) -> Self {
        Self {
            q,
            p: Vector9::zeros(),
        }
    }

    /// Open trimer at `ω = π/2`, `φ = 0`, zero spins, at rest.
    pub fn reference() -> Self {
        Self::at_rest(parameterize(std::f64::consts::FRAC_PI_2, 0.0))
    }
}

/// Holonomic residuals: `½(|xi - xj|² - 1)` per bond, then the two centroid
/// sums.
fn holonomic_residual(q: &Configuration) -> SMatrix<f64, MAX_ROWS, 1> {
    let mut g = SMatrix::<f64, MAX_ROWS, 1>::zeros();
    for (k, &pair) in TRIMER_PAIRS.iter().enumerate() {
        g[k] = 0.5 * (q.separation(pair).norm_squared() - 1.0);
    }
    let sum = q.position_sum();
    g[2] = sum.x;
    g[3] = sum.y;
    g
}

fn holonomic_error(q: &Configuration) -> f64 {
    let bonds = TRIMER_PAIRS
        .iter()
        .map(|&p| (q.bond_length(p) - 1.0).abs())
        .fold(0.0, f64::max);
    bonds.max(q.position_sum().amax())
}

/// Moves `q` along the bond and centroid gradients at `q` until both bonds
/// have unit length and the centroid sits at the origin.
///
/// Solves `g(q + Cᵀ(q) μ) = 0` for `μ` by Newton iteration with Jacobian
/// `C(q_k) C(q)ᵀ`.
pub fn project_position(q: &Configuration, tol: f64, max_iter: usize) -> Result<Configuration> {
    let cs = ConstraintSet::holonomic();
    let (base_rows, m) = cs.fill_rows(q)?;
    let mut current = *q;
    let mut residual = holonomic_error(&current);
    if residual < tol {
        return Ok(current);
    }
    let mut mu = SMatrix::<f64, MAX_ROWS, 1>::zeros();
    for iter in 0..max_iter {
        let (rows, _) = cs.fill_rows(&current)?;
        let mut jac = rows * base_rows.transpose();
        for k in m..MAX_ROWS {
            jac[(k, k)] = 1.0;
        }
        let g = holonomic_residual(&current);
        let step = jac.lu().solve(&g).ok_or(Error::ProjectionDiverged {
            iterations: iter,
            residual,
        })?;
        mu -= step;
        current = Configuration::new(q.as_vector() + base_rows.transpose() * mu);
        residual = holonomic_error(&current);
        if !residual.is_finite() {
            break;
        }
        if residual < tol {
            return Ok(current);
        }
    }
    Err(Error::ProjectionDiverged {
        iterations: max_iter,
        residual,
    })
}

/// `U = k Σ (|xi - xj| - 1)²`.
pub fn soft_bond_energy(q: &Configuration, stiffness: f64) -> f64 {
    TRIMER_PAIRS
        .iter()
        .map(|&p| {
            let d = q.bond_length(p) - 1.0;
            stiffness * d * d
        })
        .sum()
}

/// `-∇U` for the spring bonds; zero on the spin coordinates.
pub fn soft_bond_force(q: &Configuration, stiffness: f64) -> Result<Vector9> {
    if !(stiffness > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "spring stiffness must be positive, got {stiffness}"
        )));
    }
    let mut f = Vector9::zeros();
    for &pair in &TRIMER_PAIRS {
        let r = q.separation(pair);
        let len = r.norm();
        if len < 1e-12 {
            return Err(Error::Degenerate(format!(
                "discs {} and {} coincide, spring force undefined",
                pair.first(),
                pair.second()
            )));
        }
        let push = -2.0 * stiffness * (len - 1.0) / len * r;
        let (i, j) = (pair.first(), pair.second());
        f[2 * i] += push.x;
        f[2 * i + 1] += push.y;
        f[2 * j] -= push.x;
        f[2 * j + 1] -= push.y;
    }
    Ok(f)
}

/// One integrator cycle driven by an explicit standard-normal vector `noise`.
pub fn step_with_noise(
    state: &PhaseState,
    params: &SimParams,
    noise: &Vector9,
) -> Result<PhaseState> {
    let m = params.mass;
    let dt = params.dt;
    let moved = Configuration::new(state.q.as_vector() + state.p * (dt / m));
    let q = match params.bond_mode {
        BondMode::Hard => project_position(&moved, PROJECTION_TOL, PROJECTION_MAX_ITER)?,
        BondMode::Soft { .. } => moved,
    };
    let mut p = state.p * (1.0 - params.gamma / m * dt) + noise * (params.sigma * dt.sqrt());
    if let BondMode::Soft { stiffness } = params.bond_mode {
        p += soft_bond_force(&q, stiffness)? * dt;
    }
    let p = RowSpace::new(&q, &params.velocity_constraints())?.project(&p);
    Ok(PhaseState { q, p })
}

/// One integrator cycle drawing fresh noise from `rng`.
pub fn step(state: &PhaseState, params: &SimParams, rng: &mut SimRng) -> Result<PhaseState> {
    let noise = normal_vector(rng);
    step_with_noise(state, params, &noise)
}

/// Outcome of a Langevin run.
#[derive(Debug, Clone)]
pub struct LangevinRun {
    pub final_state: PhaseState,
    /// Largest `| |xi - xj| - 1 |` seen at recorded frames.
    pub max_bond_deviation: f64,
    /// Largest `|C(q) p/m|` seen at recorded frames.
    pub max_velocity_residual: f64,
    pub frames_recorded: u64,
}

/// Runs `params.n_steps` cycles, calling `record` every `record_stride` steps.
pub fn simulate_with<F: FnMut(&Frame)>(
    params: &SimParams,
    initial: PhaseState,
    rng: &mut SimRng,
    mut record: F,
) -> Result<LangevinRun> {
    params.validate()?;
    let cs = params.velocity_constraints();
    let mut state = initial;
    let mut tracker = AngleTracker::new(&state.q)?;
    let mut max_bond = 0.0f64;
    let mut max_vel = 0.0f64;
    let mut frames = 0;
    for n in 1..=params.n_steps {
        state = step(&state, params, rng)?;
        if n % params.record_stride == 0 {
            let (omega, phi) = tracker.update(&state.q)?;
            record(&Frame::new(n as f64 * params.dt, omega, phi, state.q.spins()));
            frames += 1;
            if params.bond_mode == BondMode::Hard {
                max_bond = max_bond.max(
                    TRIMER_PAIRS
                        .iter()
                        .map(|&p| (state.q.bond_length(p) - 1.0).abs())
                        .fold(0.0, f64::max),
                );
            }
            let c = cs.matrix(&state.q)?;
            let v = DVector::from_column_slice((state.p / params.mass).as_slice());
            max_vel = max_vel.max((c * v).amax());
        } else {
            // Keep the lift continuous between recorded frames.
            tracker.update(&state.q)?;
        }
    }
    Ok(LangevinRun {
        final_state: state,
        max_bond_deviation: max_bond,
        max_velocity_residual: max_vel,
        frames_recorded: frames,
    })
}

/// Like [`simulate_with`], collecting the frames.
pub fn simulate(
    params: &SimParams,
    initial: PhaseState,
    rng: &mut SimRng,
) -> Result<(LangevinRun, Vec<Frame>)> {
    let mut frames = Vec::with_capacity((params.n_steps / params.record_stride) as usize);
    let run = simulate_with(params, initial, rng, |f| frames.push(*f))?;
    Ok((run, frames))
}

/// `∇C(ẋ, ẋ)`: the rate of change of each row along `v`, dotted with `v`.
///
/// Bond rows give `|vi - vj|²`; rigid rolling rows give
/// `(vi - vj)⊥ · (vi - vj) = 0`; centroid rows are constant.
pub fn constraint_curvature(cs: &ConstraintSet, v: &Vector9) -> Result<DVector<f64>> {
    if cs.rolling_enabled && cs.contact != ContactModel::Rigid {
        return Err(Error::InvalidArgument(
            "analytic curvature is only available for rigid rolling rows".into(),
        ));
    }
    let mut out = DVector::zeros(cs.row_count());
    if cs.bonds_enabled {
        for (k, &pair) in cs.pairs.iter().enumerate() {
            let (i, j) = (pair.first(), pair.second());
            let dx = v[2 * i] - v[2 * j];
            let dy = v[2 * i + 1] - v[2 * j + 1];
            out[k] = dx * dx + dy * dy;
        }
    }
    Ok(out)
}

/// Multipliers `λ` of `m ẍ + γ ẋ = f - Cᵀλ` that keep `C ẍ + ∇C(ẋ, ẋ) = 0`.
///
/// `force` is every non-constraint force except friction (potential and
/// noise realisation).
pub fn lagrange_multipliers(
    state: &PhaseState,
    params: &SimParams,
    cs: &ConstraintSet,
    force: &Vector9,
) -> Result<DVector<f64>> {
    let bundle = assemble(&state.q, cs)?;
    let v = state.p / params.mass;
    let drive = force - v * params.gamma;
    let c = bundle.c();
    let drive = DVector::from_column_slice(drive.as_slice());
    let rhs = c * drive + constraint_curvature(cs, &v)? * params.mass;
    bundle.solve_gram(&rhs)
}

/// `ẍ` including the constraint forces.
pub fn constrained_acceleration(
    state: &PhaseState,
    params: &SimParams,
    cs: &ConstraintSet,
    force: &Vector9,
) -> Result<Vector9> {
    let lambda = lagrange_multipliers(state, params, cs, force)?;
    let c = cs.matrix(&state.q)?;
    let constraint_force = c.transpose() * lambda;
    let v = state.p / params.mass;
    Ok(Vector9::from_fn(|i, _| {
        (force[i] - params.gamma * v[i] - constraint_force[i]) / params.mass
    }))
}

/// Change to mass-scaled coordinates `x̃ = M^(1/2) x` for a diagonal mass
/// matrix `M`.
///
/// In the new variables the mass matrix is the identity, friction becomes
/// `M^(-1/2) Γ M^(-1/2)`, noise `M^(-1/2) σ` and constraints `C M^(-1/2)`;
/// the potential is composed with `M^(-1/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassScaling {
    sqrt_mass: Vector9,
}

/// Friction, noise and constraint matrices of one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsMatrices {
    pub gamma: Matrix9,
    pub sigma: Matrix9,
    pub c: DMatrix<f64>,
}

impl MassScaling {
    pub fn new(masses: &Vector9) -> Result<Self> {
        if let Some(bad) = masses.iter().find(|m| !(**m > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "mass entries must be positive, got {bad}"
            )));
        }
        Ok(Self {
            sqrt_mass: masses.map(f64::sqrt),
        })
    }

    pub fn uniform(mass: f64) -> Result<Self> {
        Self::new(&Vector9::repeat(mass))
    }

    pub fn coords(&self, x: &Vector9) -> Vector9 {
        x.component_mul(&self.sqrt_mass)
    }

    pub fn unscale_coords(&self, x: &Vector9) -> Vector9 {
        x.component_div(&self.sqrt_mass)
    }

    /// `ỹ = M^(1/2) ẋ`.
    pub fn velocity(&self, v: &Vector9) -> Vector9 {
        self.coords(v)
    }

    fn inv_sqrt(&self) -> Matrix9 {
        Matrix9::from_diagonal(&self.sqrt_mass.map(f64::recip))
    }

    fn sqrt(&self) -> Matrix9 {
        Matrix9::from_diagonal(&self.sqrt_mass)
    }

    pub fn scale(&self, sys: &DynamicsMatrices) -> Result<DynamicsMatrices> {
        self.check_columns(&sys.c)?;
        let s = self.inv_sqrt();
        Ok(DynamicsMatrices {
            gamma: s * sys.gamma * s,
            sigma: s * sys.sigma,
            c: &sys.c * DMatrix::from_column_slice(DIM, DIM, s.as_slice()),
        })
    }

    pub fn unscale(&self, sys: &DynamicsMatrices) -> Result<DynamicsMatrices> {
        self.check_columns(&sys.c)?;
        let s = self.sqrt();
        Ok(DynamicsMatrices {
            gamma: s * sys.gamma * s,
            sigma: s * sys.sigma,
            c: &sys.c * DMatrix::from_column_slice(DIM, DIM, s.as_slice()),
        })
    }

    /// `Ũ(x̃) = U(M^(-1/2) x̃)`.
    pub fn potential<'a, U>(&'a self, u: U) -> impl Fn(&Vector9) -> f64 + 'a
    where
        U: Fn(&Vector9) -> f64 + 'a,
    {
        move |xt| u(&self.unscale_coords(xt))
    }

    fn check_columns(&self, c: &DMatrix<f64>) -> Result<()> {
        if c.ncols() != DIM {
            return Err(Error::InvalidArgument(format!(
                "constraint matrix needs {DIM} columns, got {}",
                c.ncols()
            )));
        }
        Ok(())
    }
}
