//! Overdamped dynamics in Cartesian and reduced coordinates.
//!
//! The Cartesian engines move the full 9-vector and re-project positions onto
//! the bond/centroid manifold after each step. The reduced engine evolves
//! `(ω, φ, θ)` directly through the closed-form horizontal frame and never
//! assembles a Cartesian projection.

use nalgebra::SMatrix;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::langevin::{project_position, PROJECTION_MAX_ITER, PROJECTION_TOL};
use crate::model::{
    assemble, check_spd, sqrt_psd, ConstraintMode, ConstraintSet, ContactModel, Configuration,
    Matrix9, RowSpace, Vector9,
};
use crate::rng::{normal_vector, SimRng};
use crate::trimer::{
    d_omega, d_phi, extract_omega, horizontal_frame, k_squared, l_squared, HorizontalFrame,
};

/// Step for the finite-difference divergence term.
pub const DIVERGENCE_STEP: f64 = 1e-6;

/// Rows used by the Cartesian engines. Compliant rolling rows coincide with
/// rigid ones on the manifold and stay defined at the predictor point.
fn cartesian_rows(mode: ConstraintMode) -> ConstraintSet {
    ConstraintSet::trimer(mode).with_contact(ContactModel::Compliant)
}

/// One Euler–Heun step of `ẋ = P(x) ∘ η` for a given Wiener increment `dw`.
pub fn step_cartesian_strat_with(
    x: &Configuration,
    mode: ConstraintMode,
    dw: &Vector9,
) -> Result<Configuration> {
    let cs = cartesian_rows(mode);
    let k1 = RowSpace::new(x, &cs)?.project(dw);
    let predictor = Configuration::new(x.as_vector() + k1);
    let k2 = RowSpace::new(&predictor, &cs)?.project(dw);
    let corrected = Configuration::new(x.as_vector() + (k1 + k2) * 0.5);
    project_position(&corrected, PROJECTION_TOL, PROJECTION_MAX_ITER)
}

/// [`step_cartesian_strat_with`] with `dw = √dt N`.
pub fn step_cartesian_strat(
    x: &Configuration,
    mode: ConstraintMode,
    dt: f64,
    rng: &mut SimRng,
) -> Result<Configuration> {
    let dw = normal_vector(rng) * dt.sqrt();
    step_cartesian_strat_with(x, mode, &dw)
}

/// Potential energy on configuration space.
pub trait Potential {
    fn energy(&self, x: &Vector9) -> f64;

    /// Central-difference gradient unless overridden.
    fn gradient(&self, x: &Vector9) -> Vector9 {
        let h = DIVERGENCE_STEP;
        Vector9::from_fn(|i, _| {
            let mut up = *x;
            let mut dn = *x;
            up[i] += h;
            dn[i] -= h;
            (self.energy(&up) - self.energy(&dn)) / (2.0 * h)
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoPotential;

impl Potential for NoPotential {
    fn energy(&self, _: &Vector9) -> f64 {
        0.0
    }

    fn gradient(&self, _: &Vector9) -> Vector9 {
        Vector9::zeros()
    }
}

/// `½ κ (ω(x) - ω₀)²` with `ω` the half internal angle.
#[derive(Debug, Clone, Copy)]
pub struct OmegaWell {
    pub center: f64,
    pub stiffness: f64,
}

impl Potential for OmegaWell {
    fn energy(&self, x: &Vector9) -> f64 {
        match extract_omega(&Configuration::new(*x)) {
            Ok(w) => 0.5 * self.stiffness * (w - self.center).powi(2),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Parameters of the general overdamped equation.
#[derive(Debug, Clone)]
pub struct GeneralParams {
    pub mode: ConstraintMode,
    /// Friction matrix; must be symmetric positive definite.
    pub gamma: Matrix9,
    pub beta: f64,
    pub dt: f64,
}

impl GeneralParams {
    pub fn identity_friction(mode: ConstraintMode, beta: f64, dt: f64) -> Self {
        Self {
            mode,
            gamma: Matrix9::identity(),
            beta,
            dt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_spd(&self.gamma)?;
        if !(self.beta > 0.0) || !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(
                "beta and dt must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Projected mobility `(P Γ P)†` at `x`.
pub fn projected_mobility(
    x: &Configuration,
    mode: ConstraintMode,
    gamma: &Matrix9,
) -> Result<Matrix9> {
    let p = RowSpace::new(x, &cartesian_rows(mode))?.projector();
    mobility_from_projector(&p, gamma)
}

/// `(PΓP)† = P (PΓP + I − P)⁻¹ P` for an orthogonal projector `P` and SPD
/// `Γ`: the bracket acts as `PΓP` on the range of `P` and as the identity on
/// its complement, so it is invertible.
fn mobility_from_projector(p: &Matrix9, gamma: &Matrix9) -> Result<Matrix9> {
    let m = p * gamma * p + (Matrix9::identity() - p);
    let inv = m
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("projected friction is singular".into()))?
        .inverse();
    let out = p * inv * p;
    Ok((out + out.transpose()) * 0.5)
}

/// Drift and noise factor of the general equation at `x`.
#[derive(Debug, Clone)]
pub struct GeneralCoefficients {
    pub mobility: Matrix9,
    pub drift: Vector9,
    /// Symmetric square root of `2β⁻¹ (PΓP)†`.
    pub noise: Matrix9,
}

/// `drift = -M ∇U + β⁻¹ Σⱼ (∂ⱼM) P eⱼ` with `M = (PΓP)†`.
///
/// The second term is the derivative of `M` along each column of `P`. `P`
/// depends only on positions, so the spin directions contribute nothing and
/// are skipped.
pub fn general_coefficients<U: Potential + ?Sized>(
    x: &Configuration,
    params: &GeneralParams,
    potential: &U,
) -> Result<GeneralCoefficients> {
    let cs = cartesian_rows(params.mode);
    let p = RowSpace::new(x, &cs)?.projector();
    let mobility = mobility_from_projector(&p, &params.gamma)?;
    let mut drift = -(mobility * potential.gradient(x.as_vector()));
    let h = DIVERGENCE_STEP;
    for j in 0..6 {
        let mut up = *x.as_vector();
        let mut dn = up;
        up[j] += h;
        dn[j] -= h;
        let m_up = projected_mobility(&Configuration::new(up), params.mode, &params.gamma)?;
        let m_dn = projected_mobility(&Configuration::new(dn), params.mode, &params.gamma)?;
        let dm = (m_up - m_dn) / (2.0 * h);
        drift += dm * p.column(j) / params.beta;
    }
    let noise = sqrt_psd(&(mobility * (2.0 / params.beta)));
    Ok(GeneralCoefficients {
        mobility,
        drift,
        noise,
    })
}

/// One Itô–Euler step of the general equation for a given increment `dw`.
pub fn step_cartesian_general_with<U: Potential + ?Sized>(
    x: &Configuration,
    params: &GeneralParams,
    potential: &U,
    dw: &Vector9,
) -> Result<Configuration> {
    let coeff = general_coefficients(x, params, potential)?;
    let moved = Configuration::new(x.as_vector() + coeff.drift * params.dt + coeff.noise * dw);
    project_position(&moved, PROJECTION_TOL, PROJECTION_MAX_ITER)
}

pub fn step_cartesian_general<U: Potential + ?Sized>(
    x: &Configuration,
    params: &GeneralParams,
    potential: &U,
    rng: &mut SimRng,
) -> Result<Configuration> {
    params.validate()?;
    let dw = normal_vector(rng) * params.dt.sqrt();
    step_cartesian_general_with(x, params, potential, &dw)
}

/// Reduced coordinates `(ω, φ, θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub omega: f64,
    pub phi: f64,
    pub theta: [f64; 3],
}

impl ReducedState {
    pub fn new(omega: f64, phi: f64, theta: [f64; 3]) -> Self {
        Self { omega, phi, theta }
    }
}

/// Jacobian blocks and noise vectors of the reduced equations.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCoefficients {
    pub k2: f64,
    pub l2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub b1: Vector9,
    pub b2: Vector9,
    /// `∂x/∂(ω, φ)`.
    pub s: SMatrix<f64, 9, 2>,
    /// `∂x/∂θ`.
    pub t: SMatrix<f64, 9, 3>,
    pub y: SMatrix<f64, 9, 5>,
    /// Metric `SᵀS`.
    pub q: SMatrix<f64, 2, 2>,
    pub frame: HorizontalFrame,
}

/// Coefficients at `(ω, φ = 0)`.
pub fn reduced_coefficients(omega: f64) -> ReducedCoefficients {
    reduced_coefficients_at(omega, 0.0)
}

pub fn reduced_coefficients_at(omega: f64, phi: f64) -> ReducedCoefficients {
    let frame = horizontal_frame(omega, phi);
    let k2 = frame.k_squared;
    let l2 = frame.l_squared;
    let u = k2 + 8.0;
    let v = l2 + 8.0 / 3.0;
    let mut s = SMatrix::<f64, 9, 2>::zeros();
    s.set_column(0, &d_omega(omega, phi));
    s.set_column(1, &d_phi(omega, phi));
    let mut t = SMatrix::<f64, 9, 3>::zeros();
    for i in 0..3 {
        t[(6 + i, i)] = 1.0;
    }
    let mut y = SMatrix::<f64, 9, 5>::zeros();
    y.fixed_columns_mut::<2>(0).copy_from(&s);
    y.fixed_columns_mut::<3>(2).copy_from(&t);
    let q = s.transpose() * s;
    ReducedCoefficients {
        k2,
        l2,
        alpha1: u.sqrt().recip(),
        alpha2: v.sqrt().recip(),
        b1: frame.t_omega / u.sqrt(),
        b2: frame.t_phi / v.sqrt(),
        s,
        t,
        y,
        q,
        frame,
    }
}

/// Largest deviation of `P ∂x/∂ω`, `P ∂x/∂φ` from `K²/√(K²+8) t_ω` and
/// `L²/√(L²+8/3) t_φ`, with `P` assembled from the rolling constraint rows.
pub fn projected_column_residual(omega: f64, phi: f64) -> Result<f64> {
    let c = reduced_coefficients_at(omega, phi);
    let x = crate::trimer::parameterize(omega, phi);
    let bundle = assemble(&x, &ConstraintSet::trimer(ConstraintMode::Roll))?;
    let p = bundle.p();
    let pw = p * c.s.column(0);
    let pp = p * c.s.column(1);
    let ew = c.frame.t_omega * (c.k2 / (c.k2 + 8.0).sqrt());
    let ep = c.frame.t_phi * (c.l2 / (c.l2 + 8.0 / 3.0).sqrt());
    Ok((pw - ew).amax().max((pp - ep).amax()))
}

/// How `ω` is kept in range by the reduced engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Mirror `ω` back into `[lo, hi]`.
    Reflect { lo: f64, hi: f64 },
    /// Leave `ω` unwrapped. Shifting `ω` by `π` is the same configuration as
    /// shifting `φ` by `π`, so this matches the Cartesian topology.
    Periodic,
}

impl Boundary {
    pub const FULL: Boundary = Boundary::Reflect { lo: 0.0, hi: PI };

    fn apply(&self, omega: f64) -> f64 {
        match *self {
            Boundary::Periodic => omega,
            Boundary::Reflect { lo, hi } => {
                let width = hi - lo;
                let r = (omega - lo).rem_euclid(2.0 * width);
                lo + if r > width { 2.0 * width - r } else { r }
            }
        }
    }
}

impl Default for Boundary {
    fn default() -> Self {
        Boundary::FULL
    }
}

/// Velocity field `(ω̇, φ̇, θ̇)` for a noise vector `dw`.
fn reduced_field(mode: ConstraintMode, omega: f64, phi: f64, dw: &Vector9) -> [f64; 5] {
    match mode {
        ConstraintMode::Roll => {
            let f = horizontal_frame(omega, phi);
            let aw = f.t_omega.dot(dw);
            let ap = f.t_phi.dot(dw);
            let ar = f.t_r.dot(dw);
            let spin = |k: usize| f.t_omega[k] * aw + f.t_phi[k] * ap + f.t_r[k] * ar;
            [
                aw / (f.k_squared + 8.0).sqrt(),
                ap / (f.l_squared + 8.0 / 3.0).sqrt(),
                spin(6),
                spin(7),
                spin(8),
            ]
        }
        ConstraintMode::Slide => [
            d_omega(omega, phi).dot(dw) / k_squared(omega),
            d_phi(omega, phi).dot(dw) / l_squared(omega),
            dw[6],
            dw[7],
            dw[8],
        ],
    }
}

/// One Euler–Heun step of the reduced equations for a given increment `dw`.
pub fn step_reduced_with(
    state: &ReducedState,
    mode: ConstraintMode,
    boundary: Boundary,
    dw: &Vector9,
) -> ReducedState {
    let k1 = reduced_field(mode, state.omega, state.phi, dw);
    let wp = boundary.apply(state.omega + k1[0]);
    let k2 = reduced_field(mode, wp, state.phi + k1[1], dw);
    let avg = |i: usize| 0.5 * (k1[i] + k2[i]);
    ReducedState {
        omega: boundary.apply(state.omega + avg(0)),
        phi: state.phi + avg(1),
        theta: [
            state.theta[0] + avg(2),
            state.theta[1] + avg(3),
            state.theta[2] + avg(4),
        ],
    }
}

pub fn step_reduced(
    state: &ReducedState,
    mode: ConstraintMode,
    boundary: Boundary,
    dt: f64,
    rng: &mut SimRng,
) -> ReducedState {
    let dw = normal_vector(rng) * dt.sqrt();
    step_reduced_with(state, mode, boundary, &dw)
}

/// Reduced state of an on-manifold configuration, `ω` folded into `[0, π)`.
pub fn reduce(cfg: &Configuration) -> Result<ReducedState> {
    let omega = extract_omega(cfg)?;
    Ok(ReducedState {
        omega,
        phi: crate::trimer::extract_phi(cfg, omega),
        theta: cfg.spins(),
    })
}

/// Inverse of [`reduce`].
pub fn embed(state: &ReducedState) -> Configuration {
    crate::trimer::parameterize_full(state.omega, state.phi, state.theta)
}
