//! Explicit coordinates `(ω, φ, θ)` on the bond manifold of the trimer.
//!
//! `ω` is half the internal angle at disc 2, measured counter-clockwise from
//! `x1 - x2` to `x3 - x2`, and `φ` rotates the whole cluster about the
//! origin. Shifting `ω` by `π` is the same configuration as rotating by `π`,
//! so the pair `(ω, φ)` is only defined up to `(ω + π, φ + π)`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};
use crate::model::{Configuration, Vector9};

/// Disc centres at `φ = 0`.
pub fn base_positions(omega: f64) -> [f64; 6] {
    let (s, c) = omega.sin_cos();
    [-s, -c / 3.0, 0.0, 2.0 * c / 3.0, s, -c / 3.0]
}

fn rotate_blocks(v: &[f64; 6], phi: f64) -> [f64; 6] {
    let (s, c) = phi.sin_cos();
    let mut out = [0.0; 6];
    for d in 0..3 {
        let (x, y) = (v[2 * d], v[2 * d + 1]);
        out[2 * d] = c * x - s * y;
        out[2 * d + 1] = s * x + c * y;
    }
    out
}

fn embed(pos: [f64; 6], spins: [f64; 3]) -> Vector9 {
    let mut x = Vector9::zeros();
    x.fixed_rows_mut::<6>(0).copy_from_slice(&pos);
    x[6] = spins[0];
    x[7] = spins[1];
    x[8] = spins[2];
    x
}

/// Configuration at `(ω, φ)` with zero spins; always on the bond manifold.
pub fn parameterize(omega: f64, phi: f64) -> Configuration {
    parameterize_full(omega, phi, [0.0; 3])
}

pub fn parameterize_full(omega: f64, phi: f64, spins: [f64; 3]) -> Configuration {
    Configuration::new(embed(rotate_blocks(&base_positions(omega), phi), spins))
}

/// `∂x/∂ω` (zero spin components).
pub fn d_omega(omega: f64, phi: f64) -> Vector9 {
    let (s, c) = omega.sin_cos();
    let base = [-c, s / 3.0, 0.0, -2.0 * s / 3.0, c, s / 3.0];
    embed(rotate_blocks(&base, phi), [0.0; 3])
}

/// `∂x/∂φ` (zero spin components).
pub fn d_phi(omega: f64, phi: f64) -> Vector9 {
    let b = base_positions(omega);
    let quarter = [-b[1], b[0], -b[3], b[2], -b[5], b[4]];
    embed(rotate_blocks(&quarter, phi), [0.0; 3])
}

/// `|∂x/∂ω|²`.
pub fn k_squared(omega: f64) -> f64 {
    let c = omega.cos();
    2.0 / 3.0 + 4.0 / 3.0 * c * c
}

/// `|∂x/∂φ|²`, the planar moment of inertia of the cluster.
pub fn l_squared(omega: f64) -> f64 {
    let s = omega.sin();
    2.0 / 3.0 + 4.0 / 3.0 * s * s
}

/// Noise intensity of `ω` under rolling, `(K² + 8)^(-1/2)`.
pub fn alpha1(omega: f64) -> f64 {
    (k_squared(omega) + 8.0).sqrt().recip()
}

/// Noise intensity of `φ` under rolling, `(L² + 8/3)^(-1/2)`.
pub fn alpha2(omega: f64) -> f64 {
    (l_squared(omega) + 8.0 / 3.0).sqrt().recip()
}

/// Spin rates that accompany a unit change of `ω` while rolling.
pub const SPIN_FOR_OMEGA: [f64; 3] = [-2.0, 0.0, 2.0];
/// Spin rates that accompany a unit rotation `φ` while rolling.
pub const SPIN_FOR_PHI: [f64; 3] = [2.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0];

/// Orthonormal basis of the velocities allowed under rolling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizontalFrame {
    /// Change of internal angle with the accompanying minimal spin.
    pub t_omega: Vector9,
    /// Rigid rotation with the accompanying minimal spin.
    pub t_phi: Vector9,
    /// Pure spinning, positions fixed.
    pub t_r: Vector9,
    pub k_squared: f64,
    pub l_squared: f64,
}

pub fn horizontal_frame(omega: f64, phi: f64) -> HorizontalFrame {
    let k2 = k_squared(omega);
    let l2 = l_squared(omega);
    let mut t_omega = d_omega(omega, phi);
    t_omega
        .fixed_rows_mut::<3>(6)
        .copy_from_slice(&SPIN_FOR_OMEGA);
    t_omega /= (k2 + 8.0).sqrt();
    let mut t_phi = d_phi(omega, phi);
    t_phi.fixed_rows_mut::<3>(6).copy_from_slice(&SPIN_FOR_PHI);
    t_phi /= (l2 + 8.0 / 3.0).sqrt();
    let mut t_r = Vector9::zeros();
    let r = 3f64.sqrt().recip();
    t_r[6] = r;
    t_r[7] = -r;
    t_r[8] = r;
    HorizontalFrame {
        t_omega,
        t_phi,
        t_r,
        k_squared: k2,
        l_squared: l2,
    }
}

/// Half the counter-clockwise angle from `x1 - x2` to `x3 - x2`, in `[0, π)`.
pub fn extract_omega(cfg: &Configuration) -> Result<f64> {
    let a = cfg.position(0) - cfg.position(1);
    let b = cfg.position(2) - cfg.position(1);
    if a.norm() < 1e-12 || b.norm() < 1e-12 {
        return Err(Error::Degenerate(
            "an outer disc coincides with the central disc".into(),
        ));
    }
    let cross = a.x * b.y - a.y * b.x;
    let angle = cross.atan2(a.dot(&b)).rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU.
    let omega = 0.5 * angle;
    Ok(if omega >= PI { 0.0 } else { omega })
}

/// Rotation angle `φ ∈ [0, 2π)` of a configuration whose half angle is `omega`.
pub fn extract_phi(cfg: &Configuration, omega: f64) -> f64 {
    let (s, c) = omega.sin_cos();
    let (x1, x2, x3) = (cfg.position(0), cfg.position(1), cfg.position(2));
    // x3 - x1 = 2 sin ω R(φ) e_x and x2 - (x1 + x3)/2 = cos ω R(φ) e_y.
    let across = x3 - x1;
    let apex = x2 - (x1 + x3) * 0.5;
    let e: Vector2<f64> = across * (0.5 * s) + Vector2::new(apex.y, -apex.x) * c;
    e.y.atan2(e.x).rem_euclid(TAU)
}

/// Follows `(ω, φ)` continuously along a trajectory.
///
/// Raw extraction folds `ω` into `[0, π)`, which jumps by `π` whenever the
/// outer discs pass through each other. Such a jump comes with a jump of `π`
/// in `φ`; the tracker undoes both, so the lifted angles can be fed into the
/// conserved quantities.
#[derive(Debug, Clone, Copy)]
pub struct AngleTracker {
    omega: f64,
    phi: f64,
}

impl AngleTracker {
    pub fn new(cfg: &Configuration) -> Result<Self> {
        let omega = extract_omega(cfg)?;
        let phi = extract_phi(cfg, omega);
        Ok(Self { omega, phi })
    }

    pub fn from_angles(omega: f64, phi: f64) -> Self {
        Self { omega, phi }
    }

    pub fn update(&mut self, cfg: &Configuration) -> Result<(f64, f64)> {
        let raw_omega = extract_omega(cfg)?;
        let raw_phi = extract_phi(cfg, raw_omega);
        let k = ((self.omega - raw_omega) / PI).round();
        let omega = raw_omega + k * PI;
        let shifted_phi = raw_phi + k * PI;
        let j = ((self.phi - shifted_phi) / TAU).round();
        self.omega = omega;
        self.phi = shifted_phi + j * TAU;
        Ok((self.omega, self.phi))
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Fold a lifted `ω` back to `[0, π)`.
pub fn fold_omega(omega: f64) -> f64 {
    let w = omega.rem_euclid(PI);
    if w >= PI {
        0.0
    } else {
        w
    }
}

/// Spin vector of a configuration.
pub fn spins(cfg: &Configuration) -> Vector3<f64> {
    Vector3::from(cfg.spins())
}
