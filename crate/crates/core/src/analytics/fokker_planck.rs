//! Stationary Fokker–Planck equation of the rolling `ω` marginal.
//!
//! For a density `π(ω)` independent of `φ`, the `ω` flux is
//!
//! ```text
//! J = (α₁α₁' − L L' α₁² α₂²) π + α₁² π'
//! ```
//!
//! with `α₁² = 1/(K² + 8)` and `α₂² = 1/(L² + 8/3)`. A stationary density
//! satisfies `J' = 0`, and the no-flux boundary condition asks for `J = 0` at
//! the domain ends.

use super::jet::Jet;

/// `u = K² + 8` and `v = L² + 8/3` as jets in `ω`.
fn metric_jets(omega: f64) -> (Jet, Jet) {
    let w = Jet::variable(omega);
    let u = w.cos().powi(2) * (4.0 / 3.0) + (2.0 / 3.0 + 8.0);
    let v = w.sin().powi(2) * (4.0 / 3.0) + (2.0 / 3.0 + 8.0 / 3.0);
    (u, v)
}

/// Drift coefficient `a`, diffusion coefficient `d` and their first
/// derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxCoefficients {
    pub a: f64,
    pub da: f64,
    pub d: f64,
    pub dd: f64,
}

/// `a = −½u'/u² − ½v'/(uv)` and `d = 1/u`.
pub fn flux_coefficients(omega: f64) -> FluxCoefficients {
    let (u, v) = metric_jets(omega);
    // Lift first derivatives to jets so that a' follows by the chain rule.
    let du = Jet {
        v: u.d1,
        d1: u.d2,
        d2: 0.0,
    };
    let dv = Jet {
        v: v.d1,
        d1: v.d2,
        d2: 0.0,
    };
    let a = (du / (u * u)).scale(-0.5) - (dv / (u * v)).scale(0.5);
    let d = u.recip();
    FluxCoefficients {
        a: a.v,
        da: a.d1,
        d: d.v,
        dd: d.d1,
    }
}

/// `J(ω)` for a density given as a jet-valued function.
pub fn fp_flux<F: Fn(Jet) -> Jet>(density: F, omega: f64) -> f64 {
    let c = flux_coefficients(omega);
    let p = density(Jet::variable(omega));
    c.a * p.v + c.d * p.d1
}

/// `J'(ω)` with exact derivatives.
pub fn fp_residual<F: Fn(Jet) -> Jet>(density: F, omega: f64) -> f64 {
    let c = flux_coefficients(omega);
    let p = density(Jet::variable(omega));
    c.da * p.v + c.a * p.d1 + c.dd * p.d1 + c.d * p.d2
}

/// Flux with `π'` taken by a central difference of step `h`.
pub fn fp_flux_fd<F: Fn(f64) -> f64>(density: F, omega: f64, h: f64) -> f64 {
    let c = flux_coefficients(omega);
    let dp = (density(omega + h) - density(omega - h)) / (2.0 * h);
    c.a * density(omega) + c.d * dp
}

/// Residual from central differences only: inner step `h` for `π'`, outer
/// step `outer` for `J'`.
pub fn fp_residual_fd<F: Fn(f64) -> f64>(density: F, omega: f64, h: f64, outer: f64) -> f64 {
    (fp_flux_fd(&density, omega + outer, h) - fp_flux_fd(&density, omega - outer, h))
        / (2.0 * outer)
}

/// `π ∝ (α₁α₂)⁻¹ = √((K² + 8)(L² + 8/3))`.
pub fn inverse_noise_density(omega: Jet) -> Jet {
    let u = omega.cos().powi(2) * (4.0 / 3.0) + (2.0 / 3.0 + 8.0);
    let v = omega.sin().powi(2) * (4.0 / 3.0) + (2.0 / 3.0 + 8.0 / 3.0);
    (u * v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::densities::{density, DensityKind};
    use std::f64::consts::PI;

    #[test]
    fn coefficients_match_finite_differences() {
        for &w in &[0.2, 1.0, 2.4] {
            let c = flux_coefficients(w);
            let h = 1e-5;
            let cp = flux_coefficients(w + h);
            let cm = flux_coefficients(w - h);
            assert!(((cp.a - cm.a) / (2.0 * h) - c.da).abs() < 1e-8);
            assert!(((cp.d - cm.d) / (2.0 * h) - c.dd).abs() < 1e-8);
        }
    }

    #[test]
    fn rolling_density_has_zero_flux() {
        for i in 0..=200 {
            let w = PI * i as f64 / 200.0;
            let scale = inverse_noise_density(Jet::constant(w)).v;
            assert!(fp_flux(inverse_noise_density, w).abs() < 1e-12 * scale);
            assert!(fp_residual(inverse_noise_density, w).abs() < 1e-12 * scale);
            let hard = |x: Jet| DensityKind::RollHard.jet(x);
            assert!(fp_residual(hard, w).abs() < 1e-12 * density(DensityKind::RollHard, w).unwrap());
        }
    }

    #[test]
    fn other_densities_are_not_stationary() {
        let worst = |kind: DensityKind| {
            (0..=200)
                .map(|i| fp_residual(|x| kind.jet(x), PI * i as f64 / 200.0).abs())
                .fold(0.0, f64::max)
        };
        assert!(worst(DensityKind::SlideVibr) > 1e-3);
        assert!(worst(DensityKind::SlideHard) > 1e-3);
    }

    #[test]
    fn finite_difference_cross_check() {
        let f = |w: f64| density(DensityKind::SlideHard, w.clamp(0.0, PI)).unwrap();
        for &w in &[0.4, 1.1, 2.0] {
            let exact_flux = fp_flux(|x| DensityKind::SlideHard.jet(x), w);
            assert!((fp_flux_fd(f, w, 1e-6) - exact_flux).abs() < 1e-8);
            let exact = fp_residual(|x| DensityKind::SlideHard.jet(x), w);
            assert!((fp_residual_fd(f, w, 1e-6, 1e-4) - exact).abs() < 1e-5);
        }
    }
}
