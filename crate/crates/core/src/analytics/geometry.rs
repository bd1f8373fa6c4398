//! Geometry of the reduced coordinates `y = (ω, φ, θ₁, θ₂, θ₃)`: horizontal
//! directions, their normals, the conserved quantities, the tangent map of
//! the parameterisation, the Fixman factor and the overlap between the
//! rolling and sliding tangent spaces.

use nalgebra::{Matrix2, SMatrix, SVector};

use crate::model::{ConstraintMode, Vector9, TRIMER_PAIRS};
use crate::overdamped::{reduced_coefficients_at, ReducedState};
use crate::trimer::{d_omega, d_phi, horizontal_frame, k_squared, l_squared, parameterize};

pub type Vector5 = SVector<f64, 5>;

/// Horizontal direction that changes `ω`.
pub const T_OMEGA: [i64; 5] = [1, 0, -2, 0, 2];
/// Horizontal direction that rotates the cluster.
pub const T_PHI: [i64; 5] = [0, 3, 2, 4, 2];
/// Pure spinning.
pub const T_R: [i64; 5] = [0, 0, 1, -1, 1];
pub const N1: [i64; 5] = [-4, 0, -1, 0, 1];
pub const N2: [i64; 5] = [0, -4, 1, 2, 1];

pub const HORIZONTAL: [[i64; 5]; 3] = [T_OMEGA, T_PHI, T_R];
pub const NORMALS: [[i64; 5]; 2] = [N1, N2];

pub fn int_dot(a: &[i64; 5], b: &[i64; 5]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Every normal is orthogonal to every horizontal direction, in integers.
pub fn normals_orthogonal() -> bool {
    NORMALS
        .iter()
        .all(|n| HORIZONTAL.iter().all(|t| int_dot(n, t) == 0))
}

pub fn as_vector(v: &[i64; 5]) -> Vector5 {
    Vector5::from_fn(|i, _| v[i] as f64)
}

/// `(Q₁, Q₂) = (N₁·y, N₂·y)`.
pub fn conserved_from_angles(omega: f64, phi: f64, theta: [f64; 3]) -> (f64, f64) {
    let y = [omega, phi, theta[0], theta[1], theta[2]];
    let dot = |n: &[i64; 5]| n.iter().zip(&y).map(|(a, b)| *a as f64 * b).sum::<f64>();
    (dot(&N1), dot(&N2))
}

pub fn conserved_quantities(state: &ReducedState) -> (f64, f64) {
    conserved_from_angles(state.omega, state.phi, state.theta)
}

/// Jacobian `∂x/∂y` of the parameterisation.
pub fn tangent_map(omega: f64, phi: f64) -> SMatrix<f64, 9, 5> {
    reduced_coefficients_at(omega, phi).y
}

/// Angle between two vectors, accurate for nearly parallel inputs.
pub fn angle_between(a: &Vector9, b: &Vector9) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return f64::NAN;
    }
    let (ua, ub) = (a / na, b / nb);
    2.0 * (ua - ub).norm().atan2((ua + ub).norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentMapReport {
    pub omega: f64,
    pub phi: f64,
    /// Angles between `∇f T` and `t` for `ω`, `φ` and spin directions.
    pub angles: [f64; 3],
    /// Ratios `|∇f T| / |t|`, signed by orientation.
    pub factors: [f64; 3],
    /// Size of the position part of `∇f T_r`.
    pub spin_position_norm: f64,
    /// Largest Lie bracket of the horizontal fields in `y` coordinates.
    pub lie_bracket_max: f64,
}

impl TangentMapReport {
    pub fn max_angle(&self) -> f64 {
        self.angles.iter().copied().fold(0.0, f64::max)
    }
}

pub fn tangent_map_check(omega: f64, phi: f64) -> TangentMapReport {
    let jac = tangent_map(omega, phi);
    let frame = horizontal_frame(omega, phi);
    let targets = [frame.t_omega, frame.t_phi, frame.t_r];
    let mut angles = [0.0; 3];
    let mut factors = [0.0; 3];
    let mut images = [Vector9::zeros(); 3];
    for k in 0..3 {
        let image = jac * as_vector(&HORIZONTAL[k]);
        angles[k] = angle_between(&image, &targets[k]);
        factors[k] = image.dot(&targets[k]) / targets[k].norm_squared();
        images[k] = image;
    }
    TangentMapReport {
        omega,
        phi,
        angles,
        factors,
        spin_position_norm: images[2].fixed_rows::<6>(0).norm(),
        lie_bracket_max: lie_bracket_max(omega, phi),
    }
}

/// `[X, Y] = DY·X − DX·Y` by central differences for the horizontal fields,
/// which are constant in `y`.
fn lie_bracket_max(omega: f64, phi: f64) -> f64 {
    let field = |k: usize, _y: &Vector5| as_vector(&HORIZONTAL[k]);
    let y0 = Vector5::new(omega, phi, 0.0, 0.0, 0.0);
    let h = 1e-6;
    let deriv = |k: usize, dir: &Vector5| {
        (field(k, &(y0 + dir * h)) - field(k, &(y0 - dir * h))) / (2.0 * h)
    };
    let mut worst = 0.0f64;
    for a in 0..3 {
        for b in (a + 1)..3 {
            let xa = field(a, &y0);
            let xb = field(b, &y0);
            let bracket = deriv(b, &xa) - deriv(a, &xb);
            worst = worst.max(bracket.amax());
        }
    }
    worst
}

/// Gram matrix of the unit-normalised bond gradients `∇|xi − xj|`.
pub fn bond_gram(omega: f64) -> Matrix2<f64> {
    let x = parameterize(omega, 0.0);
    let grads: Vec<Vector9> = TRIMER_PAIRS
        .iter()
        .map(|&pair| {
            let r = x.separation(pair).normalize();
            let mut g = Vector9::zeros();
            g[2 * pair.first()] = r.x;
            g[2 * pair.first() + 1] = r.y;
            g[2 * pair.second()] = -r.x;
            g[2 * pair.second() + 1] = -r.y;
            g
        })
        .collect();
    Matrix2::from_fn(|i, j| grads[i].dot(&grads[j]))
}

/// `|A|^(−1/2)` with `A` the bond-gradient Gram matrix.
pub fn fixman_factor(omega: f64) -> f64 {
    bond_gram(omega).determinant().sqrt().recip()
}

/// `((1 + 2cos²ω)(1 + 2sin²ω))^(−1/2)`, equal to [`fixman_factor`].
pub fn fixman_closed_form(omega: f64) -> f64 {
    let (s, c) = omega.sin_cos();
    ((1.0 + 2.0 * c * c) * (1.0 + 2.0 * s * s)).sqrt().recip()
}

/// Product of the singular values of `EᵀF`, with `E` an orthonormal basis of
/// the allowed velocities and `F = (K⁻¹∂x/∂ω, L⁻¹∂x/∂φ)`.
pub fn subspace_overlap_mode(omega: f64, mode: ConstraintMode) -> f64 {
    let phi = 0.0;
    let mut f = SMatrix::<f64, 9, 2>::zeros();
    f.set_column(0, &(d_omega(omega, phi) / k_squared(omega).sqrt()));
    f.set_column(1, &(d_phi(omega, phi) / l_squared(omega).sqrt()));
    let m = match mode {
        ConstraintMode::Roll => {
            let frame = horizontal_frame(omega, phi);
            let mut e = SMatrix::<f64, 9, 3>::zeros();
            e.set_column(0, &frame.t_omega);
            e.set_column(1, &frame.t_phi);
            e.set_column(2, &frame.t_r);
            e.transpose() * f
        }
        ConstraintMode::Slide => {
            let mut e = SMatrix::<f64, 9, 5>::zeros();
            e.set_column(0, &f.column(0));
            e.set_column(1, &f.column(1));
            for k in 0..3 {
                e[(6 + k, 2 + k)] = 1.0;
            }
            let etf = e.transpose() * f;
            return etf.singular_values().iter().product();
        }
    };
    m.singular_values().iter().product()
}

pub fn subspace_overlap(omega: f64) -> f64 {
    subspace_overlap_mode(omega, ConstraintMode::Roll)
}

/// [`subspace_overlap`] divided by `K L`, which leaves
/// `(K² + 8)^(−1/2)(L² + 8/3)^(−1/2)`.
pub fn principal_overlap(omega: f64) -> f64 {
    subspace_overlap(omega) / (k_squared(omega) * l_squared(omega)).sqrt()
}

/// `(K² + 8)^(−1/2)(L² + 8/3)^(−1/2)`.
pub fn overlap_closed_form(omega: f64) -> f64 {
    ((k_squared(omega) + 8.0) * (l_squared(omega) + 8.0 / 3.0))
        .sqrt()
        .recip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::densities::{density, DensityKind};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn normals_are_orthogonal() {
        assert!(normals_orthogonal());
        assert_eq!(int_dot(&N1, &N1), 18);
    }

    #[test]
    fn conserved_examples() {
        assert_eq!(conserved_from_angles(0.0, 0.0, [0.0; 3]), (0.0, 0.0));
        let shift = |v: [i64; 5]| {
            let (a, b) = conserved_from_angles(v[0] as f64, v[1] as f64, [v[2] as f64, v[3] as f64, v[4] as f64]);
            (a, b)
        };
        assert_eq!(shift(T_OMEGA), (0.0, 0.0));
        assert_eq!(shift(T_PHI), (0.0, 0.0));
        assert_eq!(shift(N1).0, 18.0);
    }

    #[test]
    fn tangent_map_is_parallel() {
        let r = tangent_map_check(FRAC_PI_2, 0.0);
        assert!(r.max_angle() < 1e-10);
        assert!(r.factors.iter().all(|&f| f > 0.0));
        assert_eq!(r.spin_position_norm, 0.0);
        assert_eq!(r.lie_bracket_max, 0.0);
        let expect = [
            (k_squared(FRAC_PI_2) + 8.0).sqrt(),
            3.0 * (l_squared(FRAC_PI_2) + 8.0 / 3.0).sqrt(),
            3f64.sqrt(),
        ];
        for k in 0..3 {
            assert!((r.factors[k] - expect[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn fixman_from_gram_matches_closed_form() {
        for i in 0..=40 {
            let w = PI * i as f64 / 40.0;
            assert!((fixman_factor(w) - fixman_closed_form(w)).abs() < 1e-12);
            assert!((fixman_factor(w) - fixman_factor(PI - w)).abs() < 1e-12);
            let det = bond_gram(w).determinant();
            assert!((det - (4.0 - (2.0 * w).cos().powi(2))).abs() < 1e-12);
        }
        let ratio = fixman_factor(0.0) / fixman_factor(FRAC_PI_4);
        assert!((ratio - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn vibrational_densities_are_hard_times_fixman() {
        for (hard, vibr) in [
            (DensityKind::RollHard, DensityKind::RollVibr),
            (DensityKind::SlideHard, DensityKind::SlideVibr),
        ] {
            let c0 = density(vibr, 0.3).unwrap() / (density(hard, 0.3).unwrap() * fixman_factor(0.3));
            for i in 0..=50 {
                let w = PI * i as f64 / 50.0;
                let c = density(vibr, w).unwrap() / (density(hard, w).unwrap() * fixman_factor(w));
                assert!((c - c0).abs() < 1e-10 * c0);
            }
        }
    }

    #[test]
    fn overlap_closed_form_and_symmetry() {
        let at_right = principal_overlap(FRAC_PI_2);
        assert!((at_right - (26.0f64 / 3.0 * 14.0 / 3.0).sqrt().recip()).abs() < 1e-12);
        for i in 0..=30 {
            let w = PI * i as f64 / 30.0;
            assert!((principal_overlap(w) - overlap_closed_form(w)).abs() < 1e-10);
            assert!((subspace_overlap(w) - subspace_overlap(PI - w)).abs() < 1e-12);
            assert!((subspace_overlap_mode(w, ConstraintMode::Slide) - 1.0).abs() < 1e-12);
        }
    }
}
