//! Configuration space of the disc trimer and its linear velocity constraints.
//!
//! A configuration is the 9-vector `(x1, y1, x2, y2, x3, y3, θ1, θ2, θ3)`:
//! three disc centres in units of the disc diameter followed by the three
//! spin angles. Velocity constraints are rows `c` with `c · ẋ = 0`:
//!
//! * bond rows keep a pair of discs in contact,
//! * rolling rows make the contact points of a pair move together, coupling
//!   the spins to the relative motion like meshed gears,
//! * two centre-of-mass rows pin the cluster's centroid.
//!
//! [`assemble`] stacks the rows into `C`, forms the Gram matrix `G = C Cᵀ`
//! and the orthogonal projection `P = I - Cᵀ G⁻¹ C` onto allowed velocities.

use nalgebra::{DMatrix, SMatrix, SVector, SymmetricEigen, Vector2};

use crate::error::{Error, Result};

pub const DIM: usize = 9;
pub const DISCS: usize = 3;

pub type Vector9 = SVector<f64, 9>;
pub type Matrix9 = SMatrix<f64, 9, 9>;

/// Bond-length tolerance within which a pair counts as touching.
pub const CONTACT_TOL: f64 = 1e-6;

/// Tolerance of the on-manifold check.
pub const MANIFOLD_TOL: f64 = 1e-10;

/// Largest acceptable condition number of the Gram matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative singular-value cutoff used by the pseudoinverses.
pub const PINV_RCOND: f64 = 1e-12;

// Three pairs of bond and rolling rows plus two centre-of-mass rows.
pub(crate) const MAX_ROWS: usize = 8;
pub(crate) type RowBlock = SMatrix<f64, MAX_ROWS, DIM>;
pub(crate) type GramBlock = SMatrix<f64, MAX_ROWS, MAX_ROWS>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    x: Vector9,
}

impl Configuration {
    pub fn new(x: Vector9) -> Self {
        Self { x }
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() != DIM {
            return Err(Error::InvalidArgument(format!(
                "configuration needs {DIM} coordinates, got {}",
                values.len()
            )));
        }
        Ok(Self::new(Vector9::from_column_slice(values)))
    }

    pub fn from_parts(positions: [[f64; 2]; DISCS], spins: [f64; DISCS]) -> Self {
        let mut x = Vector9::zeros();
        for (d, p) in positions.iter().enumerate() {
            x[2 * d] = p[0];
            x[2 * d + 1] = p[1];
        }
        for (d, s) in spins.iter().enumerate() {
            x[6 + d] = *s;
        }
        Self { x }
    }

    pub fn as_vector(&self) -> &Vector9 {
        &self.x
    }

    pub fn into_vector(self) -> Vector9 {
        self.x
    }

    pub fn position(&self, disc: usize) -> Vector2<f64> {
        Vector2::new(self.x[2 * disc], self.x[2 * disc + 1])
    }

    pub fn spin(&self, disc: usize) -> f64 {
        self.x[6 + disc]
    }

    pub fn spins(&self) -> [f64; DISCS] {
        [self.x[6], self.x[7], self.x[8]]
    }

    /// Sum of the disc centres (the quantity pinned to zero by the COM rows).
    pub fn position_sum(&self) -> Vector2<f64> {
        (0..DISCS).map(|d| self.position(d)).sum()
    }

    pub fn separation(&self, pair: Pair) -> Vector2<f64> {
        self.position(pair.i) - self.position(pair.j)
    }

    pub fn bond_length(&self, pair: Pair) -> f64 {
        self.separation(pair).norm()
    }

    /// Both trimer bonds at unit length and the centroid at the origin.
    pub fn is_on_manifold(&self, tol: f64) -> bool {
        TRIMER_PAIRS
            .iter()
            .all(|&p| (self.bond_length(p) - 1.0).abs() <= tol)
            && self.position_sum().amax() <= tol
    }

    /// Rigid rotation of all disc centres about the origin; spins untouched.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let mut x = self.x;
        for d in 0..DISCS {
            let (px, py) = (x[2 * d], x[2 * d + 1]);
            x[2 * d] = c * px - s * py;
            x[2 * d + 1] = s * px + c * py;
        }
        Self { x }
    }

    pub fn translated(&self, shift: Vector2<f64>) -> Self {
        let mut x = self.x;
        for d in 0..DISCS {
            x[2 * d] += shift.x;
            x[2 * d + 1] += shift.y;
        }
        Self { x }
    }
}

/// Ordered pair of distinct discs, zero based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pair {
    i: usize,
    j: usize,
}

impl Pair {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i >= DISCS || j >= DISCS || i == j {
            return Err(Error::InvalidArgument(format!(
                "pair ({i}, {j}) must name two distinct discs in 0..{DISCS}"
            )));
        }
        Ok(Self { i, j })
    }

    pub fn first(&self) -> usize {
        self.i
    }

    pub fn second(&self) -> usize {
        self.j
    }
}

/// The two contacts of the linear trimer: discs 1-2 and 2-3.
pub const TRIMER_PAIRS: [Pair; 2] = [Pair { i: 0, j: 1 }, Pair { i: 1, j: 2 }];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintMode {
    Slide,
    Roll,
}

impl ConstraintMode {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintMode::Slide => "slide",
            ConstraintMode::Roll => "roll",
        }
    }
}

impl std::str::FromStr for ConstraintMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slide" => Ok(ConstraintMode::Slide),
            "roll" => Ok(ConstraintMode::Roll),
            other => Err(Error::InvalidArgument(format!(
                "unknown constraint mode `{other}` (expected slide|roll)"
            ))),
        }
    }
}

/// How rolling rows treat the contact geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactModel {
    /// Discs are exactly touching; rolling rows refuse pairs that are not.
    Rigid,
    /// Rolling rows use the unit separation direction, so they stay defined
    /// for pairs slightly off contact (spring bonds, predictor stages).
    Compliant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub bonds_enabled: bool,
    pub rolling_enabled: bool,
    pub com_pinned: bool,
    pub contact: ContactModel,
    pub pairs: Vec<Pair>,
}

impl ConstraintSet {
    /// Hard bonds, pinned centroid, rolling rows when `mode` is `Roll`.
    pub fn trimer(mode: ConstraintMode) -> Self {
        Self {
            bonds_enabled: true,
            rolling_enabled: mode == ConstraintMode::Roll,
            com_pinned: true,
            contact: ContactModel::Rigid,
            pairs: TRIMER_PAIRS.to_vec(),
        }
    }

    /// Only the holonomic rows: bonds and centroid.
    pub fn holonomic() -> Self {
        Self::trimer(ConstraintMode::Slide)
    }

    pub fn with_contact(mut self, contact: ContactModel) -> Self {
        self.contact = contact;
        self
    }

    pub fn without_bonds(mut self) -> Self {
        self.bonds_enabled = false;
        self
    }

    pub fn row_count(&self) -> usize {
        let per_pair = usize::from(self.bonds_enabled) + usize::from(self.rolling_enabled);
        per_pair * self.pairs.len() + if self.com_pinned { 2 } else { 0 }
    }

    pub(crate) fn fill_rows(&self, cfg: &Configuration) -> Result<(RowBlock, usize)> {
        let m = self.row_count();
        if m > MAX_ROWS {
            return Err(Error::InvalidArgument(format!(
                "{m} constraint rows exceed the supported {MAX_ROWS}"
            )));
        }
        let mut rows = RowBlock::zeros();
        let mut r = 0;
        if self.bonds_enabled {
            for &pair in &self.pairs {
                rows.set_row(r, &bond_row(cfg, pair).transpose());
                r += 1;
            }
        }
        if self.rolling_enabled {
            for &pair in &self.pairs {
                let row = match self.contact {
                    ContactModel::Rigid => rolling_row(cfg, pair)?,
                    ContactModel::Compliant => compliant_rolling_row(cfg, pair)?,
                };
                rows.set_row(r, &row.transpose());
                r += 1;
            }
        }
        if self.com_pinned {
            for axis in 0..2 {
                rows.set_row(r, &com_row(axis).transpose());
                r += 1;
            }
        }
        debug_assert_eq!(r, m);
        Ok((rows, m))
    }

    /// `C(x)` with rows ordered bonds, rolling, centroid.
    pub fn matrix(&self, cfg: &Configuration) -> Result<DMatrix<f64>> {
        let (rows, m) = self.fill_rows(cfg)?;
        Ok(DMatrix::from_fn(m, DIM, |i, j| rows[(i, j)]))
    }
}

fn perp(u: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-u.y, u.x)
}

fn put_pair(row: &mut Vector9, pair: Pair, a: Vector2<f64>) {
    row[2 * pair.i] = a.x;
    row[2 * pair.i + 1] = a.y;
    row[2 * pair.j] = -a.x;
    row[2 * pair.j + 1] = -a.y;
}

/// Row of `(xi - xj)·(ẋi - ẋj) = 0`.
///
/// Coincident discs give a zero row; [`assemble`] reports the resulting rank
/// loss.
pub fn bond_row(cfg: &Configuration, pair: Pair) -> Vector9 {
    let mut row = Vector9::zeros();
    put_pair(&mut row, pair, cfg.separation(pair));
    row
}

/// Row of `(xi - xj)⊥·(ẋi - ẋj) - ½(θ̇i + θ̇j) = 0` with `(u, v)⊥ = (-v, u)`.
pub fn rolling_row(cfg: &Configuration, pair: Pair) -> Result<Vector9> {
    let r = cfg.separation(pair);
    let len = r.norm();
    if (len - 1.0).abs() > CONTACT_TOL {
        return Err(Error::Precondition(format!(
            "rolling needs discs {} and {} in contact, separation is {len}",
            pair.i, pair.j
        )));
    }
    Ok(rolling_row_from(perp(r), pair))
}

/// Rolling row built from the unit separation, defined off contact.
pub fn compliant_rolling_row(cfg: &Configuration, pair: Pair) -> Result<Vector9> {
    let r = cfg.separation(pair);
    let len = r.norm();
    if len < 1e-12 {
        return Err(Error::Degenerate(format!(
            "discs {} and {} coincide",
            pair.i, pair.j
        )));
    }
    Ok(rolling_row_from(perp(r / len), pair))
}

fn rolling_row_from(tangent: Vector2<f64>, pair: Pair) -> Vector9 {
    let mut row = Vector9::zeros();
    put_pair(&mut row, pair, tangent);
    row[6 + pair.i] = -0.5;
    row[6 + pair.j] = -0.5;
    row
}

/// Centre-of-mass row for `axis` 0 (x) or 1 (y).
pub fn com_row(axis: usize) -> Vector9 {
    let mut row = Vector9::zeros();
    for d in 0..DISCS {
        row[2 * d + axis] = 1.0;
    }
    row
}

/// Constraint matrix together with its Gram matrix and tangent projection.
#[derive(Debug, Clone)]
pub struct ProjectionBundle {
    c: DMatrix<f64>,
    g: DMatrix<f64>,
    p: Matrix9,
    condition: f64,
}

impl ProjectionBundle {
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// Orthogonal projection onto the allowed velocities.
    pub fn p(&self) -> &Matrix9 {
        &self.p
    }

    /// Projection onto the row space of `C`.
    pub fn p_perp(&self) -> Matrix9 {
        Matrix9::identity() - self.p
    }

    pub fn rows(&self) -> usize {
        self.c.nrows()
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn project(&self, v: &Vector9) -> Vector9 {
        self.p * v
    }

    /// `Γ_P = P Γ P`.
    pub fn gamma_p(&self, gamma: &Matrix9) -> Matrix9 {
        self.p * gamma * self.p
    }

    /// Moore–Penrose pseudoinverse of `P Γ P`.
    pub fn gamma_p_dagger(&self, gamma: &Matrix9) -> Result<Matrix9> {
        check_spd(gamma)?;
        Ok(pinv_symmetric(&self.gamma_p(gamma)))
    }

    /// Solves `G λ = rhs`.
    pub fn solve_gram(&self, rhs: &nalgebra::DVector<f64>) -> Result<nalgebra::DVector<f64>> {
        self.g
            .clone()
            .cholesky()
            .map(|ch| ch.solve(rhs))
            .ok_or(Error::RankDeficient {
                condition: self.condition,
            })
    }
}

/// Builds `C`, `G = C Cᵀ` and `P = I - Cᵀ G⁻¹ C` at `cfg`.
pub fn assemble(cfg: &Configuration, cs: &ConstraintSet) -> Result<ProjectionBundle> {
    let c = cs.matrix(cfg)?;
    let m = c.nrows();
    let g = &c * c.transpose();
    let condition = if m == 0 {
        1.0
    } else {
        let eig = SymmetricEigen::new(g.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::RankDeficient { condition });
    }
    let chol = g
        .clone()
        .cholesky()
        .ok_or(Error::RankDeficient { condition })?;
    let x = chol.solve(&c);
    let mut p = Matrix9::identity();
    let ctx = c.transpose() * x;
    for i in 0..DIM {
        for j in 0..DIM {
            p[(i, j)] -= ctx[(i, j)];
        }
    }
    // Clean rounding asymmetry so P is exactly symmetric.
    let p = (p + p.transpose()) * 0.5;
    Ok(ProjectionBundle { c, g, p, condition })
}

/// Factorised row space used by the integrators: rows padded to a fixed
/// size, with identity on the unused Gram diagonal so the padding drops out
/// of `Cᵀ G⁻¹ C`.
pub(crate) struct RowSpace {
    rows: RowBlock,
    chol: nalgebra::Cholesky<f64, nalgebra::Const<MAX_ROWS>>,
}

impl RowSpace {
    pub(crate) fn new(cfg: &Configuration, cs: &ConstraintSet) -> Result<Self> {
        let (rows, m) = cs.fill_rows(cfg)?;
        let mut g: GramBlock = rows * rows.transpose();
        for k in m..MAX_ROWS {
            g[(k, k)] = 1.0;
        }
        let chol = g.cholesky().ok_or(Error::RankDeficient {
            condition: f64::INFINITY,
        })?;
        Ok(Self { rows, chol })
    }

    /// `v - Cᵀ G⁻¹ C v`.
    pub(crate) fn project(&self, v: &Vector9) -> Vector9 {
        let coeff = self.chol.solve(&(self.rows * v));
        v - self.rows.transpose() * coeff
    }

    pub(crate) fn projector(&self) -> Matrix9 {
        let x = self.chol.solve(&self.rows);
        let mut p = Matrix9::identity() - self.rows.transpose() * x;
        p = (p + p.transpose()) * 0.5;
        p
    }
}

/// Projects `v` onto the allowed velocities at `cfg` without forming `P`.
pub fn project_tangent(cfg: &Configuration, cs: &ConstraintSet, v: &Vector9) -> Result<Vector9> {
    Ok(RowSpace::new(cfg, cs)?.project(v))
}

/// `P(x)` through the fixed-size factorisation used in the integrators.
pub fn projector(cfg: &Configuration, cs: &ConstraintSet) -> Result<Matrix9> {
    Ok(RowSpace::new(cfg, cs)?.projector())
}

pub fn check_spd(m: &Matrix9) -> Result<()> {
    let asym = (m - m.transpose()).amax();
    if asym > 1e-12 * m.amax().max(1.0) {
        return Err(Error::NotPositiveDefinite(format!(
            "asymmetry {asym:.3e}"
        )));
    }
    if m.cholesky().is_none() {
        return Err(Error::NotPositiveDefinite(
            "Cholesky factorisation failed".into(),
        ));
    }
    Ok(())
}

/// Pseudoinverse of a symmetric matrix through its spectral decomposition.
/// Eigenvalues below `PINV_RCOND` times the largest magnitude are dropped.
pub fn pinv_symmetric(m: &Matrix9) -> Matrix9 {
    spectral_map(m, |lambda, cutoff| {
        if lambda.abs() > cutoff {
            1.0 / lambda
        } else {
            0.0
        }
    })
}

/// Symmetric square root of a positive semidefinite matrix; negative
/// rounding noise in the spectrum is clamped to zero.
pub fn sqrt_psd(m: &Matrix9) -> Matrix9 {
    spectral_map(m, |lambda, cutoff| {
        if lambda > cutoff {
            lambda.sqrt()
        } else {
            0.0
        }
    })
}

fn spectral_map(m: &Matrix9, f: impl Fn(f64, f64) -> f64) -> Matrix9 {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let cutoff = PINV_RCOND * eig.eigenvalues.amax();
    let mut out = Matrix9::zeros();
    for k in 0..DIM {
        let w = f(eig.eigenvalues[k], cutoff);
        if w != 0.0 {
            let v = eig.eigenvectors.column(k);
            out += v * v.transpose() * w;
        }
    }
    out
}
