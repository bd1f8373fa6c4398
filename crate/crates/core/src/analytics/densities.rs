//! Equilibrium densities of the half internal angle `ω`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use super::jet::Jet;
use super::quadrature::integrate;
use crate::error::{Error, Result};

/// Relative tolerance for every normalisation and CDF integral.
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityKind {
    SlideHard,
    RollHard,
    SlideVibr,
    RollVibr,
}

impl DensityKind {
    pub const ALL: [DensityKind; 4] = [
        DensityKind::SlideHard,
        DensityKind::RollHard,
        DensityKind::SlideVibr,
        DensityKind::RollVibr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DensityKind::SlideHard => "slide_hard",
            DensityKind::RollHard => "roll_hard",
            DensityKind::SlideVibr => "slide_vibr",
            DensityKind::RollVibr => "roll_vibr",
        }
    }

    pub fn is_rolling(self) -> bool {
        matches!(self, DensityKind::RollHard | DensityKind::RollVibr)
    }

    /// Unnormalised density as a jet in `ω`.
    pub fn jet(self, omega: Jet) -> Jet {
        let s2 = omega.sin().powi(2) * 2.0;
        let c2 = omega.cos().powi(2) * 2.0;
        match self {
            DensityKind::SlideHard => ((s2 + 1.0) * (c2 + 1.0)).sqrt(),
            DensityKind::RollHard => ((s2 + 5.0) * (c2 + 13.0)).sqrt(),
            DensityKind::SlideVibr => Jet::constant(1.0),
            DensityKind::RollVibr => ((s2 + 5.0) / (s2 + 1.0) * ((c2 + 13.0) / (c2 + 1.0))).sqrt(),
        }
    }
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DensityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DensityKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown density kind '{s}'")))
    }
}

/// Closed interval of `ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    /// Outer discs may overlap.
    pub const FULL: Domain = Domain { lo: 0.0, hi: PI };
    /// Discs may not interpenetrate.
    pub const PHYSICAL: Domain = Domain {
        lo: PI / 6.0,
        hi: 5.0 * PI / 6.0,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= PI) {
            return Err(Error::InvalidArgument(format!(
                "domain [{lo}, {hi}] must satisfy 0 <= lo < hi <= pi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, omega: f64) -> bool {
        self.lo <= omega && omega <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn name(&self) -> String {
        if *self == Domain::FULL {
            "full".into()
        } else if *self == Domain::PHYSICAL {
            "physical".into()
        } else {
            format!("[{},{}]", self.lo, self.hi)
        }
    }
}

/// Unnormalised density at `ω ∈ [0, π]`.
pub fn density(kind: DensityKind, omega: f64) -> Result<f64> {
    if !Domain::FULL.contains(omega) {
        return Err(Error::InvalidArgument(format!(
            "omega = {omega} lies outside [0, pi]"
        )));
    }
    Ok(unchecked(kind, omega))
}

fn unchecked(kind: DensityKind, omega: f64) -> f64 {
    let s2 = 2.0 * omega.sin().powi(2);
    let c2 = 2.0 * omega.cos().powi(2);
    match kind {
        DensityKind::SlideHard => ((1.0 + s2) * (1.0 + c2)).sqrt(),
        DensityKind::RollHard => ((5.0 + s2) * (13.0 + c2)).sqrt(),
        DensityKind::SlideVibr => 1.0,
        DensityKind::RollVibr => ((5.0 + s2) / (1.0 + s2) * ((13.0 + c2) / (1.0 + c2))).sqrt(),
    }
}

type CacheKey = (DensityKind, u64, u64);

fn normalisation_cache() -> &'static Mutex<HashMap<CacheKey, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// A density restricted to a domain, with its normalising integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityModel {
    pub kind: DensityKind,
    pub domain: Domain,
    mass: f64,
}

impl DensityModel {
    pub fn new(kind: DensityKind, domain: Domain) -> Result<Self> {
        Domain::new(domain.lo, domain.hi)?;
        let key = (kind, domain.lo.to_bits(), domain.hi.to_bits());
        let cached = normalisation_cache()
            .lock()
            .map(|c| c.get(&key).copied())
            .unwrap_or(None);
        let mass = match cached {
            Some(m) => m,
            None => {
                let m = integrate(|w| unchecked(kind, w), domain.lo, domain.hi, QUAD_TOL)?;
                if let Ok(mut c) = normalisation_cache().lock() {
                    c.insert(key, m);
                }
                m
            }
        };
        Ok(Self { kind, domain, mass })
    }

    /// `kind@domain`, used to label reports.
    pub fn id(&self) -> String {
        format!("{}@{}", self.kind.name(), self.domain.name())
    }

    pub fn normalisation(&self) -> f64 {
        self.mass
    }

    pub fn pdf(&self, omega: f64) -> f64 {
        if self.domain.contains(omega) {
            unchecked(self.kind, omega) / self.mass
        } else {
            0.0
        }
    }

    /// Probability mass in `[lo, b]`, with `b` clamped to the domain.
    pub fn cdf(&self, omega: f64) -> Result<f64> {
        self.mass_between(self.domain.lo, omega)
    }

    fn mass_between(&self, a: f64, b: f64) -> Result<f64> {
        let a = a.clamp(self.domain.lo, self.domain.hi);
        let b = b.clamp(self.domain.lo, self.domain.hi);
        if b <= a {
            return Ok(0.0);
        }
        // Absolute tolerance relative to the total mass keeps short intervals
        // cheap without losing accuracy in the CDF.
        let part = integrate(|w| unchecked(self.kind, w), a, b, QUAD_TOL)?;
        Ok(part / self.mass)
    }

    /// CDF at each point of an ascending slice, integrating piecewise.
    pub fn cdf_sorted(&self, sorted: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(sorted.len());
        let mut prev = self.domain.lo;
        let mut acc = 0.0;
        for &x in sorted {
            if x < prev && prev > self.domain.lo {
                return Err(Error::InvalidArgument("samples are not sorted".into()));
            }
            let x = x.clamp(self.domain.lo, self.domain.hi);
            acc += self.mass_between(prev, x)?;
            prev = prev.max(x);
            out.push(acc.min(1.0));
        }
        Ok(out)
    }

    /// `P(ω > threshold)`.
    pub fn tail(&self, threshold: f64) -> Result<f64> {
        if !self.domain.contains(threshold) {
            return Err(Error::InvalidArgument(format!(
                "threshold {threshold} lies outside [{}, {}]",
                self.domain.lo, self.domain.hi
            )));
        }
        self.mass_between(threshold, self.domain.hi)
    }
}

/// Draws from a [`DensityModel`] by inverting a tabulated CDF.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    pub fn new(model: &DensityModel, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidArgument("need at least two table points".into()));
        }
        let d = model.domain;
        let grid: Vec<f64> = (0..points)
            .map(|i| d.lo + d.width() * i as f64 / (points - 1) as f64)
            .collect();
        let mut cdf = model.cdf_sorted(&grid)?;
        let last = *cdf.last().unwrap_or(&1.0);
        for c in &mut cdf {
            *c /= last;
        }
        Ok(Self { grid, cdf })
    }

    /// Maps a uniform variate in `[0, 1]` to `ω`.
    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.grid[k - 1] + t.clamp(0.0, 1.0) * (self.grid[k] - self.grid[k - 1])
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trimer::{alpha1, alpha2};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn plug_in_values() {
        assert!((density(DensityKind::RollHard, 0.0).unwrap() - 75f64.sqrt()).abs() < 1e-12);
        assert!((density(DensityKind::RollHard, FRAC_PI_2).unwrap() - 91f64.sqrt()).abs() < 1e-12);
        for i in 0..=10 {
            assert_eq!(density(DensityKind::SlideVibr, i as f64 * 0.3).unwrap(), 1.0);
        }
    }

    #[test]
    fn out_of_domain_rejected() {
        assert!(density(DensityKind::SlideHard, -0.1).is_err());
        assert!(density(DensityKind::SlideHard, 3.2).is_err());
        let m = DensityModel::new(DensityKind::SlideHard, Domain::PHYSICAL).unwrap();
        assert!(m.tail(0.1).is_err());
    }

    #[test]
    fn rolling_density_is_inverse_noise_product() {
        let ratio0 = density(DensityKind::RollHard, 0.0).unwrap() * alpha1(0.0) * alpha2(0.0);
        for i in 0..=100 {
            let w = PI * i as f64 / 100.0;
            let r = density(DensityKind::RollHard, w).unwrap() * alpha1(w) * alpha2(w);
            assert!((r - ratio0).abs() < 1e-12 * ratio0);
        }
    }

    #[test]
    fn symmetric_about_right_angle() {
        for kind in DensityKind::ALL {
            for i in 0..50 {
                let w = 0.03 * i as f64;
                let a = density(kind, FRAC_PI_2 - w).unwrap();
                let b = density(kind, FRAC_PI_2 + w).unwrap();
                assert!((a - b).abs() < 1e-13 * a);
            }
        }
    }

    #[test]
    fn normalised_mass_is_one() {
        for kind in DensityKind::ALL {
            for domain in [Domain::FULL, Domain::PHYSICAL] {
                let m = DensityModel::new(kind, domain).unwrap();
                let total = integrate(|w| m.pdf(w), domain.lo, domain.hi, 1e-12).unwrap();
                assert!((total - 1.0).abs() < 1e-10);
                assert!((m.cdf(domain.hi).unwrap() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn uniform_tail_at_midpoint() {
        let m = DensityModel::new(DensityKind::SlideVibr, Domain::PHYSICAL).unwrap();
        assert!((m.tail(FRAC_PI_2).unwrap() - 0.5).abs() < 1e-12);
        let r = DensityModel::new(DensityKind::RollHard, Domain::FULL).unwrap();
        assert!((r.tail(0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sorted_cdf_matches_direct() {
        let m = DensityModel::new(DensityKind::RollVibr, Domain::FULL).unwrap();
        let pts = [0.0, 0.2, 0.2, 1.0, 2.5, PI];
        let fast = m.cdf_sorted(&pts).unwrap();
        for (x, c) in pts.iter().zip(fast) {
            assert!((m.cdf(*x).unwrap() - c).abs() < 1e-12);
        }
    }

    #[test]
    fn jet_agrees_with_plain_evaluation() {
        for kind in DensityKind::ALL {
            let j = kind.jet(Jet::variable(0.77));
            assert!((j.v - density(kind, 0.77).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let m = DensityModel::new(DensityKind::SlideHard, Domain::FULL).unwrap();
        let inv = InverseCdf::new(&m, 4097).unwrap();
        for &u in &[0.01, 0.3, 0.5, 0.77, 0.99] {
            let w = inv.quantile(u);
            assert!((m.cdf(w).unwrap() - u).abs() < 1e-6);
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in DensityKind::ALL {
            assert_eq!(k.name().parse::<DensityKind>().unwrap(), k);
        }
        assert!("roll".parse::<DensityKind>().is_err());
    }
}
