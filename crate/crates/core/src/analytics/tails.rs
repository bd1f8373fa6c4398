//! Upper-tail probabilities of the equilibrium angle laws.

use std::fmt;

use super::densities::{DensityKind, DensityModel, Domain};
use crate::error::{Error, Result};

/// Reference tail values: rolling clusters above the threshold, then sliding.
pub const REFERENCE_ROLL: f64 = 0.48;
pub const REFERENCE_SLIDE: f64 = 0.45;
pub const MATCH_TOLERANCE: f64 = 0.01;

/// Which angle the threshold refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleVariable {
    /// Half internal angle `ω`.
    Omega,
    /// Internal angle `2ω`.
    TwoOmega,
}

impl AngleVariable {
    pub const ALL: [AngleVariable; 2] = [AngleVariable::Omega, AngleVariable::TwoOmega];

    pub fn name(self) -> &'static str {
        match self {
            AngleVariable::Omega => "omega",
            AngleVariable::TwoOmega => "two_omega",
        }
    }
}

impl fmt::Display for AngleVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Probability that the chosen angle exceeds `threshold`.
pub fn tail_probability(
    kind: DensityKind,
    threshold: f64,
    domain: Domain,
    variable: AngleVariable,
) -> Result<f64> {
    let omega = match variable {
        AngleVariable::Omega => threshold,
        AngleVariable::TwoOmega => 0.5 * threshold,
    };
    if !domain.contains(omega) {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} ({variable}) lies outside the domain [{}, {}]",
            domain.lo, domain.hi
        )));
    }
    DensityModel::new(kind, domain)?.tail(omega)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub kind: DensityKind,
    pub domain: Domain,
    pub variable: AngleVariable,
    pub probability: f64,
    /// The reference value for this constraint type.
    pub reference: f64,
    pub matches: bool,
}

/// Every combination of density, domain and angle variable at `threshold`.
pub fn tail_sweep(threshold: f64) -> Result<Vec<TailRow>> {
    let mut rows = Vec::new();
    for domain in [Domain::FULL, Domain::PHYSICAL] {
        for variable in AngleVariable::ALL {
            for kind in DensityKind::ALL {
                let probability = tail_probability(kind, threshold, domain, variable)?;
                let reference = if kind.is_rolling() {
                    REFERENCE_ROLL
                } else {
                    REFERENCE_SLIDE
                };
                rows.push(TailRow {
                    kind,
                    domain,
                    variable,
                    probability,
                    reference,
                    matches: (probability - reference).abs() <= MATCH_TOLERANCE,
                });
            }
        }
    }
    Ok(rows)
}

/// A (domain, variable, hard/vibr) interpretation matches when both of its
/// rolling and sliding values match their reference.
pub fn matching_interpretations(rows: &[TailRow]) -> Vec<String> {
    let mut out = Vec::new();
    for pair in [
        (DensityKind::RollHard, DensityKind::SlideHard),
        (DensityKind::RollVibr, DensityKind::SlideVibr),
    ] {
        for domain in [Domain::FULL, Domain::PHYSICAL] {
            for variable in AngleVariable::ALL {
                let find = |k: DensityKind| {
                    rows.iter()
                        .find(|r| r.kind == k && r.domain == domain && r.variable == variable)
                        .map(|r| r.matches)
                        .unwrap_or(false)
                };
                if find(pair.0) && find(pair.1) {
                    out.push(format!("{}+{}@{}/{}", pair.0, pair.1, domain.name(), variable));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn threshold_outside_domain_rejected() {
        let err = tail_probability(DensityKind::RollHard, 0.2, Domain::PHYSICAL, AngleVariable::Omega);
        assert!(err.is_err());
        let err = tail_probability(DensityKind::RollHard, 7.0, Domain::FULL, AngleVariable::TwoOmega);
        assert!(err.is_err());
    }

    #[test]
    fn two_omega_halves_threshold() {
        let a = tail_probability(DensityKind::SlideVibr, PI, Domain::FULL, AngleVariable::TwoOmega).unwrap();
        assert!((a - 0.5).abs() < 1e-12);
        let b = tail_probability(DensityKind::SlideVibr, FRAC_PI_2, Domain::PHYSICAL, AngleVariable::Omega)
            .unwrap();
        assert!((b - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sweep_covers_all_interpretations() {
        let rows = tail_sweep(2.2).unwrap();
        assert_eq!(rows.len(), 16);
        // Independent values from a separate high-order quadrature.
        let expect = [
            (DensityKind::SlideHard, Domain::FULL, AngleVariable::Omega, 0.303),
            (DensityKind::RollHard, Domain::FULL, AngleVariable::Omega, 0.293),
            (DensityKind::RollVibr, Domain::PHYSICAL, AngleVariable::TwoOmega, 0.740),
        ];
        for (k, d, v, p) in expect {
            let row = rows.iter().find(|r| r.kind == k && r.domain == d && r.variable == v).unwrap();
            assert!((row.probability - p).abs() < 1e-3, "{k} {}", row.probability);
        }
    }
}
