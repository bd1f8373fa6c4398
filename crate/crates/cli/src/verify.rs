//! Deterministic self-checks of the analytic and linear-algebra layers.

use std::f64::consts::PI;
use std::str::FromStr;

use serde_json::{json, Value};

use rolldisc_core::analytics::densities::{density, DensityKind, DensityModel, Domain};
use rolldisc_core::analytics::fokker_planck::{fp_flux, fp_residual};
use rolldisc_core::analytics::geometry::{
    fixman_closed_form, fixman_factor, normals_orthogonal, overlap_closed_form,
    principal_overlap, subspace_overlap_mode, tangent_map_check,
};
use rolldisc_core::analytics::jet::Jet;
use rolldisc_core::analytics::quadrature::integrate;
use rolldisc_core::rng::stream;
use rolldisc_core::stats::velocity_covariance_oracle;
use rolldisc_core::trimer::{alpha1, alpha2, parameterize};
use rolldisc_core::{assemble, ConstraintMode, ConstraintSet, Error, Matrix9, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Projections,
    FokkerPlanck,
    Geometry,
    Covariance,
    Densities,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Projections,
        Suite::FokkerPlanck,
        Suite::Geometry,
        Suite::Covariance,
        Suite::Densities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Projections => "projections",
            Suite::FokkerPlanck => "fokker_planck",
            Suite::Geometry => "geometry",
            Suite::Covariance => "covariance",
            Suite::Densities => "densities",
        }
    }
}

/// Parses a suite name; `all` expands to every suite.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    s.split(',').map(|p| Suite::from_str(p.trim())).collect()
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('-', "_");
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown verify suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `value < tolerance` unless `above` is set.
    pub above: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, above: false }
    }

    fn above(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, above: true }
    }

    pub fn pass(&self) -> bool {
        self.value.is_finite()
            && if self.above {
                self.value > self.tolerance
            } else {
                self.value < self.tolerance
            }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "comparison": if self.above { ">" } else { "<" },
            "pass": self.pass(),
        })
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
}

fn projections() -> Result<Vec<Check>> {
    let mut idem = 0.0f64;
    let mut sym = 0.0f64;
    let mut trace: [f64; 2] = [0.0; 2];
    let mut mp = 0.0f64;
    let mut annihilate = 0.0f64;
    let gamma = Matrix9::identity() * 2.5;
    for (k, mode) in [ConstraintMode::Slide, ConstraintMode::Roll].into_iter().enumerate() {
        let cs = ConstraintSet::trimer(mode);
        let expected = if mode == ConstraintMode::Roll { 3.0 } else { 5.0 };
        for w in grid(0.05, PI - 0.05, 50) {
            let b = assemble(&parameterize(w, 0.3 * w), &cs)?;
            let p = b.p();
            annihilate = annihilate.max((b.c() * p.clone_owned()).amax());
            idem = idem.max((p * p - p).amax());
            sym = sym.max((p - p.transpose()).amax());
            trace[k] = trace[k].max((p.trace() - expected).abs());
            let g = b.gamma_p(&gamma);
            let gd = b.gamma_p_dagger(&gamma)?;
            mp = mp.max((g * gd * g - g).amax()).max((gd * g * gd - gd).amax());
        }
    }
    Ok(vec![
        Check::below("max_abs_P2_minus_P", idem, 1e-12),
        Check::below("max_abs_P_minus_PT", sym, 1e-12),
        Check::below("max_abs_CP", annihilate, 1e-12),
        Check::below("slide_trace_error", trace[0], 1e-12),
        Check::below("roll_trace_error", trace[1], 1e-12),
        Check::below("moore_penrose_residual", mp, 1e-10),
    ])
}

fn fokker_planck() -> Result<Vec<Check>> {
    let roll = |w: Jet| DensityKind::RollHard.jet(w);
    let constant = |_: Jet| Jet::constant(1.0);
    let mut roll_residual = 0.0f64;
    let mut const_residual = 0.0f64;
    for w in grid(0.05, PI - 0.05, 60) {
        roll_residual = roll_residual.max(fp_residual(roll, w).abs());
        const_residual = const_residual.max(fp_residual(constant, w).abs());
    }
    let boundary = fp_flux(roll, 1e-9).abs().max(fp_flux(roll, PI - 1e-9).abs());
    Ok(vec![
        Check::below("roll_density_max_residual", roll_residual, 1e-10),
        Check::below("roll_density_boundary_flux", boundary, 1e-8),
        Check::above("constant_density_max_residual", const_residual, 1e-3),
    ])
}

fn geometry() -> Result<Vec<Check>> {
    let mut angle = 0.0f64;
    let mut bracket = 0.0f64;
    for w in grid(0.1, PI - 0.1, 20) {
        for phi in grid(0.0, 2.0 * PI, 8) {
            let r = tangent_map_check(w, phi);
            angle = angle.max(r.max_angle());
            bracket = bracket.max(r.lie_bracket_max);
        }
    }
    let mut fixman = 0.0f64;
    let mut overlap = 0.0f64;
    let mut slide = 0.0f64;
    for w in grid(0.05, PI - 0.05, 40) {
        fixman = fixman.max((fixman_factor(w) - fixman_closed_form(w)).abs());
        overlap = overlap.max((principal_overlap(w) - overlap_closed_form(w)).abs());
        slide = slide.max((subspace_overlap_mode(w, ConstraintMode::Slide) - 1.0).abs());
    }
    let normals = if normals_orthogonal() { 0.0 } else { 1.0 };
    Ok(vec![
        Check::below("normals_not_orthogonal", normals, 0.5),
        Check::below("tangent_map_max_angle", angle, 1e-8),
        Check::below("lie_bracket_max", bracket, 1e-12),
        Check::below("fixman_closed_form_error", fixman, 1e-12),
        Check::below("roll_overlap_closed_form_error", overlap, 1e-10),
        Check::below("slide_overlap_error", slide, 1e-10),
    ])
}

fn covariance() -> Result<Vec<Check>> {
    let beta = 1.0;
    let n = 400_000;
    let mut worst = 0.0f64;
    for (k, mode) in [ConstraintMode::Slide, ConstraintMode::Roll].into_iter().enumerate() {
        let b = assemble(&parameterize(PI / 2.0, 0.0), &ConstraintSet::trimer(mode))?;
        let mut rng = stream(20, k as u64);
        let cov = velocity_covariance_oracle(&b, beta, n, &mut rng)?;
        worst = worst.max((cov - b.p() / beta).amax());
    }
    // Entry-wise standard error is at most sqrt(2/n).
    Ok(vec![Check::below(
        "max_abs_cov_minus_P_over_beta",
        worst,
        5.0 * (2.0 / n as f64).sqrt(),
    )])
}

fn densities() -> Result<Vec<Check>> {
    let mut norm = 0.0f64;
    let mut symmetry = 0.0f64;
    for kind in DensityKind::ALL {
        for domain in [Domain::FULL, Domain::PHYSICAL] {
            let model = DensityModel::new(kind, domain)?;
            let total = integrate(|w| model.pdf(w), domain.lo, domain.hi, 1e-12)?;
            norm = norm.max((total - 1.0).abs());
        }
        for w in grid(0.05, PI / 2.0, 20) {
            symmetry = symmetry.max((density(kind, w)? - density(kind, PI - w)?).abs());
        }
    }
    let mut roll_shape = 0.0f64;
    let mut vibr = 0.0f64;
    let w0 = PI / 2.0;
    let ref_roll = density(DensityKind::RollHard, w0)? * alpha1(w0) * alpha2(w0);
    for w in grid(0.05, PI - 0.05, 40) {
        let r = density(DensityKind::RollHard, w)? * alpha1(w) * alpha2(w) / ref_roll;
        roll_shape = roll_shape.max((r - 1.0).abs());
        for (hard, soft) in [
            (DensityKind::SlideHard, DensityKind::SlideVibr),
            (DensityKind::RollHard, DensityKind::RollVibr),
        ] {
            let ratio = density(soft, w)? / (density(hard, w)? * fixman_factor(w));
            let ratio0 = density(soft, w0)? / (density(hard, w0)? * fixman_factor(w0));
            vibr = vibr.max((ratio / ratio0 - 1.0).abs());
        }
    }
    Ok(vec![
        Check::below("normalisation_error", norm, 1e-9),
        Check::below("reflection_symmetry_error", symmetry, 1e-12),
        Check::below("roll_density_times_alpha1_alpha2_variation", roll_shape, 1e-10),
        Check::below("vibrating_over_hard_fixman_variation", vibr, 1e-10),
    ])
}

pub fn run_suite(suite: Suite) -> Result<Vec<Check>> {
    match suite {
        Suite::Projections => projections(),
        Suite::FokkerPlanck => fokker_planck(),
        Suite::Geometry => geometry(),
        Suite::Covariance => covariance(),
        Suite::Densities => densities(),
    }
}

/// Runs the suites and returns the JSON report and the overall verdict.
pub fn run(suites: &[Suite]) -> Result<(Value, bool)> {
    let mut all_pass = true;
    let mut out = Vec::new();
    for &suite in suites {
        let checks = run_suite(suite)?;
        let pass = checks.iter().all(Check::pass);
        all_pass &= pass;
        out.push(json!({
            "suite": suite.name(),
            "pass": pass,
            "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        }));
    }
    Ok((json!({ "pass": all_pass, "suites": out }), all_pass))
}
