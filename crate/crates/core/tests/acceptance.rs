//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Set `ROLLDISC_ACCEPTANCE=1,3,7` to run a subset.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use rolldisc_core::analytics::densities::{DensityKind, DensityModel, Domain};
use rolldisc_core::analytics::fokker_planck::{fp_flux, fp_residual};
use rolldisc_core::analytics::geometry::{
    normals_orthogonal, overlap_closed_form, principal_overlap, tangent_map_check,
};
use rolldisc_core::analytics::jet::Jet;
use rolldisc_core::analytics::tails::{matching_interpretations, tail_sweep};
use rolldisc_core::langevin::{simulate_with, BondMode, PhaseState, SimParams, DEFAULT_STIFFNESS};
use rolldisc_core::model::{assemble, ConstraintMode, ConstraintSet};
use rolldisc_core::overdamped::{
    step_cartesian_general, step_cartesian_strat, step_reduced, Boundary, GeneralParams,
    NoPotential, ReducedState,
};
use rolldisc_core::rng::{seeded, stream};
use rolldisc_core::stats::{
    ks_critical_1pct, ks_distance, ks_two_sample, ks_two_sample_pvalue, lag1_autocorrelation,
    velocity_covariance_oracle,
};
use rolldisc_core::trajectory::{conserved_drift, omega_samples, Frame};
use rolldisc_core::trimer::{extract_omega, fold_omega, parameterize};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

const WARMUP: f64 = 0.01;

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| PI * (i as f64 + 0.5) / n as f64)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = [0.0f64; 3];
    let mut traces_ok = true;
    for mode in [ConstraintMode::Roll, ConstraintMode::Slide] {
        let cs = ConstraintSet::trimer(mode);
        for (i, w) in grid(50).enumerate() {
            let x = parameterize(w, 0.13 * i as f64);
            let b = assemble(&x, &cs).expect("assemble");
            let p = b.p();
            worst[0] = worst[0].max((p * p - p).amax());
            worst[1] = worst[1].max((p - p.transpose()).amax());
            let c = b.c();
            let pd = nalgebra::DMatrix::from_column_slice(9, 9, p.as_slice());
            worst[2] = worst[2].max((c * pd).amax());
            let expected = if mode == ConstraintMode::Roll { 3.0 } else { 5.0 };
            traces_ok &= (p.trace() - expected).abs() < 1e-12;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst.iter().all(|&v| v < 1e-12) && traces_ok && secs < 1.0;
    outcome(
        pass,
        format!(
            "max|P^2-P|={:.2e} max|P-P^T|={:.2e} max|CP|={:.2e} traces_ok={traces_ok} ({secs:.3}s)",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let roll = |w: Jet| DensityKind::RollHard.jet(w);
    let flat = |w: Jet| DensityKind::SlideVibr.jet(w);
    let mut worst_roll = 0.0f64;
    let mut worst_flat = 0.0f64;
    for i in 0..1000 {
        let w = PI * i as f64 / 999.0;
        let scale = roll(Jet::constant(w)).v;
        worst_roll = worst_roll.max(fp_residual(roll, w).abs() / scale);
        worst_flat = worst_flat.max(fp_residual(flat, w).abs());
    }
    let boundary = [0.0, PI, PI / 6.0, 5.0 * PI / 6.0]
        .iter()
        .map(|&w| fp_flux(roll, w).abs() / roll(Jet::constant(w)).v)
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_roll < 1e-10 && worst_flat > 1e-3 && boundary < 1e-10 && secs < 1.0;
    outcome(
        pass,
        format!(
            "max rel residual(roll)={worst_roll:.2e} max residual(constant)={worst_flat:.4e} boundary flux={boundary:.2e} ({secs:.3}s)"
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let orth = normals_orthogonal();
    let mut worst_angle = 0.0f64;
    for i in 0..20 {
        let w = PI * (i as f64 + 0.5) / 20.0;
        for j in 0..8 {
            let phi = 2.0 * PI * j as f64 / 8.0;
            worst_angle = worst_angle.max(tangent_map_check(w, phi).max_angle());
        }
    }
    let worst_overlap = grid(20)
        .map(|w| (principal_overlap(w) - overlap_closed_form(w)).abs())
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let pass = orth && worst_angle < 1e-10 && worst_overlap < 1e-10 && secs < 1.0;
    outcome(
        pass,
        format!(
            "N.T integer-orthogonal={orth} max angle={worst_angle:.2e} rad overlap err={worst_overlap:.2e} ({secs:.3}s)"
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let beta = 1.0;
    let mut worst = 0.0f64;
    let cs = ConstraintSet::trimer(ConstraintMode::Roll);
    for (k, w) in [0.6, FRAC_PI_2, 2.3].into_iter().enumerate() {
        let b = assemble(&parameterize(w, 0.0), &cs).expect("assemble");
        let cov = velocity_covariance_oracle(&b, beta, 1_000_000, &mut stream(4, k as u64))
            .expect("oracle");
        worst = worst.max((cov - b.p() / beta).amax());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 5e-3 && secs < 10.0,
        format!("max|cov - P/beta|={worst:.2e} at omega in {{0.6, pi/2, 2.3}} ({secs:.2}s)"),
    )
}

/// Folded `ω` of a Langevin run sampled every `stride` steps, after warm-up.
fn langevin_samples(params: &SimParams) -> (Vec<f64>, f64) {
    let mut frames: Vec<Frame> = Vec::new();
    simulate_with(params, PhaseState::reference(), &mut seeded(params.seed), |f| {
        frames.push(*f)
    })
    .expect("langevin run");
    let xs = omega_samples(&frames, WARMUP);
    let rho = lag1_autocorrelation(&xs);
    (xs, rho)
}

fn ks_against(xs: &[f64], kind: DensityKind) -> f64 {
    let model = DensityModel::new(kind, Domain::FULL).expect("model");
    ks_distance(xs, &model).expect("ks")
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut params = SimParams::reference(ConstraintMode::Slide).with_duration(2e4);
    params.record_stride = 20;
    params.seed = 5;
    let (xs, rho) = langevin_samples(&params);
    let ks = ks_against(&xs, DensityKind::SlideHard);
    outcome(
        ks < 0.03,
        format!(
            "Langevin slide T=2e4 dt=5e-3: KS={ks:.4} vs slide_hard (n={}, lag-1 autocorr {rho:.3}, {:.0}s)",
            xs.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    // Reduced engine.
    let mut rng = seeded(6);
    let mut s = ReducedState::new(FRAC_PI_2, 0.0, [0.0; 3]);
    let steps: u64 = 20_000_000;
    let stride = 100;
    let mut xs = Vec::with_capacity((steps / stride) as usize);
    for n in 1..=steps {
        s = step_reduced(&s, ConstraintMode::Roll, Boundary::FULL, 1e-4, &mut rng);
        if n % stride == 0 {
            xs.push(s.omega);
        }
    }
    let skip = (xs.len() as f64 * WARMUP).ceil() as usize;
    let ks_reduced = ks_against(&xs[skip..], DensityKind::RollHard);
    let t_reduced = start.elapsed().as_secs_f64();

    // Langevin engine at a tenth of the long rolling run.
    let mut params = SimParams::reference(ConstraintMode::Roll).with_duration(1.8e4);
    params.record_stride = 100;
    params.seed = 6;
    let (ys, rho) = langevin_samples(&params);
    let ks_langevin = ks_against(&ys, DensityKind::RollHard);
    outcome(
        ks_reduced < 0.02 && ks_langevin < 0.05,
        format!(
            "reduced dt=1e-4 2e7 steps: KS={ks_reduced:.4} (<0.02, {t_reduced:.0}s); Langevin roll T=1.8e4: KS={ks_langevin:.4} (<0.05, lag-1 autocorr {rho:.3}, {:.0}s)",
            start.elapsed().as_secs_f64() - t_reduced
        ),
    )
}

fn conserved_drift_reduced(dt: f64, steps: u64) -> (f64, f64) {
    let mut rng = seeded(7);
    let mut s = ReducedState::new(FRAC_PI_2, 0.0, [0.0; 3]);
    let mut frames = vec![Frame::new(0.0, s.omega, s.phi, s.theta)];
    for n in 1..=steps {
        s = step_reduced(&s, ConstraintMode::Roll, Boundary::Periodic, dt, &mut rng);
        if n % 1000 == 0 {
            frames.push(Frame::new(n as f64 * dt, s.omega, s.phi, s.theta));
        }
    }
    conserved_drift(&frames)
}

fn criterion_7() -> Outcome {
    let steps = 1_000_000;
    let (a1, a2) = conserved_drift_reduced(1e-4, steps);
    let (b1, b2) = conserved_drift_reduced(5e-5, steps);
    let r1 = a1 / b1;
    let r2 = a2 / b2;
    outcome(
        r1 >= 1.8 && r2 >= 1.8,
        format!(
            "max|dQ1| {a1:.2e} -> {b1:.2e} (ratio {r1:.2}), max|dQ2| {a2:.2e} -> {b2:.2e} (ratio {r2:.2}) over 1e6 steps, dt 1e-4 -> 5e-5"
        ),
    )
}

const ENSEMBLE: usize = 100_000;

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let dt = 1e-3;
    let steps = 250;
    let mut cart = Vec::with_capacity(ENSEMBLE);
    let mut reduced = Vec::with_capacity(ENSEMBLE);
    for k in 0..ENSEMBLE as u64 {
        let mut rng = stream(8, 2 * k);
        let mut x = parameterize(FRAC_PI_2, 0.0);
        for _ in 0..steps {
            x = step_cartesian_strat(&x, ConstraintMode::Roll, dt, &mut rng).expect("step");
        }
        cart.push(extract_omega(&x).expect("omega"));
        let mut rng = stream(8, 2 * k + 1);
        let mut s = ReducedState::new(FRAC_PI_2, 0.0, [0.0; 3]);
        for _ in 0..steps {
            s = step_reduced(&s, ConstraintMode::Roll, Boundary::Periodic, dt, &mut rng);
        }
        reduced.push(fold_omega(s.omega));
    }
    let d = ks_two_sample(&cart, &reduced).expect("ks");
    let p = ks_two_sample_pvalue(d, ENSEMBLE, ENSEMBLE);
    outcome(
        p > 0.01,
        format!(
            "{ENSEMBLE} independent paths each, T=0.25 dt=1e-3: D={d:.4} (1% critical {:.4}) p={p:.3} ({:.0}s)",
            ks_critical_1pct(ENSEMBLE, ENSEMBLE),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let beta = 1.0;
    let t_strat = 0.25;
    let strat_steps = 250;
    let t_ito = t_strat / (2.0 * beta);
    let ito_steps = 25;
    let params = GeneralParams::identity_friction(ConstraintMode::Roll, beta, t_ito / ito_steps as f64);
    let mut ito = Vec::with_capacity(ENSEMBLE);
    let mut strat = Vec::with_capacity(ENSEMBLE);
    for k in 0..ENSEMBLE as u64 {
        let mut rng = stream(9, 2 * k);
        let mut x = parameterize(FRAC_PI_2, 0.0);
        for _ in 0..ito_steps {
            x = step_cartesian_general(&x, &params, &NoPotential, &mut rng).expect("step");
        }
        ito.push(extract_omega(&x).expect("omega"));
        let mut rng = stream(9, 2 * k + 1);
        let mut x = parameterize(FRAC_PI_2, 0.0);
        for _ in 0..strat_steps {
            x = step_cartesian_strat(&x, ConstraintMode::Roll, t_strat / strat_steps as f64, &mut rng)
                .expect("step");
        }
        strat.push(extract_omega(&x).expect("omega"));
    }
    let d = ks_two_sample(&ito, &strat).expect("ks");
    let p = ks_two_sample_pvalue(d, ENSEMBLE, ENSEMBLE);
    outcome(
        p > 0.01,
        format!(
            "Ito beta=1 T={t_ito} ({ito_steps} steps) vs Stratonovich T={t_strat} ({strat_steps} steps): D={d:.4} (1% critical {:.4}) p={p:.3} ({:.0}s)",
            ks_critical_1pct(ENSEMBLE, ENSEMBLE),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn soft_params(mode: ConstraintMode, t_max: f64, seed: u64) -> SimParams {
    let mut p = SimParams::reference(mode);
    p.dt = SOFT_DT;
    p.bond_mode = BondMode::Soft {
        stiffness: DEFAULT_STIFFNESS,
    };
    p.record_stride = 1000;
    p.seed = seed;
    p.with_duration(t_max)
}

const SOFT_DT: f64 = 1e-4;

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let (xs, _) = langevin_samples(&soft_params(ConstraintMode::Slide, 2e4, 10));
    let ks_slide = ks_against(&xs, DensityKind::SlideVibr);
    let t_slide = start.elapsed().as_secs_f64();
    let (ys, _) = langevin_samples(&soft_params(ConstraintMode::Roll, 1.8e4, 11));
    let ks_roll = ks_against(&ys, DensityKind::RollVibr);
    outcome(
        ks_slide < 0.03 && ks_roll < 0.05,
        format!(
            "k=1e4 dt={SOFT_DT}: slide T=2e4 KS={ks_slide:.4} vs slide_vibr (<0.03, {t_slide:.0}s); roll T=1.8e4 KS={ks_roll:.4} vs roll_vibr (<0.05, {:.0}s)",
            start.elapsed().as_secs_f64() - t_slide
        ),
    )
}

fn criterion_11() -> Outcome {
    let rows = tail_sweep(2.2).expect("sweep");
    for r in &rows {
        println!(
            "    tail {:<10} {:<8} {:<9} P={:.4} ref={:.2} match={}",
            r.kind.name(),
            r.domain.name(),
            r.variable.name(),
            r.probability,
            r.reference,
            r.matches
        );
    }
    let found = matching_interpretations(&rows);
    let summary = if found.is_empty() {
        "no interpretation matches 0.48/0.45 within 0.01".to_string()
    } else {
        format!("matching: {}", found.join(", "))
    };
    outcome(rows.len() == 16, format!("16-row sweep emitted; {summary}"))
}

fn main() {
    let selected: Option<Vec<u32>> = std::env::var("ROLLDISC_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "projection identities", criterion_1),
        (2, "Fokker-Planck residual", criterion_2),
        (3, "geometry", criterion_3),
        (4, "velocity covariance", criterion_4),
        (5, "sliding equilibrium (Langevin)", criterion_5),
        (6, "rolling equilibrium (reduced, Langevin)", criterion_6),
        (7, "conserved quantities under refinement", criterion_7),
        (8, "Cartesian vs reduced rolling", criterion_8),
        (9, "Ito vs Stratonovich", criterion_9),
        (10, "soft bonds", criterion_10),
        (11, "tail-probability table", criterion_11),
    ];
    let mut failures = 0;
    for (id, name, run) in criteria {
        if let Some(sel) = &selected {
            if !sel.contains(&id) {
                continue;
            }
        }
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id}] {name}: {}", o.detail);
        if !o.pass {
            failures += 1;
        }
    }
    // A criterion that panics aborts the run. Failed criteria are reported
    // above and turn into a nonzero exit only in strict mode.
    println!("{failures} criterion/criteria failed");
    let strict = std::env::var("ROLLDISC_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failures > 0 {
        std::process::exit(1);
    }
}
