use std::f64::consts::FRAC_PI_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use rolldisc_core::langevin::{self, BondMode, DEFAULT_STIFFNESS};
use rolldisc_core::model::{pinv_symmetric, sqrt_psd};
use rolldisc_core::overdamped::{self, GeneralParams, NoPotential};
use rolldisc_core::rng::stream;
use rolldisc_core::{
    assemble, parameterize, Boundary, ConstraintMode, ConstraintSet, Matrix9, PhaseState,
    ReducedState, SimParams,
};

fn langevin_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("langevin_step");
    for (name, mode, bonds) in [
        ("slide_hard", ConstraintMode::Slide, BondMode::Hard),
        ("roll_hard", ConstraintMode::Roll, BondMode::Hard),
        ("roll_soft", ConstraintMode::Roll, BondMode::Soft { stiffness: DEFAULT_STIFFNESS }),
    ] {
        let mut params = SimParams::reference(mode);
        params.bond_mode = bonds;
        let mut rng = stream(1, 0);
        let mut state = PhaseState::reference();
        group.bench_function(name, |b| {
            b.iter(|| {
                state = langevin::step(black_box(&state), &params, &mut rng).unwrap();
            })
        });
    }
    group.finish();
}

fn overdamped_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("overdamped_step");
    let mut rng = stream(2, 0);
    let mut s = ReducedState::new(FRAC_PI_2, 0.0, [0.0; 3]);
    group.bench_function("reduced_roll", |b| {
        b.iter(|| {
            s = overdamped::step_reduced(black_box(&s), ConstraintMode::Roll, Boundary::FULL, 1e-3, &mut rng);
        })
    });
    let mut x = parameterize(FRAC_PI_2, 0.0);
    group.bench_function("cartesian_stratonovich_roll", |b| {
        b.iter(|| {
            x = overdamped::step_cartesian_strat(black_box(&x), ConstraintMode::Roll, 1e-4, &mut rng).unwrap();
        })
    });
    let params = GeneralParams::identity_friction(ConstraintMode::Roll, 1.0, 1e-4);
    let mut y = parameterize(FRAC_PI_2, 0.0);
    group.bench_function("cartesian_ito_roll", |b| {
        b.iter(|| {
            y = overdamped::step_cartesian_general(black_box(&y), &params, &NoPotential, &mut rng).unwrap();
        })
    });
    group.finish();
}

fn linear_algebra(c: &mut Criterion) {
    let cfg = parameterize(1.1, 0.4);
    let cs = ConstraintSet::trimer(ConstraintMode::Roll);
    c.bench_function("assemble_roll", |b| b.iter(|| assemble(black_box(&cfg), &cs).unwrap()));
    let p = *assemble(&cfg, &cs).unwrap().p();
    let g = p * Matrix9::identity() * 1.5 * p;
    c.bench_function("pinv_symmetric", |b| b.iter(|| pinv_symmetric(black_box(&g))));
    c.bench_function("sqrt_psd", |b| b.iter(|| sqrt_psd(black_box(&g))));
}

criterion_group!(benches, langevin_steps, overdamped_steps, linear_algebra);
criterion_main!(benches);
