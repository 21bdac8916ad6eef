//! Hot-path benchmarks: state preparation, channel application, the two
//! integrators, and a full detect-and-correct round.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use catsim::adiabatic::{evolve_schedule, RampSchedule};
use catsim::channel::{apply_channel, lindblad_evolve, DampingChannel, DensityMatrix};
use catsim::hilbert::{cat_state, CatParity, FockSpace};
use catsim::qec::{encode, inject_error, monte_carlo_protection, syndrome_and_correct, GateMode, LogicalQubitState};
use catsim::Complex64;

fn alpha() -> Complex64 {
    Complex64::new(2.0, 0.0)
}

fn space() -> FockSpace {
    FockSpace::for_amplitude(alpha())
}

fn bench_preparation(c: &mut Criterion) {
    c.bench_function("cat_state_alpha2", |b| {
        b.iter(|| cat_state(black_box(space()), black_box(alpha()), CatParity::Even).unwrap())
    });
}

fn bench_channel(c: &mut Criterion) {
    let rho = DensityMatrix::from_pure(&cat_state(space(), alpha(), CatParity::Even).unwrap());
    let channel = DampingChannel::from_eta(0.9).unwrap();

    c.bench_function("kraus_apply_dim26", |b| {
        b.iter(|| apply_channel(black_box(&rho), black_box(&channel)).unwrap())
    });

    // ten RK4 steps of the dense master equation
    c.bench_function("lindblad_10_steps_dim26", |b| {
        b.iter(|| lindblad_evolve(black_box(&rho), 1.0, 0.05, 0.005).unwrap())
    });
}

fn bench_ramp(c: &mut Criterion) {
    // one thousand banded RK4 steps, no intermediate sampling
    c.bench_function("ramp_1000_steps_dim26", |b| {
        b.iter(|| {
            evolve_schedule(
                black_box(space()),
                1.0,
                RampSchedule::TanhSq { k0: 4.0, lambda: 0.3 },
                CatParity::Odd,
                1.0,
                1e-3,
                usize::MAX,
            )
            .unwrap()
        })
    });
}

fn bench_qec(c: &mut Criterion) {
    let logical = LogicalQubitState::new(
        Complex64::new(0.6, 0.0),
        Complex64::new(0.8, 0.0),
        2.0,
    )
    .unwrap();
    let mode = GateMode::Exact;
    let encoded = encode(&logical, space(), &mode).unwrap();
    let (damaged, _) = inject_error(&encoded, 0.9, 1).unwrap();

    c.bench_function("syndrome_round_dim26", |b| {
        b.iter(|| {
            let mut rng = ChaCha12Rng::seed_from_u64(11);
            syndrome_and_correct(black_box(&damaged), &logical, 0.9, 1, &mode, &mut rng).unwrap()
        })
    });

    c.bench_function("monte_carlo_10_trials", |b| {
        b.iter(|| {
            monte_carlo_protection(&logical, black_box(space()), 1.0, 0.1, 10, 7, &mode).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_preparation,
    bench_channel,
    bench_ramp,
    bench_qec
);
criterion_main!(benches);
