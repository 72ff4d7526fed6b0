use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qmkit_core::angular::add_angular_momentum;
use qmkit_core::dynamics::{decay_spectrum, lz_numeric, DecayModel, LZSweep, LzReadout};
use qmkit_core::fock::bose_hubbard_dimer;
use qmkit_core::numeric::{hermitian_eig, ComplexMatrix};
use qmkit_core::qc::{period_distribution, shor_factor, QubitRegister};
use qmkit_core::quasi1d::ring_with_scatterer_spectrum;
use qmkit_core::spherical::{default_lmax, PhaseShiftSet, ShieldedWell};
use qmkit_core::wigner::{gaussian_wavefunction, wigner_transform, GridState};
use qmkit_core::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn linear_algebra(c: &mut Criterion) {
    let mut g = c.benchmark_group("eig");
    for n in [16usize, 64, 128] {
        let m = ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(((i * 7 + j * 3) % 11) as f64, 0.0));
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| b.iter(|| hermitian_eig(black_box(h)).unwrap()));
    }
    g.finish();
    c.bench_function("cg_j5_x_j4", |b| b.iter(|| add_angular_momentum(black_box(10), black_box(8))));
    c.bench_function("dimer_n100", |b| {
        b.iter(|| {
            let d = bose_hubbard_dimer(black_box(100), 1.0, 1.0, 0.0).unwrap();
            hermitian_eig(&d.hamiltonian).unwrap()
        })
    });
}

fn dynamics(c: &mut Criterion) {
    c.bench_function("lz_numeric", |b| b.iter(|| lz_numeric(LZSweep::with_min_window(1.0, 1.0), 0, LzReadout::Adiabatic).unwrap()));
    let model = DecayModel { e0: 0.0, delta: 0.01, sigma: 0.03, n_band: 2000 };
    c.bench_function("decay_spectrum_2000", |b| b.iter(|| decay_spectrum(black_box(&model)).unwrap()));
}

fn scattering(c: &mut Criterion) {
    c.bench_function("ring_spectrum", |b| {
        b.iter(|| ring_with_scatterer_spectrum(2.0 * std::f64::consts::PI, 1.0, 0.3, 1.0, 0.0, 40.0, black_box(20_000)))
    });
    let well = ShieldedWell { a: 1.0, v: f64::INFINITY, u: 0.0, mass: 1.0 };
    c.bench_function("hard_sphere_ka10", |b| {
        b.iter(|| PhaseShiftSet::from_well(&well, black_box(50.0), default_lmax(10.0, 1.0)).unwrap())
    });
}

fn phase_space(c: &mut Criterion) {
    let mut g = c.benchmark_group("wigner_transform");
    for n in [64usize, 256] {
        let dx = 16.0 / n as f64;
        let x: Vec<f64> = (0..n).map(|i| -8.0 + i as f64 * dx).collect();
        let st = GridState::from_wavefunction(-8.0, dx, &gaussian_wavefunction(&x, 0.5, 1.0, 0.8));
        g.bench_with_input(BenchmarkId::from_parameter(n), &st, |b, st| b.iter(|| wigner_transform(st).unwrap()));
    }
    g.finish();
}

fn quantum_computing(c: &mut Criterion) {
    let mut g = c.benchmark_group("qft");
    for n in [10usize, 16] {
        g.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| {
                let mut reg = QubitRegister::basis(n, 3).unwrap();
                reg.qft(0..n).unwrap();
                reg
            })
        });
    }
    g.finish();
    c.bench_function("period_distribution_21", |b| b.iter(|| period_distribution(21, black_box(2), 11).unwrap()));
    c.bench_function("shor_21", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        b.iter(|| shor_factor(21, 32, &mut rng).unwrap())
    });
}

criterion_group!(benches, linear_algebra, dynamics, scattering, phase_space, quantum_computing);
criterion_main!(benches);
