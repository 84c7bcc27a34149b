use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use esqpt_core::classical::v_volume;
use esqpt_core::density::counting_function;
use esqpt_core::potentials::{PathKind, PotentialSpec};
use esqpt_core::spectra::{assemble, converged_spectrum, initial_basis, ModelPoint, ScaleRule};

fn spectra(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectrum");
    g.sample_size(10);
    let cusp = ModelPoint::new(PathKind::CuspFirstOrder.spec(-0.3), 1e-2).unwrap();
    g.bench_function("cusp 60 levels K=1e-2", |b| b.iter(|| converged_spectrum(black_box(&cusp), 60, 1e-10).unwrap()));
    let coll = ModelPoint::new(PathKind::Collective.spec(0.27), 1e-2).unwrap();
    g.bench_function("collective 30 levels K=1e-2", |b| b.iter(|| converged_spectrum(black_box(&coll), 30, 1e-8).unwrap()));
    g.finish();
}

fn assembly_and_counting(c: &mut Criterion) {
    let mut g = c.benchmark_group("collective K=5e-3");
    g.sample_size(10);
    let mp = ModelPoint::new(PotentialSpec::collective(0.22, 1.0), 5e-3).unwrap();
    let basis = initial_basis(&mp, 200, ScaleRule::PhaseSpace).unwrap();
    g.bench_function("assemble", |b| b.iter(|| assemble(black_box(&mp), &basis).unwrap()));
    g.bench_function("count below 3 energies", |b| b.iter(|| counting_function(black_box(&mp), &basis, &[0.0, 0.005, 0.01]).unwrap()));
    g.finish();
}

fn phase_space(c: &mut Criterion) {
    let cusp = PotentialSpec::cusp(-1.0, 0.0);
    let coll = PotentialSpec::collective(0.22, 1.0);
    c.bench_function("V(E) cusp", |b| b.iter(|| v_volume(&cusp, black_box(0.3)).unwrap()));
    c.bench_function("V(E) collective", |b| b.iter(|| v_volume(&coll, black_box(0.005)).unwrap()));
}

criterion_group!(benches, spectra, assembly_and_counting, phase_space);
criterion_main!(benches);
