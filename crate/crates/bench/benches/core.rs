use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use invsurr_core::coeffs::extract_iso;
use invsurr_core::gpr::fit;
use invsurr_core::sampling::{anneal_iso, build_hull, lhs_sample};
use invsurr_core::surrogate::{train_surrogate, training_set_from_law, Provenance, SurrogateConfig};
use invsurr_core::tensors::{generator_gradients, principal_invariants, right_cauchy_green};
use invsurr_core::{AnnealConfig, DomainBounds, InvariantKind, Law, MappingKind, MooneyRivlinParams, SymMat3};

fn samples(n: usize) -> Vec<SymMat3> {
    let b = DomainBounds::new(0.175).unwrap();
    lhs_sample(&b, n, 7).iter().map(|f| right_cauchy_green(f).unwrap()).collect()
}

fn tensors(c: &mut Criterion) {
    let cs = samples(256);
    c.bench_function("principal_invariants x256", |b| {
        b.iter(|| cs.iter().map(|x| principal_invariants(black_box(x)).i1).sum::<f64>())
    });
    c.bench_function("generator_gradients iso", |b| {
        b.iter(|| generator_gradients(InvariantKind::Iso, black_box(&cs[3]), None).unwrap())
    });
    let law = Law::MooneyRivlin(MooneyRivlinParams::default());
    let s = law.stress(&cs[5]).unwrap();
    c.bench_function("extract_iso", |b| b.iter(|| extract_iso(black_box(&cs[5]), black_box(&s)).unwrap()));
}

fn regression(c: &mut Criterion) {
    let law = Law::MooneyRivlin(MooneyRivlinParams::default());
    let (set, _) = training_set_from_law(MappingKind::Iso3to3, &law, &samples(200)).unwrap();
    let set = set.truncated(100);
    let mut g = c.benchmark_group("gpr");
    g.sample_size(10);
    g.bench_function("fit 100x3", |b| {
        b.iter(|| fit(black_box(&set.inputs), black_box(&set.outputs), &Default::default()).unwrap())
    });
    let model = train_surrogate(&set, None, &SurrogateConfig::default(), Provenance::default()).unwrap();
    let q = SymMat3::diag(1.05, 0.98, 1.01);
    g.bench_function("predict_stress", |b| b.iter(|| model.predict_stress(black_box(&q)).unwrap()));
    g.bench_function("predict_tangent", |b| b.iter(|| model.predict_tangent(black_box(&q)).unwrap()));
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let b = DomainBounds::new(0.175).unwrap();
    let mut g = c.benchmark_group("sampling");
    g.sample_size(10);
    g.bench_function("hull 5000", |bch| bch.iter(|| build_hull(&b, 5000, 1).unwrap()));
    let hull = build_hull(&b, 5000, 1).unwrap();
    g.bench_function("anneal 100 x 200 sweeps", |bch| {
        bch.iter_batched(
            || AnnealConfig::iso().with_sweeps(200),
            |cfg| anneal_iso(&hull, 100, &cfg, 3).unwrap(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, tensors, regression, sampling);
criterion_main!(benches);
