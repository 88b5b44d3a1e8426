use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ergolab_bench::fixtures;
use ergolab_core::{
    entropy_estimate, ulam_matrix, Assembly, EmpiricalMeasure, Partition, Start, TestFamily,
};

fn orbits(c: &mut Criterion) {
    let mut group = c.benchmark_group("orbit_100k");
    for (name, map) in fixtures().unwrap() {
        let start = Start::Typical { x0: 0.3, seed: 1 };
        group.bench_function(name, |b| {
            b.iter(|| map.orbit_from(black_box(&start), 100_000, 0).unwrap())
        });
    }
    group.finish();
}

fn ulam(c: &mut Criterion) {
    let mut group = c.benchmark_group("ulam_exact");
    let (_, map) = fixtures().unwrap().swap_remove(1);
    for k in [256usize, 1024] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| {
                let mut m = ulam_matrix(&map, k, Assembly::Exact).unwrap();
                m.solve().unwrap().len()
            })
        });
    }
    group.finish();
}

fn entropy(c: &mut Criterion) {
    let (_, map) = fixtures().unwrap().swap_remove(1);
    let measure =
        EmpiricalMeasure::from_orbit(&map, &Start::Typical { x0: 0.3, seed: 1 }, 200_000, 0)
            .unwrap();
    let base = Partition::branch(&map).unwrap();
    c.bench_function("entropy_estimate_q10", |b| {
        b.iter(|| entropy_estimate(&map, black_box(&measure), &base, 10).unwrap())
    });
    let family = TestFamily::with_default_truncation(&map);
    c.bench_function("embed_200k_points", |b| {
        b.iter(|| family.embed(black_box(&measure)).unwrap())
    });
}

criterion_group!(benches, orbits, ulam, entropy);
criterion_main!(benches);
