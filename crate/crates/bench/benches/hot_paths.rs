use criterion::{black_box, criterion_group, criterion_main, Criterion};
use maxbound::boundary::{BoundaryFn, BoundaryVector, StoppingBoundaryVector};
use maxbound::bounds::ub_at_level;
use maxbound::embedding::{exact_ensemble, sample_iterated_ay_exact};
use maxbound::pathwise::upsilon;
use maxbound::rng::path_rng;

fn bench_upsilon(c: &mut Criterion) {
    let xi = StoppingBoundaryVector::new(
        vec![
            BoundaryFn::linear(0.4).unwrap(),
            BoundaryFn::linear(0.5).unwrap(),
            BoundaryFn::linear(0.6).unwrap(),
            BoundaryFn::linear(0.7).unwrap(),
        ],
        1.0,
    )
    .unwrap();
    let ens = exact_ensemble(&xi, 64, 11).unwrap();
    let b = BoundaryVector::repeated(BoundaryFn::linear(0.5).unwrap(), 4, 1.0).unwrap();
    let zvals = b.evaluate_all(2.0).unwrap();
    c.bench_function("upsilon_n4_64paths", |bench| {
        bench.iter(|| {
            let mut acc = 0.0;
            for snap in &ens.snapshots {
                acc += upsilon(black_box(snap), 2.0, &zvals).unwrap().total;
            }
            acc
        })
    });
}

fn bench_exact_sampler(c: &mut Criterion) {
    let xi = StoppingBoundaryVector::new(
        vec![
            BoundaryFn::piecewise_linear(vec![(1.0, 0.55), (2.0, 1.3), (4.0, 2.8)]).unwrap(),
            BoundaryFn::linear(0.65).unwrap(),
        ],
        1.0,
    )
    .unwrap();
    c.bench_function("exact_sampler_two_stage", |bench| {
        let mut idx = 0u64;
        bench.iter(|| {
            idx += 1;
            let mut rng = path_rng(3, idx);
            sample_iterated_ay_exact(black_box(&xi), &mut rng).unwrap()
        })
    });
}

fn bench_ub_at_level(c: &mut Criterion) {
    let xi =
        StoppingBoundaryVector::repeated(BoundaryFn::linear(0.6).unwrap(), 2, 1.0).unwrap();
    let ens = exact_ensemble(&xi, 10_000, 17).unwrap();
    let b = BoundaryVector::repeated(BoundaryFn::linear(0.6).unwrap(), 2, 1.0).unwrap();
    c.bench_function("ub_at_level_10k_paths", |bench| {
        bench.iter(|| ub_at_level(black_box(&ens), &b, 2.5).unwrap())
    });
}

criterion_group!(benches, bench_upsilon, bench_exact_sampler, bench_ub_at_level);
criterion_main!(benches);
