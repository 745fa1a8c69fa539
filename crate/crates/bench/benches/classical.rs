use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ctarget::heteroclinic::{find_orbits, table_one, SearchConfig};
use ctarget::torus::{lyapunov_estimate, standard_map_step, KickedRotorParams, TorusAction};

fn classical(c: &mut Criterion) {
    let params = KickedRotorParams::new(8.0, TorusAction::Doubled).unwrap();
    let start = table_one().points_full[0];
    c.bench_function("standard_map_six_steps", |b| {
        b.iter(|| {
            let mut x = black_box(start);
            for _ in 0..6 {
                x = standard_map_step(&x, &params);
            }
            x
        })
    });
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    group.bench_function("find_orbits_tau6", |b| {
        b.iter(|| find_orbits(black_box(&SearchConfig::default()), &params).unwrap())
    });
    group.bench_function("lyapunov_1e4x10", |b| {
        b.iter(|| lyapunov_estimate(&params, 10_000, 10, black_box(7)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, classical);
criterion_main!(benches);
