//! Instability path on the three-cluster benchmark, run on a single-thread
//! pool and on the default pool. Build with `--no-default-features` for the
//! purely sequential code path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use instab::instability::{joint_instability_paths, InstabilityConfig};
use instab::scenarios::{generate, ScenarioSpec};
use instab::{par, SeedSpec};

fn bench_paths(c: &mut Criterion) {
    let data = generate(&ScenarioSpec::circular(3, 0.15), SeedSpec::new(1))
        .unwrap()
        .data;
    let cfg = InstabilityConfig {
        k_max: 20,
        bootstrap_pairs: 10,
        seed: SeedSpec::new(2),
        ..Default::default()
    };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut group = c.benchmark_group("joint_paths_k2_20_b10");
    group.sample_size(10);
    for (label, workers) in [("one_thread", 1), ("default_pool", 0)] {
        group.bench_with_input(
            BenchmarkId::new(label, if workers == 0 { threads } else { 1 }),
            &workers,
            |b, &w| b.iter(|| par::with_workers(w, || joint_instability_paths(&data, &cfg).unwrap())),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_paths);
criterion_main!(benches);
