use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geodp_harness::{run_benchmark, BenchmarkConfig, ChainOverrides, Execution};

fn replicates(c: &mut Criterion) {
    let mut group = c.benchmark_group("sphere_replicates");
    group.sample_size(10);
    let base = BenchmarkConfig {
        sizes: vec![50],
        replicates: 16,
        chain: ChainOverrides { burn_in: Some(1000), thin: Some(100), step: None, plain_ratio: false },
        ..BenchmarkConfig::sphere_default()
    };
    for exec in [Execution::Sequential, Execution::Parallel] {
        let cfg = BenchmarkConfig { execution: exec, ..base.clone() };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &cfg, |b, cfg| {
            b.iter(|| run_benchmark(cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, replicates);
criterion_main!(benches);
