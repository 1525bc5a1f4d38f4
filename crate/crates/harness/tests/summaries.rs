//! Result files and the summaries derived from them.

use geodp::Mechanism;
use geodp_harness::io::{read_results, write_results};
use geodp_harness::{run_benchmark, summarize, BenchmarkConfig, ChainOverrides};

fn quick() -> BenchmarkConfig {
    BenchmarkConfig {
        sizes: vec![25, 100, 400],
        replicates: 60,
        chain: ChainOverrides { burn_in: Some(500), thin: Some(50), step: None, plain_ratio: false },
        ..BenchmarkConfig::sphere_default()
    }
}

#[test]
fn summaries_recompute_from_the_written_rows() {
    let cfg = BenchmarkConfig { replicates: 5, ..quick() };
    let rows = run_benchmark(&cfg).unwrap();
    assert_eq!(rows.len(), cfg.sizes.len() * cfg.replicates * cfg.mechanisms.len());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    write_results(&path, &rows).unwrap();
    let back = read_results(&path).unwrap();
    assert_eq!(back, rows);
    let summary = summarize(&back);
    assert_eq!(summary, summarize(&rows));
    assert_eq!(summary.len(), cfg.sizes.len() * cfg.mechanisms.len());
    assert!(rows.iter().all(|r| r.utility_euclidean.is_none_or(|u| u >= 0.0)));
    assert!(rows.iter().all(|r| r.utility_intrinsic.is_none_or(|u| u >= 0.0)));
}

#[test]
fn kng_utility_improves_with_sample_size() {
    let cfg = BenchmarkConfig { mechanisms: vec![Mechanism::Kng], ..quick() };
    let summary = summarize(&run_benchmark(&cfg).unwrap());
    let means: Vec<f64> = summary.iter().map(|s| s.mean_euclidean.unwrap()).collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}
