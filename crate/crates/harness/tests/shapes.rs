//! Statistical behaviour of the synthetic corpus and the shape releases.

use geodp::{frechet_mean, Dataset, GeodesicBall, Kendall, Manifold};
use geodp_harness::bench::BENCH_SOLVER;
use geodp_harness::shape::{
    gen_synthetic_corpus, prepare_shapes, run_shape_benchmark, template_curve, ShapeOptions, Template,
};
use geodp_harness::{summarize, Execution};

fn mean_distance_to_template(count: usize, seed: u64) -> f64 {
    let k = 16;
    let ks = Kendall::new(k).unwrap();
    let template = ks.to_preshape(&template_curve(Template::Ellipse, k)).unwrap();
    let corpus = gen_synthetic_corpus(Template::Ellipse, k, count, 0.05, seed).unwrap();
    let pre: Vec<_> = corpus.iter().map(|c| ks.to_preshape(c).unwrap()).collect();
    let ball = GeodesicBall::new(&ks, template.clone(), 0.39).unwrap();
    let data = Dataset::new(&ks, pre, ball).unwrap();
    let mean = frechet_mean(&ks, &data, &BENCH_SOLVER).unwrap().point;
    ks.distance(&template, &mean).unwrap()
}

#[test]
fn corpus_mean_approaches_the_template() {
    let avg = |count| (0..20).map(|s| mean_distance_to_template(count, s)).sum::<f64>() / 20.0;
    let (small, large) = (avg(10), avg(200));
    assert!(large < small, "{large} >= {small}");
}

#[test]
fn unaligned_pointwise_release_is_worse_than_aligned() {
    for template in [Template::Ellipse, Template::Blob] {
        let corpus = gen_synthetic_corpus(template, 20, 30, 0.05, 21).unwrap();
        let sd = prepare_shapes(&corpus).unwrap();
        let mut opts = ShapeOptions::new(1.0, 21);
        opts.chain = geodp::ChainConfig::new(500, 50, 0.01, 21).unwrap();
        let (rows, _) = run_shape_benchmark(&sd, &opts, 50, Execution::Parallel).unwrap();
        let s = summarize(&rows);
        let get = |m| s.iter().find(|r| r.mechanism == m).unwrap();
        let al = get(geodp::Mechanism::PointwiseAligned);
        let un = get(geodp::Mechanism::PointwiseUnaligned);
        let gap = un.mean_intrinsic.unwrap() - al.mean_intrinsic.unwrap();
        let se = (al.two_se_intrinsic.unwrap().powi(2) + un.two_se_intrinsic.unwrap().powi(2)).sqrt() / 2.0;
        assert!(gap > 2.0 * se, "{template:?}: gap {gap} vs se {se}");
    }
}
