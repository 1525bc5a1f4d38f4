//! Monte Carlo comparison of the mechanisms on the sphere and on SPD matrices.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use geodp::kendall::Kendall;
use geodp::mechanisms::calibration::{euclidean_sigma, PrivacyParams};
use geodp::mechanisms::laplace::{project_to_sphere, sample_euclidean_laplace};
use geodp::mechanisms::{sample_kng, sample_manifold_laplace};
use geodp::spd::{unvech, vech, Spd};
use geodp::{
    frechet_mean, ChainConfig, Dataset, GeodesicBall, Manifold, Mechanism, Preshape, SolverConfig,
    SpdPoint, Sphere, SpherePoint,
};

use crate::config::{BenchmarkConfig, ManifoldKind};
use crate::error::Result;
use crate::par::map_jobs;
use crate::seeds::derive;

/// Stream tag for dataset generation; mechanism streams use their index in
/// [`Mechanism::ALL`].
const DATA_STREAM: u64 = u64::MAX;

/// Gradient tolerance for the non-private means in the benchmark.
pub const BENCH_SOLVER: SolverConfig = SolverConfig { step: 0.5, grad_tol: 1e-10, max_iter: 500 };

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub manifold: String,
    pub mechanism: Mechanism,
    pub n: usize,
    pub replicate: usize,
    /// Distance in the ambient representation used by each geometry.
    pub utility_euclidean: Option<f64>,
    /// Geodesic distance, when the release is a point of the manifold.
    pub utility_intrinsic: Option<f64>,
    pub seed: u64,
    pub wall_ms: u64,
    pub error: Option<String>,
}

/// Distance between a mean and its release in the geometry's ambient coordinates.
pub trait Utility: Manifold {
    fn utility_distance(&self, mean: &Self::Point, sanitized: &Self::Point) -> geodp::Result<f64>;
}

impl Utility for Sphere {
    fn utility_distance(&self, mean: &SpherePoint, x: &SpherePoint) -> geodp::Result<f64> {
        Ok((mean.coords() - x.coords()).norm())
    }
}

impl Utility for Spd {
    fn utility_distance(&self, mean: &SpdPoint, x: &SpdPoint) -> geodp::Result<f64> {
        Ok((vech(mean.matrix()) - vech(x.matrix())).norm())
    }
}

impl Utility for Kendall {
    /// Norm of the complex difference after rotating `x` onto `mean`.
    fn utility_distance(&self, mean: &Preshape, x: &Preshape) -> geodp::Result<f64> {
        let (xa, _) = self.align(mean, x)?;
        let d = mean.landmarks() - xa.landmarks();
        Ok(d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    }
}

pub fn mechanism_stream(m: Mechanism) -> u64 {
    Mechanism::ALL.iter().position(|&x| x == m).expect("listed") as u64
}

/// Runs every `(n, replicate)` job and returns rows ordered by
/// `(n, replicate, mechanism)` with mechanisms in configuration order.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let chain = cfg.chain_config()?;
    let jobs: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| (0..cfg.replicates).map(move |r| (n, r)))
        .collect();
    let rows = map_jobs(jobs, cfg.execution, |(n, rep)| match cfg.manifold {
        ManifoldKind::Sphere => sphere_job(cfg, &chain, n, rep),
        ManifoldKind::Spd => spd_job(cfg, &chain, n, rep),
    });
    Ok(rows.into_iter().flatten().collect())
}

struct Outcome {
    euclidean: Option<f64>,
    intrinsic: Option<f64>,
    warning: Option<String>,
}

fn intrinsic<M: Utility>(m: &M, mean: &M::Point, x: &M::Point) -> geodp::Result<Outcome> {
    Ok(Outcome {
        euclidean: Some(m.utility_distance(mean, x)?),
        intrinsic: Some(m.distance(mean, x)?),
        warning: None,
    })
}

fn rows_for(
    cfg: &BenchmarkConfig,
    n: usize,
    rep: usize,
    mut run: impl FnMut(Mechanism, u64) -> geodp::Result<Outcome>,
) -> Vec<ResultRow> {
    cfg.mechanisms
        .iter()
        .map(|&mech| {
            let seed = derive(cfg.seed, &[n as u64, rep as u64, mechanism_stream(mech)]);
            let start = Instant::now();
            let res = run(mech, seed);
            let wall_ms = if cfg.record_timing { start.elapsed().as_millis() as u64 } else { 0 };
            let (u_e, u_i, error) = match res {
                Ok(o) => (o.euclidean, o.intrinsic, o.warning.map(|w| format!("warning: {w}"))),
                Err(e) => (None, None, Some(e.to_string())),
            };
            ResultRow {
                manifold: cfg.manifold.as_str().to_string(),
                mechanism: mech,
                n,
                replicate: rep,
                utility_euclidean: u_e,
                utility_intrinsic: u_i,
                seed,
                wall_ms,
                error,
            }
        })
        .collect()
}

fn failed_rows(cfg: &BenchmarkConfig, n: usize, rep: usize, e: &geodp::Error) -> Vec<ResultRow> {
    rows_for(cfg, n, rep, |_, _| Err(e.clone()))
}

fn mcmc_outcome<M: Utility>(
    m: &M,
    mean: &M::Point,
    r: geodp::Result<geodp::mechanisms::MechanismResult<M::Point>>,
) -> geodp::Result<Outcome> {
    let r = r?;
    let mut o = intrinsic(m, mean, &r.point)?;
    o.warning = r.diagnostics.and_then(|d| d.warning);
    Ok(o)
}

fn sphere_job(cfg: &BenchmarkConfig, chain: &ChainConfig, n: usize, rep: usize) -> Vec<ResultRow> {
    let s = Sphere::unit(2);
    let setup = || -> geodp::Result<_> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive(cfg.seed, &[n as u64, rep as u64, DATA_STREAM]));
        let pts = s.sample_ball_uniform_polar(cfg.radius, n, &mut rng)?;
        let ball = GeodesicBall::new(&s, s.north_pole(), cfg.radius)?;
        let data = Dataset::new(&s, pts, ball)?;
        let mean = frechet_mean(&s, &data, &BENCH_SOLVER)?.point;
        let params = PrivacyParams::new(cfg.epsilon, cfg.radius, n, &s.descriptor())?;
        Ok((data, mean, params))
    };
    let (data, mean, params) = match setup() {
        Ok(v) => v,
        Err(e) => return failed_rows(cfg, n, rep, &e),
    };
    rows_for(cfg, n, rep, |mech, seed| {
        let chain = chain.with_seed(seed);
        match mech {
            Mechanism::Kng => mcmc_outcome(&s, &mean, sample_kng(&s, &data, mean.clone(), &params, &chain)),
            Mechanism::ManifoldLaplace => {
                mcmc_outcome(&s, &mean, sample_manifold_laplace(&s, &mean, data.ball(), &params, &chain))
            }
            Mechanism::EuclideanLaplace | Mechanism::ProjectedEuclideanLaplace => {
                // chord <= arc, so the geodesic radius also bounds the ambient one
                let sigma = euclidean_sigma(&params, cfg.radius)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let y = sample_euclidean_laplace(mean.coords(), sigma, &mut rng)?;
                if mech == Mechanism::EuclideanLaplace {
                    Ok(Outcome { euclidean: Some((&y - mean.coords()).norm()), intrinsic: None, warning: None })
                } else {
                    intrinsic(&s, &mean, &project_to_sphere(&y)?)
                }
            }
            other => Err(geodp::Error::Configuration(format!("{other} is not a sphere mechanism"))),
        }
    })
}

fn spd_job(cfg: &BenchmarkConfig, chain: &ChainConfig, n: usize, rep: usize) -> Vec<ResultRow> {
    let setup = || -> geodp::Result<_> {
        let m = Spd::new(cfg.spd_k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive(cfg.seed, &[n as u64, rep as u64, DATA_STREAM]));
        let pts = m.sample_wishart_ball(cfg.radius, n, &mut rng)?;
        let ball = GeodesicBall::new(&m, m.identity(), cfg.radius)?;
        let data = Dataset::new(&m, pts, ball)?;
        let mean = frechet_mean(&m, &data, &BENCH_SOLVER)?.point;
        let params = PrivacyParams::new(cfg.epsilon, cfg.radius, n, &m.descriptor())?;
        Ok((m, data, mean, params))
    };
    let (m, data, mean, params) = match setup() {
        Ok(v) => v,
        Err(e) => return failed_rows(cfg, n, rep, &e),
    };
    rows_for(cfg, n, rep, |mech, seed| {
        let chain = chain.with_seed(seed);
        match mech {
            Mechanism::Kng => mcmc_outcome(&m, &mean, sample_kng(&m, &data, mean.clone(), &params, &chain)),
            Mechanism::ManifoldLaplace => {
                mcmc_outcome(&m, &mean, sample_manifold_laplace(&m, &mean, data.ball(), &params, &chain))
            }
            Mechanism::EuclideanLaplace => {
                let sigma = euclidean_sigma(&params, Spd::ambient_radius(cfg.radius))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let center: DVector<f64> = vech(mean.matrix());
                let y = sample_euclidean_laplace(&center, sigma, &mut rng)?;
                let intrinsic = match m.point(unvech(&y)?) {
                    Ok(p) => m.distance(&mean, &p).ok(),
                    Err(_) => None,
                };
                Ok(Outcome { euclidean: Some((&y - &center).norm()), intrinsic, warning: None })
            }
            other => Err(geodp::Error::Configuration(format!("{other} is not an SPD mechanism"))),
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub manifold: String,
    pub mechanism: Mechanism,
    pub n: usize,
    pub count: usize,
    pub mean_euclidean: Option<f64>,
    pub two_se_euclidean: Option<f64>,
    pub count_intrinsic: usize,
    pub mean_intrinsic: Option<f64>,
    pub two_se_intrinsic: Option<f64>,
    pub failures: usize,
}

/// Mean and `2 * SE` (sample standard deviation over `sqrt(count)`).
/// SE is left empty for fewer than two values.
pub fn mean_two_se(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (Some(mean), Some(2.0 * (var / m).sqrt()))
}

/// Per-`(mechanism, n)` summary, ordered by mechanism then `n`.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Mechanism, usize), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.mechanism, r.n)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((mechanism, n), rs)| {
            let ue: Vec<f64> = rs.iter().filter_map(|r| r.utility_euclidean).collect();
            let ui: Vec<f64> = rs.iter().filter_map(|r| r.utility_intrinsic).collect();
            let (me, se) = mean_two_se(&ue);
            let (mi, si) = mean_two_se(&ui);
            SummaryRow {
                manifold: rs[0].manifold.clone(),
                mechanism,
                n,
                count: ue.len(),
                mean_euclidean: me,
                two_se_euclidean: se,
                count_intrinsic: ui.len(),
                mean_intrinsic: mi,
                two_se_intrinsic: si,
                failures: rs.iter().filter(|r| r.utility_euclidean.is_none()).count(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ChainOverrides;
    use crate::par::Execution;
    use nalgebra::DMatrix;

    fn small(kind: ManifoldKind) -> BenchmarkConfig {
        BenchmarkConfig {
            sizes: vec![20],
            replicates: 2,
            chain: ChainOverrides { burn_in: Some(50), thin: Some(5), step: None, plain_ratio: false },
            ..BenchmarkConfig::default_for(kind)
        }
    }

    #[test]
    fn utility_reference_values() {
        let s = Sphere::unit(2);
        let n = s.north_pole();
        let south = s.point(DVector::from_vec(vec![0.0, 0.0, -1.0])).unwrap();
        assert_eq!(s.utility_distance(&n, &n).unwrap(), 0.0);
        assert_eq!(s.utility_distance(&n, &south).unwrap(), 2.0);

        let m = Spd::new(2).unwrap();
        let a = 0.37;
        let x = SpdPoint::new_unchecked(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0 + a, 1.0])));
        assert!((m.utility_distance(&m.identity(), &x).unwrap() - a).abs() < 1e-15);

        let ks = Kendall::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ks.to_preshape(&ks.random_ambient(&mut rng)).unwrap();
        assert!(ks.utility_distance(&p, &p.rotated(1.3)).unwrap() < 1e-14);
    }

    #[test]
    fn one_replicate_one_mechanism_gives_one_row() {
        let cfg = BenchmarkConfig {
            replicates: 1,
            mechanisms: vec![Mechanism::Kng],
            ..small(ManifoldKind::Sphere)
        };
        let rows = run_benchmark(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].error.is_none(), "{:?}", rows[0].error);
        assert!(rows[0].utility_euclidean.unwrap() >= 0.0);
    }

    #[test]
    fn row_order_and_columns() {
        let cfg = small(ManifoldKind::Sphere);
        let rows = run_benchmark(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 4);
        assert_eq!(rows[0].mechanism, Mechanism::Kng);
        assert_eq!(rows[4].replicate, 1);
        let euc = rows.iter().find(|r| r.mechanism == Mechanism::EuclideanLaplace).unwrap();
        assert!(euc.utility_intrinsic.is_none() && euc.utility_euclidean.is_some());
        let proj = rows.iter().find(|r| r.mechanism == Mechanism::ProjectedEuclideanLaplace).unwrap();
        assert!(proj.utility_intrinsic.is_some());
        assert!(rows.iter().all(|r| r.wall_ms == 0));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let mut cfg = small(ManifoldKind::Spd);
        cfg.execution = Execution::Sequential;
        let a = run_benchmark(&cfg).unwrap();
        cfg.execution = Execution::Parallel;
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.error.is_none() || r.error.as_deref().unwrap().starts_with("warning")));
    }

    #[test]
    fn mechanism_seeds_do_not_depend_on_list_order() {
        let mut cfg = small(ManifoldKind::Sphere);
        cfg.mechanisms = vec![Mechanism::ManifoldLaplace, Mechanism::Kng];
        let a = run_benchmark(&cfg).unwrap();
        cfg.mechanisms = vec![Mechanism::Kng, Mechanism::ManifoldLaplace];
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(a[0], b[1]);
        assert_eq!(a[1], b[0]);
    }

    #[test]
    fn summary_statistics() {
        assert_eq!(mean_two_se(&[]), (None, None));
        assert_eq!(mean_two_se(&[2.0]), (Some(2.0), None));
        let (m, se) = mean_two_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, Some(2.5));
        // sd = sqrt(5/3), se = sd / 2
        assert!((se.unwrap() - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);

        let cfg = BenchmarkConfig { sizes: vec![10, 20], ..small(ManifoldKind::Sphere) };
        let rows = run_benchmark(&cfg).unwrap();
        let s = summarize(&rows);
        assert_eq!(s.len(), cfg.mechanisms.len() * cfg.sizes.len());
        assert!(s.iter().all(|r| r.count == 2));
    }
}
