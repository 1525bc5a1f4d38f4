//! Numerical check of the privacy guarantee on `S^2_1`.
//!
//! Both output densities of a mechanism, for neighbouring datasets, are
//! evaluated on a polar grid over the support cap and normalized by their
//! grid sums. The largest absolute log ratio over grid cells is compared to
//! `epsilon + ln(1.05)`, the slack absorbing discretization error.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use geodp::mechanisms::calibration::{laplace_sigma, scale_sigma, PrivacyParams};
use geodp::sphere::polar_point;
use geodp::{frechet_mean, Dataset, GeodesicBall, Manifold, Mechanism, SolverConfig, Sphere, SpherePoint};

use crate::error::{HarnessError, Result};
use crate::seeds::derive;

pub const MIN_GRID: usize = 50;

/// Relative slack allowed on the density ratio.
pub const RATIO_SLACK: f64 = 1.05;

/// Midpoint cells of a polar grid over the cap of radius `radius` around the
/// north pole, with area weights `sin(theta) dtheta dphi`.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    pub points: Vec<SpherePoint>,
    pub log_weights: Vec<f64>,
}

impl PolarGrid {
    pub fn new(radius: f64, resolution: usize) -> Result<Self> {
        if resolution < MIN_GRID {
            return Err(HarnessError::Config(format!(
                "grid resolution {resolution} is below the minimum {MIN_GRID}"
            )));
        }
        let dt = radius / resolution as f64;
        let dp = TAU / resolution as f64;
        let mut points = Vec::with_capacity(resolution * resolution);
        let mut log_weights = Vec::with_capacity(resolution * resolution);
        for i in 0..resolution {
            let theta = (i as f64 + 0.5) * dt;
            let lw = (theta.sin() * dt * dp).ln();
            for j in 0..resolution {
                points.push(polar_point(theta, (j as f64 + 0.5) * dp));
                log_weights.push(lw);
            }
        }
        Ok(PolarGrid { points, log_weights })
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Grid-normalized log density of `mechanism`'s output for `data`.
fn log_density(
    s: &Sphere,
    grid: &PolarGrid,
    data: &Dataset<Sphere>,
    params: &PrivacyParams,
    mechanism: Mechanism,
) -> Result<Vec<f64>> {
    let energy: Vec<f64> = match mechanism {
        Mechanism::Kng => {
            let sigma = scale_sigma(params)?;
            grid.points
                .iter()
                .map(|x| Ok(s.mean_log_norm(x, data.points())? / sigma))
                .collect::<geodp::Result<_>>()?
        }
        Mechanism::ManifoldLaplace => {
            let sigma = laplace_sigma(params)?;
            let cfg = SolverConfig { grad_tol: 1e-12, ..SolverConfig::default() };
            let eta = frechet_mean(s, data, &cfg)?.point;
            grid.points
                .iter()
                .map(|x| Ok(s.distance(x, &eta)? / sigma))
                .collect::<geodp::Result<_>>()?
        }
        other => return Err(HarnessError::Config(format!("audit does not support '{other}'"))),
    };
    let lz = log_sum_exp(energy.iter().zip(&grid.log_weights).map(|(e, w)| w - e));
    Ok(energy.iter().map(|e| -e - lz).collect())
}

/// Largest `|log f_D(x) - log f_D'(x)|` over grid cells.
pub fn dp_ratio_audit(
    grid: &PolarGrid,
    d1: &Dataset<Sphere>,
    d2: &Dataset<Sphere>,
    params: &PrivacyParams,
    mechanism: Mechanism,
) -> Result<f64> {
    let s = Sphere::unit(2);
    let a = log_density(&s, grid, d1, params, mechanism)?;
    let b = log_density(&s, grid, d2, params, mechanism)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub n: usize,
    pub radius: f64,
    pub epsilon: f64,
    /// Budget the observed ratio is checked against; normally `epsilon`.
    pub check_epsilon: f64,
    pub grid: usize,
    /// Random neighbouring pairs, in addition to one worst-case pair.
    pub pairs: usize,
    pub seed: u64,
    pub mechanisms: Vec<Mechanism>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            n: 20,
            radius: PI / 8.0,
            epsilon: 1.0,
            check_epsilon: 1.0,
            grid: 200,
            pairs: 20,
            seed: 1,
            mechanisms: vec![Mechanism::Kng, Mechanism::ManifoldLaplace],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditLine {
    pub mechanism: Mechanism,
    /// Index of the pair; 0 is the worst-case pair.
    pub pair: usize,
    pub max_log_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub threshold: f64,
    pub lines: Vec<AuditLine>,
}

impl AuditReport {
    pub fn max_for(&self, m: Mechanism) -> f64 {
        self.lines.iter().filter(|l| l.mechanism == m).map(|l| l.max_log_ratio).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.max_log_ratio <= self.threshold)
    }
}

/// `n - 1` points at the pole and one on the boundary of the cap; the
/// neighbour moves that point to the diametrically opposite boundary point.
pub fn worst_case_pair(n: usize, radius: f64) -> Result<(Dataset<Sphere>, Dataset<Sphere>)> {
    let s = Sphere::unit(2);
    let ball = GeodesicBall::new(&s, s.north_pole(), radius)?;
    let mut pts = vec![s.north_pole(); n.max(1) - 1];
    pts.push(polar_point(radius, 0.0));
    let d1 = Dataset::new(&s, pts, ball)?;
    let d2 = d1.replace_last(&s, polar_point(radius, PI))?;
    Ok((d1, d2))
}

pub fn random_pair(n: usize, radius: f64, seed: u64) -> Result<(Dataset<Sphere>, Dataset<Sphere>)> {
    let s = Sphere::unit(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = s.sample_ball_uniform_polar(radius, n + 1, &mut rng)?;
    let ball = GeodesicBall::new(&s, s.north_pole(), radius)?;
    let d1 = Dataset::new(&s, pts[..n].to_vec(), ball)?;
    let d2 = d1.replace_last(&s, pts[n].clone())?;
    Ok((d1, d2))
}

pub fn run_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    if cfg.n == 0 {
        return Err(HarnessError::Config("audit sample size must be positive".into()));
    }
    if !(cfg.check_epsilon > 0.0) {
        return Err(HarnessError::Config("check epsilon must be positive".into()));
    }
    let s = Sphere::unit(2);
    let params = PrivacyParams::new(cfg.epsilon, cfg.radius, cfg.n, &s.descriptor())?;
    let grid = PolarGrid::new(cfg.radius, cfg.grid)?;
    let mut pairs = vec![worst_case_pair(cfg.n, cfg.radius)?];
    for i in 0..cfg.pairs {
        pairs.push(random_pair(cfg.n, cfg.radius, derive(cfg.seed, &[i as u64]))?);
    }
    let mut lines = Vec::new();
    for &m in &cfg.mechanisms {
        for (pair, (d1, d2)) in pairs.iter().enumerate() {
            lines.push(AuditLine { mechanism: m, pair, max_log_ratio: dp_ratio_audit(&grid, d1, d2, &params, m)? });
        }
    }
    Ok(AuditReport { threshold: cfg.check_epsilon + RATIO_SLACK.ln(), lines })
}
