//! Private release of Fréchet means.
//!
//! [`sample_kng`] draws from the K-norm gradient density
//! `exp(-|mean_log(x)| / sigma)` and [`sample_manifold_laplace`] from
//! `exp(-rho(x, eta) / sigma)`, both restricted to the data ball and sampled
//! by Metropolis. The Euclidean and landmark-wise baselines live in
//! [`laplace`] and [`shape`].

pub mod calibration;
pub mod laplace;
pub mod mcmc;
pub mod shape;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frechet::Dataset;
use crate::manifold::{GeodesicBall, Manifold};

use calibration::{laplace_sigma, scale_sigma, PrivacyParams};
use mcmc::{sample_mh, ChainConfig, ChainDiagnostics, KernelFamily, Proposal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mechanism {
    Kng,
    ManifoldLaplace,
    EuclideanLaplace,
    ProjectedEuclideanLaplace,
    PointwiseAligned,
    PointwiseUnaligned,
}

impl Mechanism {
    pub const ALL: [Mechanism; 6] = [
        Mechanism::Kng,
        Mechanism::ManifoldLaplace,
        Mechanism::EuclideanLaplace,
        Mechanism::ProjectedEuclideanLaplace,
        Mechanism::PointwiseAligned,
        Mechanism::PointwiseUnaligned,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::Kng => "kng",
            Mechanism::ManifoldLaplace => "laplace",
            Mechanism::EuclideanLaplace => "euclidean",
            Mechanism::ProjectedEuclideanLaplace => "euclidean-projected",
            Mechanism::PointwiseAligned => "pointwise-aligned",
            Mechanism::PointwiseUnaligned => "pointwise-unaligned",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mechanism {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Mechanism::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown mechanism '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct MechanismResult<P> {
    pub point: P,
    pub mechanism: Mechanism,
    pub sigma: f64,
    pub diagnostics: Option<ChainDiagnostics>,
}

fn outside<M: Manifold>(m: &M, ball: &GeodesicBall<M>, x: &M::Point) -> Result<bool> {
    Ok(m.distance(&ball.center, x)? > ball.radius)
}

/// `|mean_log(x)|_x / sigma` inside the data ball, `+inf` outside.
pub fn kng_neg_log_density<M: Manifold>(m: &M, x: &M::Point, data: &Dataset<M>, sigma: f64) -> Result<f64> {
    if outside(m, data.ball(), x)? {
        return Ok(f64::INFINITY);
    }
    Ok(m.mean_log_norm(x, data.points())? / sigma)
}

/// `rho(x, eta) / sigma` inside `ball`, `+inf` outside.
pub fn laplace_neg_log_density<M: Manifold>(
    m: &M,
    x: &M::Point,
    eta: &M::Point,
    ball: &GeodesicBall<M>,
    sigma: f64,
) -> Result<f64> {
    if outside(m, ball, x)? {
        return Ok(f64::INFINITY);
    }
    Ok(m.distance(x, eta)? / sigma)
}

/// One KNG draw using `kernel`, with the chain started at `start`
/// (normally the non-private mean).
pub fn sample_kng_with<M: Manifold, K: Proposal<M>>(
    m: &M,
    data: &Dataset<M>,
    start: M::Point,
    params: &PrivacyParams,
    kernel: &K,
    cfg: &ChainConfig,
) -> Result<MechanismResult<M::Point>> {
    let sigma = scale_sigma(params)?;
    let target = |x: &M::Point| kng_neg_log_density(m, x, data, sigma);
    let (mut pts, diag) = sample_mh(m, target, start, kernel, cfg, 1)?;
    Ok(MechanismResult {
        point: pts.pop().expect("one draw"),
        mechanism: Mechanism::Kng,
        sigma,
        diagnostics: Some(diag),
    })
}

/// One KNG draw with the manifold's default random-walk kernel.
pub fn sample_kng<M: KernelFamily>(
    m: &M,
    data: &Dataset<M>,
    start: M::Point,
    params: &PrivacyParams,
    cfg: &ChainConfig,
) -> Result<MechanismResult<M::Point>> {
    let kernel = m.default_kernel(scale_sigma(params)?, cfg.t());
    sample_kng_with(m, data, start, params, &kernel, cfg)
}

/// One manifold-Laplace draw centered at `eta`.
pub fn sample_manifold_laplace_with<M: Manifold, K: Proposal<M>>(
    m: &M,
    eta: &M::Point,
    ball: &GeodesicBall<M>,
    params: &PrivacyParams,
    kernel: &K,
    cfg: &ChainConfig,
) -> Result<MechanismResult<M::Point>> {
    let sigma = laplace_sigma(params)?;
    let target = |x: &M::Point| laplace_neg_log_density(m, x, eta, ball, sigma);
    let (mut pts, diag) = sample_mh(m, target, eta.clone(), kernel, cfg, 1)?;
    Ok(MechanismResult {
        point: pts.pop().expect("one draw"),
        mechanism: Mechanism::ManifoldLaplace,
        sigma,
        diagnostics: Some(diag),
    })
}

pub fn sample_manifold_laplace<M: KernelFamily>(
    m: &M,
    eta: &M::Point,
    ball: &GeodesicBall<M>,
    params: &PrivacyParams,
    cfg: &ChainConfig,
) -> Result<MechanismResult<M::Point>> {
    let kernel = m.default_kernel(laplace_sigma(params)?, cfg.t());
    sample_manifold_laplace_with(m, eta, ball, params, &kernel, cfg)
}
