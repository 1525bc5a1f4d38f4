//! Random-walk Metropolis on a manifold with manifold-specific proposal kernels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kendall::{CVector, Kendall, Preshape};
use crate::manifold::{Manifold, Tangent};
use crate::spd::{unvech, vech, Spd, SpdPoint};
use crate::sphere::{Sphere, SpherePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainConfig {
    pub burn_in: usize,
    pub thin: usize,
    /// Proposal step multiplier `t`.
    pub step: StepScale,
    pub seed: u64,
    /// Accept with the bare density ratio, ignoring any proposal asymmetry.
    pub plain_ratio: bool,
}

/// Step multiplier in `(0, 1]`, stored as its bit pattern so configs stay `Eq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepScale(u64);

impl StepScale {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::config(format!("step scale {t} not in (0, 1]")));
        }
        Ok(StepScale(t.to_bits()))
    }

    pub fn get(self) -> f64 {
        f64::from_bits(self.0)
    }
}

impl ChainConfig {
    pub fn new(burn_in: usize, thin: usize, step: f64, seed: u64) -> Result<Self> {
        if thin == 0 {
            return Err(Error::config("thinning interval must be positive"));
        }
        Ok(ChainConfig { burn_in, thin, step: StepScale::new(step)?, seed, plain_ratio: false })
    }

    pub fn sphere_default(seed: u64) -> Self {
        ChainConfig { burn_in: 20_000, thin: 600, step: StepScale(0.5f64.to_bits()), seed, plain_ratio: false }
    }

    pub fn spd_default(seed: u64) -> Self {
        ChainConfig { burn_in: 5_000, thin: 5_000, step: StepScale(1.0f64.to_bits()), seed, plain_ratio: false }
    }

    pub fn kendall_default(seed: u64) -> Self {
        ChainConfig { burn_in: 7_500, thin: 500, step: StepScale(0.01f64.to_bits()), seed, plain_ratio: false }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        ChainConfig { seed, ..self }
    }

    pub fn with_plain_ratio(self, plain_ratio: bool) -> Self {
        ChainConfig { plain_ratio, ..self }
    }

    pub fn t(&self) -> f64 {
        self.step.get()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainDiagnostics {
    pub proposals: u64,
    pub accepted: u64,
    pub longest_rejection_run: u64,
    pub warning: Option<String>,
}

impl ChainDiagnostics {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

/// A proposal kernel `x -> x'`.
pub trait Proposal<M: Manifold>: Send + Sync {
    fn propose(&self, manifold: &M, x: &M::Point, rng: &mut ChaCha8Rng) -> Result<M::Point>;

    /// `ln q(x | y) - ln q(y | x)` with proposal densities taken against the
    /// Riemannian volume; `-inf` when `y -> x` cannot be proposed. Zero for
    /// symmetric kernels.
    fn log_reverse_ratio(&self, _manifold: &M, _x: &M::Point, _y: &M::Point) -> Result<f64> {
        Ok(0.0)
    }
}

/// Runs a Metropolis chain from `start` targeting `exp(-neg_log_density)`,
/// accepting with probability `min(1, exp(current - proposed) * r)` where `r`
/// is the kernel's reverse-move ratio (taken as 1 when `plain_ratio`). States with
/// infinite negative log density are never entered. After `burn_in` steps,
/// every `thin`-th state is emitted until `count` states are collected.
pub fn sample_mh<M, F, K>(
    manifold: &M,
    neg_log_density: F,
    start: M::Point,
    kernel: &K,
    cfg: &ChainConfig,
    count: usize,
) -> Result<(Vec<M::Point>, ChainDiagnostics)>
where
    M: Manifold,
    F: Fn(&M::Point) -> Result<f64>,
    K: Proposal<M>,
{
    if cfg.thin == 0 {
        return Err(Error::config("thinning interval must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = start;
    let mut energy = neg_log_density(&current)?;
    if !energy.is_finite() {
        return Err(Error::domain("sample_mh", "chain starts outside the support"));
    }
    let mut diag = ChainDiagnostics::default();
    let mut run = 0u64;
    let mut out = Vec::with_capacity(count);
    let total = cfg.burn_in + count * cfg.thin;
    for step in 1..=total {
        let proposal = kernel.propose(manifold, &current, &mut rng)?;
        let e = neg_log_density(&proposal)?;
        let u: f64 = rng.random();
        diag.proposals += 1;
        let mut log_ratio = energy - e;
        if e.is_finite() && !cfg.plain_ratio {
            log_ratio += kernel.log_reverse_ratio(manifold, &current, &proposal)?;
        }
        if e.is_finite() && (log_ratio >= 0.0 || u < log_ratio.exp()) {
            current = proposal;
            energy = e;
            diag.accepted += 1;
            run = 0;
        } else {
            run += 1;
            diag.longest_rejection_run = diag.longest_rejection_run.max(run);
        }
        if step > cfg.burn_in && (step - cfg.burn_in) % cfg.thin == 0 {
            out.push(current.clone());
        }
    }
    if diag.longest_rejection_run >= 10 * cfg.thin as u64 {
        diag.warning = Some(format!(
            "{} consecutive rejections (thin = {})",
            diag.longest_rejection_run, cfg.thin
        ));
    }
    Ok((out, diag))
}

/// Sphere random walk: a Gaussian ambient vector rescaled to length `sigma`,
/// projected onto the tangent space, then `x' = exp(x, t w)`.
#[derive(Debug, Clone, Copy)]
pub struct SphereKernel {
    pub sigma: f64,
    pub t: f64,
}

impl Proposal<Sphere> for SphereKernel {
    fn propose(&self, m: &Sphere, x: &SpherePoint, rng: &mut ChaCha8Rng) -> Result<SpherePoint> {
        let g = m.random_ambient(rng);
        let g = &g * (self.sigma / g.norm());
        let w = m.project_tangent(x, &g);
        m.exp_map(x, &w.scaled(self.t))
    }
}

/// SPD random walk: `unvech` of independent `U[-1/2, 1/2]` entries, then
/// `x' = exp(x, t sigma v)`.
#[derive(Debug, Clone, Copy)]
pub struct SpdKernel {
    pub sigma: f64,
    pub t: f64,
}

impl Proposal<Spd> for SpdKernel {
    fn propose(&self, m: &Spd, x: &SpdPoint, rng: &mut ChaCha8Rng) -> Result<SpdPoint> {
        let k = m.k();
        let u = DVector::from_fn(k * (k + 1) / 2, |_, _| rng.random::<f64>() - 0.5);
        let v: DMatrix<f64> = unvech(&u)? * (self.t * self.sigma);
        m.exp_map(x, &Tangent::new_unchecked(x.clone(), v))
    }

    /// The box draw is uniform in `vech` coordinates, which is not uniform
    /// for the affine-invariant volume. Against that volume the reverse move
    /// is favoured by `(det y / det x)^((k+1)/2)`, provided `log(y, x)` also
    /// lands in the box.
    fn log_reverse_ratio(&self, m: &Spd, x: &SpdPoint, y: &SpdPoint) -> Result<f64> {
        let back = vech(&m.log_map(y, x)?.vector);
        if back.amax() > 0.5 * self.t * self.sigma {
            return Ok(f64::NEG_INFINITY);
        }
        let ld = |p: &SpdPoint| p.matrix().clone().cholesky().map(|c| 2.0 * c.l().diagonal().map(f64::ln).sum());
        match (ld(x), ld(y)) {
            (Some(lx), Some(ly)) => Ok(0.5 * (m.k() + 1) as f64 * (ly - lx)),
            _ => Err(Error::Conditioning { min_eigenvalue: 0.0 }),
        }
    }
}

/// Shape-space random walk: `U(0, 1)` real and imaginary parts, made
/// horizontal at `x`, then `x' = exp(x, t v)`. The noise scale does not enter.
#[derive(Debug, Clone, Copy)]
pub struct KendallKernel {
    pub t: f64,
}

impl Proposal<Kendall> for KendallKernel {
    fn propose(&self, m: &Kendall, x: &Preshape, rng: &mut ChaCha8Rng) -> Result<Preshape> {
        let v = CVector::from_fn(m.k(), |_, _| Complex64::new(rng.random(), rng.random()));
        let h = m.make_horizontal(x, &v);
        m.exp_map(x, &h.scaled(self.t))
    }
}

/// Independence proposal drawing area-uniformly from a cap of `S^2_1`.
/// It is exactly symmetric, so plain Metropolis acceptance is exact.
#[derive(Debug, Clone)]
pub struct SphereCapUniform {
    center: DVector<f64>,
    e1: DVector<f64>,
    e2: DVector<f64>,
    cos_r: f64,
}

impl SphereCapUniform {
    pub fn new(sphere: &Sphere, center: &SpherePoint, radius: f64) -> Result<Self> {
        if sphere.dim() != 2 || sphere.kappa() != 1.0 {
            return Err(Error::config("cap sampler is defined on S^2_1 only"));
        }
        sphere.check_point(center)?;
        let c = center.coords().clone();
        // any axis not parallel to c
        let i = c.iamin();
        let mut a = DVector::zeros(3);
        a[i] = 1.0;
        let e1 = &a - &c * c.dot(&a);
        let e1 = &e1 / e1.norm();
        let e2 = c.cross(&e1);
        Ok(SphereCapUniform { center: c, e1, e2, cos_r: radius.cos() })
    }
}

impl Proposal<Sphere> for SphereCapUniform {
    fn propose(&self, _m: &Sphere, _x: &SpherePoint, rng: &mut ChaCha8Rng) -> Result<SpherePoint> {
        let z = self.cos_r + (1.0 - self.cos_r) * rng.random::<f64>();
        let phi = std::f64::consts::TAU * rng.random::<f64>();
        let s = (1.0 - z * z).max(0.0).sqrt();
        let y = &self.center * z + &self.e1 * (s * phi.cos()) + &self.e2 * (s * phi.sin());
        Ok(SpherePoint::new_unchecked(&y / y.norm()))
    }
}

/// Manifolds with a default random-walk kernel.
pub trait KernelFamily: Manifold + Sized {
    type Kernel: Proposal<Self>;
    fn default_kernel(&self, sigma: f64, t: f64) -> Self::Kernel;
}

impl KernelFamily for Sphere {
    type Kernel = SphereKernel;
    fn default_kernel(&self, sigma: f64, t: f64) -> SphereKernel {
        SphereKernel { sigma, t }
    }
}

impl KernelFamily for Spd {
    type Kernel = SpdKernel;
    fn default_kernel(&self, sigma: f64, t: f64) -> SpdKernel {
        SpdKernel { sigma, t }
    }
}

impl KernelFamily for Kendall {
    type Kernel = KendallKernel;
    fn default_kernel(&self, _sigma: f64, t: f64) -> KendallKernel {
        KendallKernel { t }
    }
}
