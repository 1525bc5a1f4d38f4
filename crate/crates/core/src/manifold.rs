//! The manifold contract shared by every geometry in the crate.
//!
//! A [`Manifold`] supplies the exponential and logarithm maps, the geodesic
//! distance, the Riemannian inner product and the metric projection of an
//! ambient vector onto a tangent space. Points are manifold-specific newtypes,
//! so mixing points of different geometries is a type error; mixing points of
//! different *instances* (say a 2-sphere and a 3-sphere) is caught at runtime
//! and reported as [`Error::ContractViolation`].

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Absolute tolerance on ambient coordinates for membership and tangency.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Tolerance used when checking that a dataset lies inside its ball.
pub const BALL_TOL: f64 = 1e-9;

/// Static geometric facts about a manifold instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldDescriptor {
    /// Intrinsic dimension.
    pub dimension: usize,
    /// Dimension of the ambient representation.
    pub ambient_dimension: usize,
    /// Upper bound on sectional curvature.
    pub kappa_max: f64,
    /// Lower bound on sectional curvature.
    pub kappa_min: f64,
    /// Injectivity radius, possibly `f64::INFINITY`.
    pub injectivity_radius: f64,
}

impl ManifoldDescriptor {
    pub fn new(
        dimension: usize,
        ambient_dimension: usize,
        kappa_max: f64,
        kappa_min: f64,
        injectivity_radius: f64,
    ) -> Result<Self> {
        if dimension == 0 || ambient_dimension == 0 {
            return Err(Error::config("manifold dimensions must be positive"));
        }
        if !(kappa_min <= kappa_max) {
            return Err(Error::config(format!(
                "kappa_min {kappa_min} exceeds kappa_max {kappa_max}"
            )));
        }
        if !(injectivity_radius > 0.0) {
            return Err(Error::config("injectivity radius must be positive"));
        }
        Ok(ManifoldDescriptor {
            dimension,
            ambient_dimension,
            kappa_max,
            kappa_min,
            injectivity_radius,
        })
    }

    /// Largest admissible ball radius (exclusive):
    /// `min{inj, (pi/2) kappa_max^(-1/2)} / 2`, with the curvature term read as
    /// `+inf` when `kappa_max <= 0`.
    pub fn max_ball_radius(&self) -> f64 {
        0.5 * self.injectivity_radius.min(curvature_radius_limit(self.kappa_max))
    }
}

/// `(pi/2) kappa^(-1/2)` for positive curvature, `+inf` otherwise.
pub fn curvature_radius_limit(kappa_max: f64) -> f64 {
    if kappa_max > 0.0 {
        FRAC_PI_2 / kappa_max.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Linear structure needed on ambient/tangent representations.
pub trait VectorSpace: Clone + fmt::Debug + Send + Sync {
    fn zeros_like(&self) -> Self;
    /// `self += alpha * other`
    fn add_scaled(&mut self, alpha: f64, other: &Self);
    fn scale_mut(&mut self, alpha: f64);
    /// Largest absolute coordinate.
    fn max_abs(&self) -> f64;

    fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.scale_mut(alpha);
        out
    }
}

impl VectorSpace for DVector<f64> {
    fn zeros_like(&self) -> Self {
        DVector::zeros(self.len())
    }
    fn add_scaled(&mut self, alpha: f64, other: &Self) {
        self.axpy(alpha, other, 1.0);
    }
    fn scale_mut(&mut self, alpha: f64) {
        *self *= alpha;
    }
    fn max_abs(&self) -> f64 {
        self.amax()
    }
}

impl VectorSpace for DMatrix<f64> {
    fn zeros_like(&self) -> Self {
        DMatrix::zeros(self.nrows(), self.ncols())
    }
    fn add_scaled(&mut self, alpha: f64, other: &Self) {
        self.zip_apply(other, |a, b| *a += alpha * b);
    }
    fn scale_mut(&mut self, alpha: f64) {
        *self *= alpha;
    }
    fn max_abs(&self) -> f64 {
        self.amax()
    }
}

impl VectorSpace for DVector<Complex64> {
    fn zeros_like(&self) -> Self {
        DVector::from_element(self.len(), Complex64::new(0.0, 0.0))
    }
    fn add_scaled(&mut self, alpha: f64, other: &Self) {
        self.zip_apply(other, |a, b| *a += b * alpha);
    }
    fn scale_mut(&mut self, alpha: f64) {
        self.apply(|a| *a *= alpha);
    }
    fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, z| m.max(z.re.abs()).max(z.im.abs()))
    }
}

/// A tangent vector together with the point it is anchored at.
pub struct Tangent<M: Manifold + ?Sized> {
    pub base: M::Point,
    pub vector: M::Vector,
}

impl<M: Manifold + ?Sized> Clone for Tangent<M> {
    fn clone(&self) -> Self {
        Tangent {
            base: self.base.clone(),
            vector: self.vector.clone(),
        }
    }
}

impl<M: Manifold + ?Sized> fmt::Debug for Tangent<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tangent")
            .field("base", &self.base)
            .field("vector", &self.vector)
            .finish()
    }
}

impl<M: Manifold + ?Sized> Tangent<M> {
    /// Anchors `vector` at `base` without any tangency check.
    pub fn new_unchecked(base: M::Point, vector: M::Vector) -> Self {
        Tangent { base, vector }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Tangent {
            base: self.base.clone(),
            vector: self.vector.scaled(alpha),
        }
    }
}

/// The five-operation geometry contract plus a few shared helpers.
pub trait Manifold: Send + Sync {
    type Point: Clone + fmt::Debug + PartialEq + Send + Sync;
    type Vector: VectorSpace;

    fn descriptor(&self) -> ManifoldDescriptor;

    /// Human-readable name used in error messages and output files.
    fn name(&self) -> &'static str;

    /// Checks the membership predicate.
    fn check_point(&self, p: &Self::Point) -> Result<()>;

    /// Checks that `v.vector` lies in the tangent space at `v.base`.
    fn check_tangent(&self, v: &Tangent<Self>) -> Result<()>;

    /// Largest absolute difference between the ambient coordinates of two points.
    fn point_gap(&self, p: &Self::Point, q: &Self::Point) -> f64;

    /// Endpoint of the geodesic leaving `p` with initial velocity `v`.
    fn exp_map(&self, p: &Self::Point, v: &Tangent<Self>) -> Result<Self::Point>;

    /// Inverse of [`Manifold::exp_map`]; `q` must be strictly inside the
    /// injectivity radius of `p`.
    fn log_map(&self, p: &Self::Point, q: &Self::Point) -> Result<Tangent<Self>>;

    fn distance(&self, p: &Self::Point, q: &Self::Point) -> Result<f64>;

    fn inner(&self, p: &Self::Point, u: &Tangent<Self>, v: &Tangent<Self>) -> Result<f64>;

    /// Metric-orthogonal projection of an ambient vector onto `T_p M`.
    fn project_tangent(&self, p: &Self::Point, w: &Self::Vector) -> Tangent<Self>;

    /// A standard Gaussian vector in the ambient representation.
    fn random_ambient<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Vector;

    fn norm_at(&self, p: &Self::Point, v: &Tangent<Self>) -> Result<f64> {
        Ok(self.inner(p, v, v)?.max(0.0).sqrt())
    }

    fn zero_tangent(&self, p: &Self::Point) -> Tangent<Self>;

    /// `(1/n) sum_i log_map(x, points[i])`: the tangent-space sample mean.
    fn mean_log(&self, x: &Self::Point, points: &[Self::Point]) -> Result<Tangent<Self>> {
        if points.is_empty() {
            return Err(Error::domain("mean_log", "empty point set"));
        }
        let mut acc: Option<Self::Vector> = None;
        for q in points {
            let v = self.log_map(x, q)?.vector;
            match acc.as_mut() {
                Some(a) => a.add_scaled(1.0, &v),
                None => acc = Some(v),
            }
        }
        let mut sum = acc.expect("non-empty");
        sum.scale_mut(1.0 / points.len() as f64);
        Ok(Tangent::new_unchecked(x.clone(), sum))
    }

    /// Riemannian norm of [`Manifold::mean_log`].
    fn mean_log_norm(&self, x: &Self::Point, points: &[Self::Point]) -> Result<f64> {
        let m = self.mean_log(x, points)?;
        self.norm_at(x, &m)
    }

    /// Rejects a tangent whose base is not `p`.
    fn ensure_base(&self, p: &Self::Point, v: &Tangent<Self>) -> Result<()> {
        let gap = self.point_gap(p, &v.base);
        if gap > MEMBERSHIP_TOL {
            return Err(Error::ContractViolation(format!(
                "tangent vector anchored {gap:e} away from the requested base point"
            )));
        }
        Ok(())
    }
}

/// A geodesic ball `B_r(center)` meeting the radius bound of
/// [`ManifoldDescriptor::max_ball_radius`].
pub struct GeodesicBall<M: Manifold + ?Sized> {
    pub center: M::Point,
    pub radius: f64,
}

impl<M: Manifold + ?Sized> Clone for GeodesicBall<M> {
    fn clone(&self) -> Self {
        GeodesicBall {
            center: self.center.clone(),
            radius: self.radius,
        }
    }
}

impl<M: Manifold + ?Sized> fmt::Debug for GeodesicBall<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeodesicBall")
            .field("center", &self.center)
            .field("radius", &self.radius)
            .finish()
    }
}

impl<M: Manifold + ?Sized> GeodesicBall<M> {
    pub fn new(manifold: &M, center: M::Point, radius: f64) -> Result<Self> {
        manifold.check_point(&center)?;
        let limit = manifold.descriptor().max_ball_radius();
        if !(radius > 0.0) || !(radius < limit) {
            return Err(Error::config(format!(
                "ball radius {radius} must lie in (0, {limit}) on {}",
                manifold.name()
            )));
        }
        Ok(GeodesicBall { center, radius })
    }

    /// Whether `p` lies in the closed ball, up to `tol`.
    pub fn contains(&self, manifold: &M, p: &M::Point, tol: f64) -> Result<bool> {
        Ok(manifold.distance(&self.center, p)? <= self.radius + tol)
    }
}

/// Draws a point `exp(center, s * u)` where `u` is a random unit tangent
/// direction and `s` is uniform on `[0, radius)`.
///
/// This is not volume-uniform; it is meant for test sweeps and probes.
pub fn random_point_in_ball<M: Manifold, R: Rng + ?Sized>(
    manifold: &M,
    ball: &GeodesicBall<M>,
    rng: &mut R,
) -> Result<M::Point> {
    loop {
        let w = manifold.random_ambient(rng);
        let t = manifold.project_tangent(&ball.center, &w);
        let len = manifold.norm_at(&ball.center, &t)?;
        if len < 1e-8 {
            continue;
        }
        let s = rng.random::<f64>() * ball.radius;
        let v = t.scaled(s / len);
        return manifold.exp_map(&ball.center, &v);
    }
}
