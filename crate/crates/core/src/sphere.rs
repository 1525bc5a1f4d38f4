//! The round sphere `S^d_kappa` of radius `kappa^(-1/2)` embedded in `R^(d+1)`.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldDescriptor, Tangent, MEMBERSHIP_TOL};

/// Below this angle `theta / sin(theta)` is evaluated by its series.
const SMALL_ANGLE: f64 = 1e-6;

/// A point of the sphere, stored as its ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(DVector<f64>);

impl SpherePoint {
    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.0
    }

    /// Wraps coordinates without checking the norm.
    pub fn new_unchecked(coords: DVector<f64>) -> Self {
        SpherePoint(coords)
    }
}

pub type SphereTangent = Tangent<Sphere>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    dim: usize,
    kappa: f64,
}

/// `theta / sin(theta)` with a series near zero.
fn theta_over_sin(theta: f64, sin_theta: f64) -> f64 {
    if theta < SMALL_ANGLE {
        1.0 + theta * theta / 6.0
    } else {
        theta / sin_theta
    }
}

impl Sphere {
    pub fn new(dim: usize, kappa: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("sphere dimension must be positive"));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::config(format!("sphere curvature must be positive, got {kappa}")));
        }
        Ok(Sphere { dim, kappa })
    }

    /// The unit sphere `S^dim_1`.
    pub fn unit(dim: usize) -> Self {
        Sphere { dim: dim.max(1), kappa: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Ambient radius `kappa^(-1/2)`.
    pub fn radius(&self) -> f64 {
        1.0 / self.kappa.sqrt()
    }

    /// Validates and wraps ambient coordinates.
    pub fn point(&self, coords: DVector<f64>) -> Result<SpherePoint> {
        let p = SpherePoint(coords);
        self.check_point(&p)?;
        Ok(p)
    }

    /// Rescales a nonzero ambient vector onto the sphere.
    pub fn normalize(&self, y: &DVector<f64>) -> Result<SpherePoint> {
        if y.len() != self.dim + 1 {
            return Err(Error::ContractViolation(format!(
                "expected {} ambient coordinates, got {}",
                self.dim + 1,
                y.len()
            )));
        }
        let n = y.norm();
        if !(n > MEMBERSHIP_TOL) {
            return Err(Error::domain("normalize", format!("vector norm {n:e} is too small")));
        }
        Ok(SpherePoint(y * (self.radius() / n)))
    }

    /// The "north pole" `(0, ..., 0, kappa^(-1/2))`.
    pub fn north_pole(&self) -> SpherePoint {
        let mut c = DVector::zeros(self.dim + 1);
        c[self.dim] = self.radius();
        SpherePoint(c)
    }

    fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.dim + 1 {
            return Err(Error::ContractViolation(format!(
                "{what} has {len} coordinates, S^{} needs {}",
                self.dim,
                self.dim + 1
            )));
        }
        Ok(())
    }

    /// Central angle `theta = rho * sqrt(kappa)` between two points, computed
    /// as `atan2(|q - <q,p>p|, <q,p>)` on the unit-radius rescaling.
    fn angle(&self, p: &DVector<f64>, q: &DVector<f64>) -> f64 {
        let c = self.kappa * p.dot(q);
        let w = q - p * c;
        let s = w.norm() * self.kappa.sqrt();
        s.atan2(c)
    }

    /// Samples `count` points with polar angle uniform on `[0, r]` from the
    /// north pole and azimuth uniform on `[0, 2 pi)`.
    ///
    /// Only defined on `S^2_1`. The points concentrate near the pole; this is
    /// not the area-uniform distribution on the cap.
    pub fn sample_ball_uniform_polar<R: Rng + ?Sized>(
        &self,
        r: f64,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<SpherePoint>> {
        if self.dim != 2 || self.kappa != 1.0 {
            return Err(Error::config("polar ball sampler is defined on S^2_1 only"));
        }
        if !(0.0..=PI / 4.0).contains(&r) {
            return Err(Error::domain("sample_ball_uniform_polar", format!("radius {r} outside [0, pi/4]")));
        }
        Ok((0..count)
            .map(|_| {
                let theta = rng.random::<f64>() * r;
                let phi = rng.random::<f64>() * TAU;
                polar_point(theta, phi)
            })
            .collect())
    }
}

/// The point of `S^2_1` at polar angle `theta` (from the north pole) and azimuth `phi`.
pub fn polar_point(theta: f64, phi: f64) -> SpherePoint {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    SpherePoint(DVector::from_vec(vec![st * cp, st * sp, ct]))
}

impl Manifold for Sphere {
    type Point = SpherePoint;
    type Vector = DVector<f64>;

    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor {
            dimension: self.dim,
            ambient_dimension: self.dim + 1,
            kappa_max: self.kappa,
            kappa_min: self.kappa,
            injectivity_radius: PI / self.kappa.sqrt(),
        }
    }

    fn name(&self) -> &'static str {
        "sphere"
    }

    fn check_point(&self, p: &SpherePoint) -> Result<()> {
        self.check_len(p.0.len(), "point")?;
        let gap = (p.0.norm() - self.radius()).abs();
        if !(gap <= MEMBERSHIP_TOL) {
            return Err(Error::Membership {
                space: "sphere",
                reason: format!("norm differs from kappa^(-1/2) by {gap:e}"),
            });
        }
        Ok(())
    }

    fn check_tangent(&self, v: &SphereTangent) -> Result<()> {
        self.check_point(&v.base)?;
        self.check_len(v.vector.len(), "tangent")?;
        let dot = (v.vector.dot(&v.base.0) * self.kappa.sqrt()).abs();
        if !(dot <= MEMBERSHIP_TOL) {
            return Err(Error::Membership {
                space: "sphere tangent space",
                reason: format!("<v, p> = {dot:e}"),
            });
        }
        Ok(())
    }

    fn point_gap(&self, p: &SpherePoint, q: &SpherePoint) -> f64 {
        if p.0.len() != q.0.len() {
            return f64::INFINITY;
        }
        (&p.0 - &q.0).amax()
    }

    fn exp_map(&self, p: &SpherePoint, v: &SphereTangent) -> Result<SpherePoint> {
        self.ensure_base(p, v)?;
        let len = v.vector.norm();
        if len < 1e-14 {
            return Ok(p.clone());
        }
        let sk = self.kappa.sqrt();
        let (s, c) = (len * sk).sin_cos();
        let mut out = &p.0 * c + &v.vector * (s / (sk * len));
        // Keep the iterate on the sphere over long chains.
        let n = out.norm();
        out *= self.radius() / n;
        Ok(SpherePoint(out))
    }

    fn log_map(&self, p: &SpherePoint, q: &SpherePoint) -> Result<SphereTangent> {
        self.check_len(q.0.len(), "point")?;
        let c = self.kappa * p.0.dot(&q.0);
        let w = &q.0 - &p.0 * c;
        let s = w.norm() * self.kappa.sqrt();
        let theta = s.atan2(c);
        if PI - theta < 1e-12 {
            return Err(Error::domain(
                "sphere log_map",
                format!("distance {} reaches the cut locus", theta / self.kappa.sqrt()),
            ));
        }
        let scale = theta_over_sin(theta, s);
        Ok(Tangent::new_unchecked(p.clone(), w * scale))
    }

    fn distance(&self, p: &SpherePoint, q: &SpherePoint) -> Result<f64> {
        self.check_len(p.0.len(), "point")?;
        self.check_len(q.0.len(), "point")?;
        Ok(self.angle(&p.0, &q.0) / self.kappa.sqrt())
    }

    fn inner(&self, p: &SpherePoint, u: &SphereTangent, v: &SphereTangent) -> Result<f64> {
        self.ensure_base(p, u)?;
        self.ensure_base(p, v)?;
        Ok(u.vector.dot(&v.vector))
    }

    fn norm_at(&self, p: &SpherePoint, v: &SphereTangent) -> Result<f64> {
        self.ensure_base(p, v)?;
        Ok(v.vector.norm())
    }

    fn project_tangent(&self, p: &SpherePoint, w: &DVector<f64>) -> SphereTangent {
        let c = self.kappa * w.dot(&p.0);
        Tangent::new_unchecked(p.clone(), w - &p.0 * c)
    }

    fn random_ambient<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(self.dim + 1, |_, _| rng.sample(StandardNormal))
    }

    fn zero_tangent(&self, p: &SpherePoint) -> SphereTangent {
        Tangent::new_unchecked(p.clone(), DVector::zeros(self.dim + 1))
    }

    fn mean_log(&self, x: &SpherePoint, points: &[SpherePoint]) -> Result<SphereTangent> {
        if points.is_empty() {
            return Err(Error::domain("mean_log", "empty point set"));
        }
        let sk = self.kappa.sqrt();
        let mut acc = DVector::zeros(self.dim + 1);
        let mut along = 0.0;
        for q in points {
            self.check_len(q.0.len(), "point")?;
            let c = self.kappa * x.0.dot(&q.0);
            // |q - c x|^2 = R^2 - c^2 R^2 in exact arithmetic; the direct
            // residual is used for accuracy near x.
            let mut s2 = 0.0;
            for (qi, xi) in q.0.iter().zip(x.0.iter()) {
                let d = qi - c * xi;
                s2 += d * d;
            }
            let s = s2.sqrt() * sk;
            let theta = s.atan2(c);
            if PI - theta < 1e-12 {
                return Err(Error::domain(
                    "sphere log_map",
                    format!("distance {} reaches the cut locus", theta / sk),
                ));
            }
            let f = theta_over_sin(theta, s);
            acc.axpy(f, &q.0, 1.0);
            along += f * c;
        }
        acc.axpy(-along, &x.0, 1.0);
        acc /= points.len() as f64;
        Ok(Tangent::new_unchecked(x.clone(), acc))
    }
}
