//! Kendall's shape space of `k` labelled planar landmarks.
//!
//! Configurations are complex `k`-vectors. A preshape is a centered,
//! unit-norm configuration; two preshapes are the same shape when they differ
//! by a rotation `e^{i theta}`. Geometry is computed on preshapes with the
//! rotation quotiented out by [`Kendall::align`] and horizontal projection.
//!
//! Throughout, `<a, b> = sum_j a_j conj(b_j)`.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldDescriptor, Tangent, MEMBERSHIP_TOL};

/// Upper sectional-curvature bound (holomorphic curvature of `CP^{k-2}`).
pub const KENDALL_KAPPA_MAX: f64 = 4.0;
/// Lower sectional-curvature bound.
pub const KENDALL_KAPPA_MIN: f64 = 1.0;

/// Below this modulus of `<p, q>` the optimal rotation is undefined.
const ALIGN_TOL: f64 = 1e-12;

const SMALL_ANGLE: f64 = 1e-6;

pub type CVector = DVector<Complex64>;

/// A centered, unit-norm landmark configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Preshape(CVector);

impl Preshape {
    pub fn landmarks(&self) -> &CVector {
        &self.0
    }

    pub fn into_landmarks(self) -> CVector {
        self.0
    }

    pub fn new_unchecked(v: CVector) -> Self {
        Preshape(v)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// `e^{i alpha} p`
    pub fn rotated(&self, alpha: f64) -> Preshape {
        let r = Complex64::from_polar(1.0, alpha);
        Preshape(self.0.map(|z| z * r))
    }

    /// Interleaved `x1, y1, ..., xk, yk`.
    pub fn to_xy(&self) -> Vec<f64> {
        to_xy(&self.0)
    }
}

pub type HorizontalTangent = Tangent<Kendall>;

/// `<a, b> = sum_j a_j conj(b_j)`
pub fn hermitian(a: &CVector, b: &CVector) -> Complex64 {
    b.dotc(a)
}

fn norm(a: &CVector) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn centered(a: &CVector) -> CVector {
    let mean = a.sum() / a.len() as f64;
    a.map(|z| z - mean)
}

/// Builds a complex configuration from interleaved `x1, y1, ..., xk, yk`.
pub fn from_xy(xy: &[f64]) -> Result<CVector> {
    if xy.len() % 2 != 0 {
        return Err(Error::domain("from_xy", format!("odd coordinate count {}", xy.len())));
    }
    Ok(CVector::from_iterator(
        xy.len() / 2,
        xy.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])),
    ))
}

pub fn to_xy(v: &CVector) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kendall {
    k: usize,
}

impl Kendall {
    pub fn new(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::config(format!("shape space needs at least 3 landmarks, got {k}")));
        }
        Ok(Kendall { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.k {
            return Err(Error::ContractViolation(format!(
                "{what} has {len} landmarks, expected {}",
                self.k
            )));
        }
        Ok(())
    }

    /// Removes translation and scale: `x -> (x - mean) / |x - mean|`.
    pub fn to_preshape(&self, config: &CVector) -> Result<Preshape> {
        self.check_len(config.len(), "configuration")?;
        let c = centered(config);
        let n = norm(&c);
        if !(n > MEMBERSHIP_TOL) {
            return Err(Error::domain("to_preshape", "configuration collapses to a single point"));
        }
        Ok(Preshape(c / Complex64::new(n, 0.0)))
    }

    /// Rotates `q` to `e^{i theta} q` so that `<p, e^{i theta} q>` is real and
    /// nonnegative. Returns the rotated preshape and `theta` in `[0, 2 pi)`.
    pub fn align(&self, p: &Preshape, q: &Preshape) -> Result<(Preshape, f64)> {
        self.check_len(p.k(), "point")?;
        self.check_len(q.k(), "point")?;
        let z = hermitian(&p.0, &q.0);
        let m = z.norm();
        if !(m >= ALIGN_TOL) {
            return Err(Error::AlignmentUndefined { modulus: m });
        }
        let mut theta = z.arg().rem_euclid(TAU);
        if theta >= TAU {
            theta = 0.0;
        }
        let phase = z / m;
        Ok((Preshape(q.0.map(|w| w * phase)), theta))
    }

    /// Shape distance `arccos |<x, y>|`, evaluated as `atan2(|y~ - |z| x|, |z|)`
    /// on the aligned `y~` for accuracy at small distances.
    pub fn shape_distance(&self, x: &Preshape, y: &Preshape) -> Result<f64> {
        self.check_len(x.k(), "point")?;
        self.check_len(y.k(), "point")?;
        let (_, w, m) = residual(x, y);
        Ok(norm(&w).atan2(m))
    }

    /// Centers `w` and removes its component along `x` and `i x`.
    pub fn make_horizontal(&self, x: &Preshape, w: &CVector) -> HorizontalTangent {
        let wc = centered(w);
        let c = hermitian(&wc, &x.0);
        let u = &wc - x.0.map(|xi| xi * c);
        Tangent::new_unchecked(x.clone(), u)
    }
}

/// For preshapes `x, y`: the phase `z / |z|` of `z = <x, y>`, the residual
/// `e^{i arg z} y - |z| x` and `|z|`. With `z = 0` the phase is taken as 1.
fn residual(x: &Preshape, y: &Preshape) -> (Complex64, CVector, f64) {
    let z = hermitian(&x.0, &y.0);
    let m = z.norm();
    let phase = if m > 0.0 { z / m } else { Complex64::new(1.0, 0.0) };
    let w = CVector::from_iterator(
        x.0.len(),
        x.0.iter().zip(y.0.iter()).map(|(xi, yi)| yi * phase - xi * m),
    );
    (phase, w, m)
}

fn theta_over_sin(theta: f64, sin_theta: f64) -> f64 {
    if theta < SMALL_ANGLE {
        1.0 + theta * theta / 6.0
    } else {
        theta / sin_theta
    }
}

impl Manifold for Kendall {
    type Point = Preshape;
    type Vector = CVector;

    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor {
            dimension: 2 * self.k - 4,
            ambient_dimension: 2 * self.k,
            kappa_max: KENDALL_KAPPA_MAX,
            kappa_min: KENDALL_KAPPA_MIN,
            injectivity_radius: FRAC_PI_2,
        }
    }

    fn name(&self) -> &'static str {
        "kendall"
    }

    fn check_point(&self, p: &Preshape) -> Result<()> {
        self.check_len(p.k(), "point")?;
        let mean = (p.0.sum() / self.k as f64).norm();
        if !(mean <= MEMBERSHIP_TOL) {
            return Err(Error::Membership {
                space: "preshape",
                reason: format!("centroid at distance {mean:e}"),
            });
        }
        let gap = (norm(&p.0) - 1.0).abs();
        if !(gap <= MEMBERSHIP_TOL) {
            return Err(Error::Membership {
                space: "preshape",
                reason: format!("norm differs from 1 by {gap:e}"),
            });
        }
        Ok(())
    }

    fn check_tangent(&self, v: &HorizontalTangent) -> Result<()> {
        self.check_point(&v.base)?;
        self.check_len(v.vector.len(), "tangent")?;
        let sum = v.vector.sum().norm();
        if !(sum <= MEMBERSHIP_TOL) {
            return Err(Error::Membership {
                space: "horizontal space",
                reason: format!("landmark sum {sum:e}"),
            });
        }
        let c = hermitian(&v.vector, &v.base.0).norm();
        if !(c <= MEMBERSHIP_TOL) {
            return Err(Error::Membership {
                space: "horizontal space",
                reason: format!("|<v, x>| = {c:e}"),
            });
        }
        Ok(())
    }

    fn point_gap(&self, p: &Preshape, q: &Preshape) -> f64 {
        if p.k() != q.k() {
            return f64::INFINITY;
        }
        p.0.iter()
            .zip(q.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a.re - b.re).abs()).max((a.im - b.im).abs()))
    }

    fn exp_map(&self, x: &Preshape, v: &HorizontalTangent) -> Result<Preshape> {
        self.ensure_base(x, v)?;
        self.check_len(v.vector.len(), "tangent")?;
        let s = norm(&v.vector);
        if s < 1e-14 {
            return Ok(x.clone());
        }
        let (sn, cs) = s.sin_cos();
        let y = x.0.map(|z| z * cs) + v.vector.map(|z| z * (sn / s));
        // Recentre and renormalize against drift over long chains.
        let y = centered(&y);
        let n = norm(&y);
        Ok(Preshape(y / Complex64::new(n, 0.0)))
    }

    fn log_map(&self, x: &Preshape, y: &Preshape) -> Result<HorizontalTangent> {
        self.check_len(x.k(), "point")?;
        self.check_len(y.k(), "point")?;
        let (_, w, m) = residual(x, y);
        if !(m >= ALIGN_TOL) {
            return Err(Error::domain(
                "kendall log_map",
                "shapes are at the maximal distance pi/2",
            ));
        }
        let s = norm(&w);
        let theta = s.atan2(m);
        let f = theta_over_sin(theta, s);
        Ok(Tangent::new_unchecked(x.clone(), w.map(|z| z * f)))
    }

    fn distance(&self, x: &Preshape, y: &Preshape) -> Result<f64> {
        self.shape_distance(x, y)
    }

    fn inner(&self, x: &Preshape, u: &HorizontalTangent, v: &HorizontalTangent) -> Result<f64> {
        self.ensure_base(x, u)?;
        self.ensure_base(x, v)?;
        Ok(hermitian(&u.vector, &v.vector).re)
    }

    fn norm_at(&self, x: &Preshape, v: &HorizontalTangent) -> Result<f64> {
        self.ensure_base(x, v)?;
        Ok(norm(&v.vector))
    }

    fn project_tangent(&self, x: &Preshape, w: &CVector) -> HorizontalTangent {
        self.make_horizontal(x, w)
    }

    fn random_ambient<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        CVector::from_fn(self.k, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    fn zero_tangent(&self, x: &Preshape) -> HorizontalTangent {
        Tangent::new_unchecked(x.clone(), CVector::from_element(self.k, Complex64::new(0.0, 0.0)))
    }

    fn mean_log(&self, x: &Preshape, points: &[Preshape]) -> Result<HorizontalTangent> {
        if points.is_empty() {
            return Err(Error::domain("mean_log", "empty point set"));
        }
        self.check_len(x.k(), "point")?;
        // sum_i f_i (phase_i y_i - m_i x)
        let mut acc = CVector::from_element(self.k, Complex64::new(0.0, 0.0));
        let mut along = 0.0;
        for y in points {
            self.check_len(y.k(), "point")?;
            let z = hermitian(&x.0, &y.0);
            let m = z.norm();
            if !(m >= ALIGN_TOL) {
                return Err(Error::domain(
                    "kendall log_map",
                    "shapes are at the maximal distance pi/2",
                ));
            }
            let phase = z / m;
            let mut s2 = 0.0;
            for (xi, yi) in x.0.iter().zip(y.0.iter()) {
                s2 += (yi * phase - xi * m).norm_sqr();
            }
            let s = s2.sqrt();
            let f = theta_over_sin(s.atan2(m), s);
            let c = phase * f;
            acc.zip_apply(&y.0, |a, yi| *a += yi * c);
            along += f * m;
        }
        let inv = 1.0 / points.len() as f64;
        let v = CVector::from_iterator(
            self.k,
            acc.iter().zip(x.0.iter()).map(|(a, xi)| (a - xi * along) * inv),
        );
        Ok(Tangent::new_unchecked(x.clone(), v))
    }
}
