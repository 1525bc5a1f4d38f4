//! Euclidean Laplace noise and the sphere projection used by the ambient baseline.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};

use crate::error::{Error, Result};
use crate::sphere::{Sphere, SpherePoint};

/// `center + R sigma V` with `R ~ Gamma(d, 1)` and `V` uniform on the unit
/// sphere of `R^d`, `d = center.len()`. The density is proportional to
/// `exp(-|y - center| / sigma)`.
pub fn sample_euclidean_laplace<R: Rng + ?Sized>(
    center: &DVector<f64>,
    sigma: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let d = center.len();
    if d == 0 {
        return Err(Error::domain("euclidean_laplace", "zero dimension"));
    }
    if !(sigma >= 0.0) {
        return Err(Error::domain("euclidean_laplace", format!("scale {sigma} must be nonnegative")));
    }
    let radius = Gamma::new(d as f64, 1.0)
        .map_err(|e| Error::domain("euclidean_laplace", e.to_string()))?
        .sample(rng);
    let dir = loop {
        let g = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = g.norm();
        if n > 1e-300 {
            break g / n;
        }
    };
    Ok(center + dir * (radius * sigma))
}

/// Scalar Laplace draw with scale `b`, by inverting the CDF.
pub fn sample_scalar_laplace<R: Rng + ?Sized>(b: f64, rng: &mut R) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let u = 0.5 - rng.sample::<f64, _>(Open01);
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Normalizes an ambient vector onto the unit sphere.
pub fn project_to_sphere(y: &DVector<f64>) -> Result<SpherePoint> {
    if y.is_empty() {
        return Err(Error::domain("project_to_sphere", "empty vector"));
    }
    if !(y.norm() > 1e-12) {
        return Err(Error::domain("project_to_sphere", "vector too close to the origin"));
    }
    Sphere::unit(y.len() - 1).normalize(y)
}
