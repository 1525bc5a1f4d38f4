//! Curvature functions, sensitivities and noise scales.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::manifold::ManifoldDescriptor;

/// `x cot x` and `x coth x` are evaluated as 1 below this argument.
const TINY: f64 = 1e-8;

/// `s sqrt(kappa) cot(s sqrt(kappa))` for `kappa > 0`, else 1.
pub fn h_max(s: f64, kappa: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::domain("h_max", format!("negative radius {s}")));
    }
    if kappa <= 0.0 {
        return Ok(1.0);
    }
    let x = s * kappa.sqrt();
    if x >= PI {
        return Err(Error::domain("h_max", format!("s sqrt(kappa) = {x} is not below pi")));
    }
    if x < TINY {
        return Ok(1.0);
    }
    let (sn, cs) = x.sin_cos();
    Ok(x * cs / sn)
}

/// `s sqrt|kappa| coth(s sqrt|kappa|)` for `kappa < 0`, else 1.
pub fn h_min(s: f64, kappa: f64) -> f64 {
    if kappa >= 0.0 {
        return 1.0;
    }
    let x = s * (-kappa).sqrt();
    if x < TINY {
        return 1.0;
    }
    x / x.tanh()
}

/// Inputs to the calibration: privacy budget, ball radius, sample size and
/// curvature bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub r: f64,
    pub n: usize,
    pub kappa_max: f64,
    pub kappa_min: f64,
}

impl PrivacyParams {
    /// Validates against the ball-radius bound of `descriptor`.
    pub fn new(epsilon: f64, r: f64, n: usize, descriptor: &ManifoldDescriptor) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::config(format!("epsilon must be positive, got {epsilon}")));
        }
        if n == 0 {
            return Err(Error::config("sample size must be positive"));
        }
        let limit = descriptor.max_ball_radius();
        if !(r > 0.0 && r < limit) {
            return Err(Error::config(format!("radius {r} must lie in (0, {limit})")));
        }
        Ok(PrivacyParams {
            epsilon,
            r,
            n,
            kappa_max: descriptor.kappa_max,
            kappa_min: descriptor.kappa_min,
        })
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        PrivacyParams { epsilon, ..self }
    }

    /// `h_max(2r, kappa_max)`
    pub fn h(&self) -> Result<f64> {
        h_max(2.0 * self.r, self.kappa_max)
    }
}

/// KNG sensitivity `2r (2 - h_max(2r, kappa_max)) / n`.
pub fn sensitivity(p: &PrivacyParams) -> Result<f64> {
    Ok(2.0 * p.r * (2.0 - p.h()?) / p.n as f64)
}

/// KNG scale `sigma = 2 sensitivity / epsilon`.
pub fn scale_sigma(p: &PrivacyParams) -> Result<f64> {
    Ok(2.0 * sensitivity(p)? / p.epsilon)
}

/// Sensitivity of the Fréchet mean in geodesic distance:
/// the KNG sensitivity divided by `h_max(2r, kappa_max)`.
pub fn laplace_sensitivity(p: &PrivacyParams) -> Result<f64> {
    Ok(sensitivity(p)? / p.h()?)
}

pub fn laplace_sigma(p: &PrivacyParams) -> Result<f64> {
    Ok(2.0 * laplace_sensitivity(p)? / p.epsilon)
}

/// Sensitivity of the mean in the ambient embedding when the data ball fits
/// in a Euclidean ball of radius `ambient_radius`: the geodesic bound with
/// `r` replaced by `ambient_radius`.
pub fn euclidean_sensitivity(p: &PrivacyParams, ambient_radius: f64) -> Result<f64> {
    let h = p.h()?;
    Ok(2.0 * ambient_radius * (2.0 - h) / (p.n as f64 * h))
}

pub fn euclidean_sigma(p: &PrivacyParams, ambient_radius: f64) -> Result<f64> {
    Ok(2.0 * euclidean_sensitivity(p, ambient_radius)? / p.epsilon)
}
