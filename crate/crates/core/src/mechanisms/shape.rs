//! Landmark-wise Laplace release for shapes, and curve smoothing.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kendall::{CVector, Kendall, Preshape};
use crate::mechanisms::laplace::sample_scalar_laplace;

/// Noise scale for one landmark coordinate with per-coordinate deviation
/// bound `r`: the budget `epsilon` is split evenly over `2k` coordinates,
/// each with sensitivity `2r / n`.
pub fn pointwise_sigma(r: f64, k: usize, n: usize, epsilon: f64) -> f64 {
    4.0 * r * k as f64 / (n as f64 * epsilon)
}

/// Adds independent scalar Laplace noise to every coordinate of `mean`.
///
/// For landmark `j`, the deviation bounds are the largest absolute real and
/// imaginary differences between `mean_j` and the data. With `align`, each
/// shape is first rotated onto `mean`; without it the raw preshapes are used.
pub fn pointwise_laplace<R: Rng + ?Sized>(
    ks: &Kendall,
    data: &[Preshape],
    mean: &Preshape,
    epsilon: f64,
    align: bool,
    rng: &mut R,
) -> Result<CVector> {
    if data.is_empty() {
        return Err(Error::domain("pointwise_laplace", "no shapes"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::config(format!("epsilon must be positive, got {epsilon}")));
    }
    let k = ks.k();
    let mut dev = vec![(0.0f64, 0.0f64); k];
    for x in data {
        let x = if align { ks.align(mean, x)?.0 } else { x.clone() };
        if x.k() != k {
            return Err(Error::ContractViolation(format!("shape with {} landmarks, expected {k}", x.k())));
        }
        for (d, (xi, mi)) in dev.iter_mut().zip(x.landmarks().iter().zip(mean.landmarks().iter())) {
            d.0 = d.0.max((xi.re - mi.re).abs());
            d.1 = d.1.max((xi.im - mi.im).abs());
        }
    }
    let n = data.len();
    Ok(CVector::from_iterator(
        k,
        mean.landmarks().iter().zip(dev.iter()).map(|(m, &(dx, dy))| {
            let nx = sample_scalar_laplace(pointwise_sigma(dx, k, n, epsilon), rng);
            let ny = sample_scalar_laplace(pointwise_sigma(dy, k, n, epsilon), rng);
            m + Complex64::new(nx, ny)
        }),
    ))
}

/// Whether landmark parameters wrap around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurveTopology {
    #[default]
    Closed,
    Open,
}

/// Local-linear regression of each coordinate on the curve parameter `j / k`
/// with a Gaussian kernel of the given bandwidth. On a closed curve parameter
/// differences are wrapped into `[-1/2, 1/2)`.
pub fn smooth_landmarks(c: &CVector, bandwidth: f64, topology: CurveTopology) -> Result<CVector> {
    if !(bandwidth > 0.0) {
        return Err(Error::domain("smooth_landmarks", format!("bandwidth {bandwidth} must be positive")));
    }
    let k = c.len();
    if k < 5 {
        return Err(Error::domain("smooth_landmarks", format!("need at least 5 landmarks, got {k}")));
    }
    let kf = k as f64;
    let out = (0..k).map(|j| {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        let (mut t0, mut t1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (i, y) in c.iter().enumerate() {
            let mut d = (i as f64 - j as f64) / kf;
            if topology == CurveTopology::Closed {
                d -= (d + 0.5).floor();
            }
            let w = (-0.5 * (d / bandwidth).powi(2)).exp();
            s0 += w;
            s1 += w * d;
            s2 += w * d * d;
            t0 += y * w;
            t1 += y * (w * d);
        }
        let det = s0 * s2 - s1 * s1;
        if det > f64::EPSILON * s0 * s2 {
            (t0 * s2 - t1 * s1) / det
        } else {
            t0 / s0
        }
    });
    Ok(CVector::from_iterator(k, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Manifold;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::TAU;

    fn circle(k: usize) -> CVector {
        CVector::from_fn(k, |j, _| Complex64::from_polar(1.0, TAU * j as f64 / k as f64))
    }

    fn max_gap(a: &CVector, b: &CVector) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn total_variation(c: &CVector) -> f64 {
        let k = c.len();
        (0..k).map(|j| (c[(j + 1) % k] - c[j]).norm()).sum()
    }

    #[test]
    fn sigma_formula_and_budget() {
        assert_eq!(pointwise_sigma(0.1, 32, 50, 1.0), 4.0 * 0.1 * 32.0 / 50.0);
        assert_eq!(pointwise_sigma(0.1, 32, 50, 2.0), pointwise_sigma(0.1, 32, 50, 1.0) / 2.0);
    }

    #[test]
    fn infinite_budget_returns_the_mean() {
        let ks = Kendall::new(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data: Vec<_> = (0..5).map(|_| ks.to_preshape(&ks.random_ambient(&mut rng)).unwrap()).collect();
        let mean = data[0].clone();
        let out = pointwise_laplace(&ks, &data, &mean, f64::INFINITY, true, &mut rng).unwrap();
        assert_eq!(&out, mean.landmarks());
        assert!(pointwise_laplace(&ks, &[], &mean, 1.0, true, &mut rng).is_err());
    }

    #[test]
    fn output_is_centered_on_the_mean() {
        let ks = Kendall::new(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data: Vec<_> = (0..10).map(|_| ks.to_preshape(&ks.random_ambient(&mut rng)).unwrap()).collect();
        let mean = data[3].clone();
        let reps = 20_000;
        let mut acc = CVector::from_element(6, Complex64::new(0.0, 0.0));
        for _ in 0..reps {
            acc += pointwise_laplace(&ks, &data, &mean, 1.0, false, &mut rng).unwrap();
        }
        acc /= Complex64::new(reps as f64, 0.0);
        // per-coordinate sd of Laplace(b) is sqrt(2) b; b <= 4 * 2 * 6 / 10
        let se = 2f64.sqrt() * 4.8 / (reps as f64).sqrt();
        for (a, m) in acc.iter().zip(mean.landmarks().iter()) {
            assert!((a.re - m.re).abs() < 3.0 * se && (a.im - m.im).abs() < 3.0 * se);
        }
    }

    #[test]
    fn open_line_is_unchanged() {
        let line = CVector::from_fn(12, |j, _| Complex64::new(0.5 + 0.3 * j as f64, -1.0 + 0.1 * j as f64));
        let out = smooth_landmarks(&line, 0.15, CurveTopology::Open).unwrap();
        assert!(max_gap(&out, &line) < 1e-9);
    }

    #[test]
    fn tiny_bandwidth_is_the_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = 20;
        let c = CVector::from_fn(k, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        for topo in [CurveTopology::Closed, CurveTopology::Open] {
            let out = smooth_landmarks(&c, 0.09 / k as f64, topo).unwrap();
            assert!(max_gap(&out, &c) < 1e-6);
        }
        assert!(smooth_landmarks(&c, 0.0, CurveTopology::Closed).is_err());
        assert!(smooth_landmarks(&c.rows(0, 4).into_owned(), 0.1, CurveTopology::Closed).is_err());
    }

    #[test]
    fn smoothing_reduces_total_variation_of_noisy_circles() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let k = 32;
        for _ in 0..50 {
            let c = circle(k).map(|z| {
                z + Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * 0.05
            });
            let s = smooth_landmarks(&c, 1.5 / k as f64, CurveTopology::Closed).unwrap();
            assert!(total_variation(&s) <= total_variation(&c));
        }
    }

    #[test]
    fn closed_smoothing_is_rotation_equivariant_in_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = 16;
        let c = CVector::from_fn(k, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let shifted = CVector::from_fn(k, |j, _| c[(j + 3) % k]);
        let a = smooth_landmarks(&c, 0.1, CurveTopology::Closed).unwrap();
        let b = smooth_landmarks(&shifted, 0.1, CurveTopology::Closed).unwrap();
        let a_shift = CVector::from_fn(k, |j, _| a[(j + 3) % k]);
        assert!(max_gap(&a_shift, &b) < 1e-12);
    }
}
