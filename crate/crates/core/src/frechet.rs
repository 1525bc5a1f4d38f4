//! Fréchet means by Riemannian gradient descent.

use std::fmt;

use crate::error::{Error, Result};
use crate::manifold::{GeodesicBall, Manifold, Tangent, BALL_TOL};

/// A nonempty dataset known to lie in a geodesic ball.
pub struct Dataset<M: Manifold> {
    points: Vec<M::Point>,
    ball: GeodesicBall<M>,
}

impl<M: Manifold> Clone for Dataset<M> {
    fn clone(&self) -> Self {
        Dataset {
            points: self.points.clone(),
            ball: self.ball.clone(),
        }
    }
}

impl<M: Manifold> fmt::Debug for Dataset<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dataset")
            .field("n", &self.points.len())
            .field("ball", &self.ball)
            .finish()
    }
}

impl<M: Manifold> Dataset<M> {
    /// Validates membership of every point and containment in `ball`.
    pub fn new(manifold: &M, points: Vec<M::Point>, ball: GeodesicBall<M>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("dataset", "no points"));
        }
        for (i, p) in points.iter().enumerate() {
            manifold.check_point(p)?;
            let d = manifold.distance(&ball.center, p)?;
            if d > ball.radius + BALL_TOL {
                return Err(Error::domain(
                    "dataset",
                    format!("point {i} at distance {d} lies outside the ball of radius {}", ball.radius),
                ));
            }
        }
        Ok(Dataset { points, ball })
    }

    pub fn points(&self) -> &[M::Point] {
        &self.points
    }

    pub fn ball(&self) -> &GeodesicBall<M> {
        &self.ball
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The neighbouring dataset with the last point replaced.
    pub fn replace_last(&self, manifold: &M, p: M::Point) -> Result<Self> {
        let mut points = self.points.clone();
        *points.last_mut().expect("nonempty") = p;
        Dataset::new(manifold, points, self.ball.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub step: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step: 0.5,
            grad_tol: 1e-5,
            max_iter: 500,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::config(format!("solver step {} not in (0, 1]", self.step)));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::config("gradient tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max_iter must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FrechetResult<P> {
    pub point: P,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// `(1/2n) sum_i rho(x_i, x)^2`
pub fn variance<M: Manifold>(manifold: &M, x: &M::Point, data: &Dataset<M>) -> Result<f64> {
    let mut s = 0.0;
    for p in data.points() {
        let d = manifold.distance(p, x)?;
        s += d * d;
    }
    Ok(s / (2.0 * data.len() as f64))
}

/// `(1/n) sum_i log_map(x, x_i)`, the negative gradient of [`variance`].
pub fn neg_gradient<M: Manifold>(manifold: &M, x: &M::Point, data: &Dataset<M>) -> Result<Tangent<M>> {
    manifold.mean_log(x, data.points())
}

/// Gradient descent `x <- exp(x, step * neg_gradient(x))` from the first data
/// point until the gradient norm drops below `grad_tol`.
///
/// Running out of iterations is reported through `converged`, not an error.
pub fn frechet_mean<M: Manifold>(
    manifold: &M,
    data: &Dataset<M>,
    cfg: &SolverConfig,
) -> Result<FrechetResult<M::Point>> {
    cfg.validate()?;
    let mut x = data.points()[0].clone();
    let mut iterations = 0;
    loop {
        let g = neg_gradient(manifold, &x, data)?;
        let gn = manifold.norm_at(&x, &g)?;
        if gn < cfg.grad_tol {
            return Ok(FrechetResult { point: x, converged: true, iterations, grad_norm: gn });
        }
        if iterations == cfg.max_iter {
            return Ok(FrechetResult { point: x, converged: false, iterations, grad_norm: gn });
        }
        x = manifold.exp_map(&x, &g.scaled(cfg.step))?;
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kendall::Kendall;
    use crate::sphere::{polar_point, Sphere};
    use crate::spd::{Spd, SpdPoint};
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_8;

    fn sphere_data(points: Vec<crate::sphere::SpherePoint>) -> (Sphere, Dataset<Sphere>) {
        let s = Sphere::unit(2);
        let ball = GeodesicBall::new(&s, s.north_pole(), FRAC_PI_8).unwrap();
        let d = Dataset::new(&s, points, ball).unwrap();
        (s, d)
    }

    #[test]
    fn singleton_and_pair_variance() {
        let p = polar_point(0.2, 1.0);
        let q = polar_point(0.3, 2.0);
        let (s, d) = sphere_data(vec![p.clone()]);
        assert_eq!(variance(&s, &p, &d).unwrap(), 0.0);
        let r = frechet_mean(&s, &d, &SolverConfig::default()).unwrap();
        assert!(r.converged && r.iterations == 0);
        assert_eq!(r.point, p);

        let x = polar_point(0.1, 0.0);
        let g = neg_gradient(&s, &x, &d).unwrap();
        assert_abs_diff_eq!(g.vector, s.log_map(&x, &p).unwrap().vector, epsilon = 1e-15);

        let (s, d) = sphere_data(vec![p.clone(), q.clone()]);
        let rho = s.distance(&p, &q).unwrap();
        assert_abs_diff_eq!(variance(&s, &p, &d).unwrap(), rho * rho / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_pair_averages_to_the_pole() {
        let (s, d) = sphere_data(vec![polar_point(0.3, 0.0), polar_point(0.3, std::f64::consts::PI)]);
        let r = frechet_mean(&s, &d, &SolverConfig { grad_tol: 1e-12, ..Default::default() }).unwrap();
        assert!(r.converged);
        assert!(s.point_gap(&r.point, &s.north_pole()) < 1e-6);
    }

    #[test]
    fn spd_commuting_pair_is_the_geometric_mean() {
        let m = Spd::new(2).unwrap();
        let diag = |a: f64, b: f64| SpdPoint::new_unchecked(DMatrix::from_diagonal(&DVector::from_vec(vec![a, b])));
        let (a, b) = ((2.0, 0.8), (0.6, 1.9));
        let ball = GeodesicBall::new(&m, m.identity(), 1.5).unwrap();
        let d = Dataset::new(&m, vec![diag(a.0, a.1), diag(b.0, b.1)], ball).unwrap();
        let r = frechet_mean(&m, &d, &SolverConfig { grad_tol: 1e-12, ..Default::default() }).unwrap();
        // log-midpoint per diagonal entry
        let g0 = ((a.0 as f64).ln() / 2.0 + (b.0 as f64).ln() / 2.0).exp();
        let g1 = ((a.1 as f64).ln() / 2.0 + (b.1 as f64).ln() / 2.0).exp();
        assert_abs_diff_eq!(r.point.matrix()[(0, 0)], g0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.point.matrix()[(1, 1)], g1, epsilon = 1e-6);
        assert_abs_diff_eq!(r.point.matrix()[(0, 1)], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(g0, (2.0f64 * 0.6).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn descent_is_monotone_and_converges() {
        let (s, _) = sphere_data(vec![polar_point(0.0, 0.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = s.sample_ball_uniform_polar(FRAC_PI_8, 30, &mut rng).unwrap();
        let (s, d) = sphere_data(pts);
        let mut x = d.points()[0].clone();
        let mut f = variance(&s, &x, &d).unwrap();
        for _ in 0..50 {
            let g = neg_gradient(&s, &x, &d).unwrap();
            x = s.exp_map(&x, &g.scaled(0.5)).unwrap();
            let nf = variance(&s, &x, &d).unwrap();
            assert!(nf <= f + 1e-12);
            f = nf;
        }
        let r = frechet_mean(&s, &d, &SolverConfig::default()).unwrap();
        assert!(r.converged && r.grad_norm < 1e-5);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let (s, d) = sphere_data(vec![polar_point(0.3, 0.0), polar_point(0.3, 2.0)]);
        let r = frechet_mean(&s, &d, &SolverConfig { max_iter: 1, grad_tol: 1e-15, step: 0.1 }).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
        assert!(SolverConfig { step: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn dataset_rejects_points_outside_the_ball() {
        let s = Sphere::unit(2);
        let ball = GeodesicBall::new(&s, s.north_pole(), FRAC_PI_8).unwrap();
        assert!(Dataset::new(&s, vec![polar_point(0.5, 0.0)], ball.clone()).is_err());
        assert!(Dataset::new(&s, vec![], ball).is_err());
    }

    #[test]
    fn kendall_mean_is_rotation_equivariant() {
        let ks = Kendall::new(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let center = ks.to_preshape(&ks.random_ambient(&mut rng)).unwrap();
        let ball = GeodesicBall::new(&ks, center.clone(), 0.3).unwrap();
        let pts: Vec<_> = (0..10)
            .map(|_| crate::manifold::random_point_in_ball(&ks, &ball, &mut rng).unwrap())
            .collect();
        let d = Dataset::new(&ks, pts.clone(), ball).unwrap();
        let m = frechet_mean(&ks, &d, &SolverConfig { grad_tol: 1e-10, ..Default::default() }).unwrap();
        let rot: Vec<_> = pts.iter().map(|p| p.rotated(0.9)).collect();
        let ball = GeodesicBall::new(&ks, center.rotated(0.9), 0.3).unwrap();
        let dr = Dataset::new(&ks, rot, ball).unwrap();
        let mr = frechet_mean(&ks, &dr, &SolverConfig { grad_tol: 1e-10, ..Default::default() }).unwrap();
        assert!(ks.shape_distance(&m.point, &mr.point).unwrap() < 1e-6);
    }
}
