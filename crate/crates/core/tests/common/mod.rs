#![allow(dead_code)]

use geodp::spd::SpdPoint;
use geodp::{GeodesicBall, Kendall, Manifold, Spd, Sphere};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn sphere_center(s: &Sphere, rng: &mut ChaCha8Rng) -> geodp::SpherePoint {
    loop {
        let w = s.random_ambient(rng);
        if let Ok(p) = s.normalize(&w) {
            return p;
        }
    }
}

/// `exp(I, v)` for a random symmetric `v` of Frobenius norm at most `spread`.
pub fn spd_center(m: &Spd, spread: f64, rng: &mut ChaCha8Rng) -> SpdPoint {
    let id = m.identity();
    let t = m.project_tangent(&id, &m.random_ambient(rng));
    let len = m.norm_at(&id, &t).unwrap();
    let s = rng.random::<f64>() * spread;
    m.exp_map(&id, &t.scaled(s / len)).unwrap()
}

pub fn kendall_center(ks: &Kendall, rng: &mut ChaCha8Rng) -> geodp::Preshape {
    ks.to_preshape(&ks.random_ambient(rng)).unwrap()
}

pub fn points<M: Manifold>(m: &M, ball: &GeodesicBall<M>, count: usize, rng: &mut ChaCha8Rng) -> Vec<M::Point> {
    (0..count)
        .map(|_| geodp::manifold::random_point_in_ball(m, ball, rng).unwrap())
        .collect()
}

/// Random invertible matrix, kept away from singularity.
pub fn invertible(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(k, k, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        if a.determinant().abs() > 0.2 {
            return a;
        }
    }
}

/// Random rotation of `R^dim` from a QR factorization.
pub fn rotation(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = invertible(dim, rng);
    a.qr().q()
}
