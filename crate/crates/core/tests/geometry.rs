//! Geometric properties of the three manifolds.

mod common;

use common::*;
use geodp::kendall::hermitian;
use geodp::manifold::BALL_TOL;
use geodp::spd::SpdPoint;
use geodp::{GeodesicBall, Kendall, Manifold, Spd, Sphere, SpherePoint};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_roundtrip_symmetry_and_membership(seed in any::<u64>(), dim in 1usize..5, kappa in 0.25f64..4.0) {
        let mut rng = rng(seed);
        let s = Sphere::new(dim, kappa).unwrap();
        let r = s.descriptor().max_ball_radius() * 0.999;
        let ball = GeodesicBall::new(&s, sphere_center(&s, &mut rng), r).unwrap();
        let pq = points(&s, &ball, 2, &mut rng);
        let (p, q) = (&pq[0], &pq[1]);
        s.check_point(p).unwrap();
        let v = s.log_map(p, q).unwrap();
        s.check_tangent(&v).unwrap();
        prop_assert!(s.point_gap(&s.exp_map(p, &v).unwrap(), q) < 1e-9);
        let d = s.distance(p, q).unwrap();
        prop_assert!((d - s.distance(q, p).unwrap()).abs() < 1e-12);
        prop_assert!((d - s.norm_at(p, &v).unwrap()).abs() < 1e-10);
        prop_assert!(d <= 2.0 * r + BALL_TOL);
    }

    #[test]
    fn sphere_distance_is_rotation_invariant(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let s = Sphere::unit(3);
        let ball = GeodesicBall::new(&s, sphere_center(&s, &mut rng), 0.7).unwrap();
        let pq = points(&s, &ball, 2, &mut rng);
        let q = rotation(4, &mut rng);
        let rot = |p: &SpherePoint| SpherePoint::new_unchecked(&q * p.coords());
        let (a, b) = (rot(&pq[0]), rot(&pq[1]));
        s.check_point(&a).unwrap();
        prop_assert!((s.distance(&pq[0], &pq[1]).unwrap() - s.distance(&a, &b).unwrap()).abs() < 1e-12);
        // log commutes with the isometry
        let la = s.log_map(&a, &b).unwrap().vector;
        let l = &q * s.log_map(&pq[0], &pq[1]).unwrap().vector;
        prop_assert!((la - l).amax() < 1e-10);
    }

    #[test]
    fn spd_roundtrip_symmetry_and_membership(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = rng(seed);
        let m = Spd::new(k).unwrap();
        let ball = GeodesicBall::new(&m, spd_center(&m, 1.0, &mut rng), 1.5).unwrap();
        let pq = points(&m, &ball, 2, &mut rng);
        let (p, q) = (&pq[0], &pq[1]);
        m.check_point(q).unwrap();
        let v = m.log_map(p, q).unwrap();
        m.check_tangent(&v).unwrap();
        prop_assert!(m.point_gap(&m.exp_map(p, &v).unwrap(), q) < 1e-9);
        let d = m.distance(p, q).unwrap();
        prop_assert!((d - m.distance(q, p).unwrap()).abs() < 1e-10);
        prop_assert!((d - m.norm_at(p, &v).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn spd_congruence_is_an_isometry(seed in any::<u64>(), k in 2usize..4) {
        let mut rng = rng(seed);
        let m = Spd::new(k).unwrap();
        let ball = GeodesicBall::new(&m, spd_center(&m, 1.0, &mut rng), 1.5).unwrap();
        let pq = points(&m, &ball, 2, &mut rng);
        let a = invertible(k, &mut rng);
        let act = |p: &SpdPoint| SpdPoint::new_unchecked(&a * p.matrix() * a.transpose());
        let d0 = m.distance(&pq[0], &pq[1]).unwrap();
        let d1 = m.distance(&act(&pq[0]), &act(&pq[1])).unwrap();
        prop_assert!((d0 - d1).abs() < 1e-8 * (1.0 + d0));
        // inversion is an isometry too
        let inv = |p: &SpdPoint| SpdPoint::new_unchecked(p.matrix().clone().try_inverse().unwrap());
        let d2 = m.distance(&inv(&pq[0]), &inv(&pq[1])).unwrap();
        prop_assert!((d0 - d2).abs() < 1e-8 * (1.0 + d0));
    }

    #[test]
    fn kendall_roundtrip_and_invariances(seed in any::<u64>(), k in 3usize..12) {
        let mut rng = rng(seed);
        let ks = Kendall::new(k).unwrap();
        let r = ks.descriptor().max_ball_radius() * 0.999;
        let ball = GeodesicBall::new(&ks, kendall_center(&ks, &mut rng), r).unwrap();
        let pq = points(&ks, &ball, 2, &mut rng);
        let (p, q) = (&pq[0], &pq[1]);
        ks.check_point(q).unwrap();
        let v = ks.log_map(p, q).unwrap();
        ks.check_tangent(&v).unwrap();
        let back = ks.exp_map(p, &v).unwrap();
        ks.check_point(&back).unwrap();
        prop_assert!(ks.shape_distance(&back, q).unwrap() < 1e-7);

        let d = ks.distance(p, q).unwrap();
        prop_assert!((d - ks.distance(q, p).unwrap()).abs() < 1e-12);
        // similarity transforms of the raw configuration leave the shape fixed
        let alpha = rng.random::<f64>() * std::f64::consts::TAU;
        let scale = 0.1 + rng.random::<f64>() * 10.0;
        let shift = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let moved = q.landmarks().map(|z| z * Complex64::from_polar(scale, alpha) + shift);
        let q2 = ks.to_preshape(&moved).unwrap();
        prop_assert!((ks.distance(p, &q2).unwrap() - d).abs() < 1e-10);
        prop_assert!((ks.distance(&p.rotated(-alpha), &q2).unwrap() - d).abs() < 1e-10);
    }

    #[test]
    fn kendall_tangents_are_centered_and_horizontal(seed in any::<u64>(), k in 3usize..12) {
        let mut rng = rng(seed);
        let ks = Kendall::new(k).unwrap();
        let x = kendall_center(&ks, &mut rng);
        let v = ks.project_tangent(&x, &ks.random_ambient(&mut rng));
        let total: Complex64 = v.vector.iter().sum();
        prop_assert!(total.norm() < 1e-12);
        prop_assert!(hermitian(&v.vector, x.landmarks()).norm() < 1e-12);
    }

    #[test]
    fn balls_respect_the_curvature_limit(kappa in 0.1f64..10.0, frac in 1.0f64..2.0) {
        let s = Sphere::new(2, kappa).unwrap();
        let desc = s.descriptor();
        prop_assert!(desc.kappa_min <= desc.kappa_max);
        let limit = desc.max_ball_radius();
        prop_assert!((limit - std::f64::consts::FRAC_PI_4 / kappa.sqrt()).abs() < 1e-12);
        prop_assert!(GeodesicBall::new(&s, s.north_pole(), limit * frac).is_err());
        prop_assert!(GeodesicBall::new(&s, s.north_pole(), limit * 0.99).is_ok());
    }
}

#[test]
fn spd_balls_are_unbounded_by_curvature() {
    let m = Spd::new(2).unwrap();
    assert!(m.descriptor().max_ball_radius().is_infinite());
    assert!(GeodesicBall::new(&m, m.identity(), 50.0).is_ok());
}

#[test]
fn sphere_exp_of_zero_is_the_base() {
    let s = Sphere::unit(2);
    let p = s.north_pole();
    let v = s.project_tangent(&p, &DVector::from_vec(vec![1e-16, 0.0, 0.0]));
    assert_eq!(s.exp_map(&p, &v).unwrap(), p);
}
