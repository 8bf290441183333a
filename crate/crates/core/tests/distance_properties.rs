use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srso3::cut::{cut_endpoint, cut_length, cut_symmetry_partner, diameter};
use srso3::distance::{distance, sr_log, Multiplicity};
use srso3::geodesic::{geodesic_closed_form, GeodesicParam};
use srso3::lie::{exp, fiber_rotation, LieVector};
use srso3::{Rotation, CRITICAL_BETA};

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation {
    let v = LieVector::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let angle = rng.gen_range(0.0..std::f64::consts::PI);
    exp((angle / v.norm()) * v)
}

#[test]
fn distance_is_inversion_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let g = random_rotation(&mut rng);
        let (a, b) = (distance(&g).unwrap(), distance(&g.inverse()).unwrap());
        assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
    }
}

#[test]
fn distance_is_fiber_conjugation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let g = random_rotation(&mut rng);
        let b = fiber_rotation(rng.gen_range(0.0..TAU));
        let moved = b * g * b.inverse();
        assert!((distance(&g).unwrap() - distance(&moved).unwrap()).abs() <= 1e-6);
    }
}

#[test]
fn triangle_inequality_and_ball_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (g1, g2) = (random_rotation(&mut rng), random_rotation(&mut rng));
        let (d1, d2, d12) = (distance(&g1).unwrap(), distance(&g2).unwrap(), distance(&(g1 * g2)).unwrap());
        assert!(d12 <= d1 + d2 + 1e-6);
        for d in [d1, d2, d12] {
            assert!((0.0..=diameter() + 1e-9).contains(&d));
        }
    }
}

#[test]
fn minimizers_stay_inside_cut_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let g = random_rotation(&mut rng);
        let r = sr_log(&g, 1e-9).unwrap();
        assert!(r.time <= cut_length(r.param.beta()).unwrap() + 1e-9);
        assert!(r.residual <= 1e-9);
        assert!(geodesic_closed_form(&r.param, r.time).angle_to(&g) <= 1e-9);
    }
}

#[test]
fn both_cut_preimages_give_the_same_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let phi0 = rng.gen_range(0.0..TAU);
        let beta = rng.gen_range(-CRITICAL_BETA * 0.98..CRITICAL_BETA * 0.98);
        let t1 = cut_length(beta).unwrap();
        let (phi, b) = cut_symmetry_partner(phi0, beta).unwrap();
        let x = sr_log(&geodesic_closed_form(&GeodesicParam::new(phi0, beta), t1), 1e-9).unwrap();
        let y = sr_log(&geodesic_closed_form(&GeodesicParam::new(phi, b), t1), 1e-9).unwrap();
        assert!((x.distance - y.distance).abs() <= 1e-8);
        assert_eq!(x.multiplicity, Multiplicity::CutPair);
        assert_eq!(y.multiplicity, Multiplicity::CutPair);
    }
}

#[test]
fn fiber_cut_endpoints_are_circles() {
    for beta in [0.6, -0.9, 1.5, 3.0] {
        let r = sr_log(&cut_endpoint(beta).unwrap(), 1e-9).unwrap();
        assert_eq!(r.multiplicity, Multiplicity::Circle);
        assert!((r.distance - cut_length(beta).unwrap()).abs() <= 1e-9);
    }
}
