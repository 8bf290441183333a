use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srso3::cut::{atan_grid, cut_length, cut_time, digon_root_function, diameter, Branch};
use srso3::geodesic::{geodesic_closed_form, GeodesicParam};
use srso3::sphere::{full_turn_time, half_turn_time};
use srso3::CRITICAL_BETA;

fn digon_betas(n: usize) -> Vec<f64> {
    (1..n).map(|k| CRITICAL_BETA * k as f64 / n as f64).flat_map(|b| [b, -b]).collect()
}

#[test]
fn root_residual_on_digon_branch() {
    for beta in digon_betas(1000) {
        let c = cut_time(beta).unwrap();
        assert_eq!(c.branch, Branch::DigonPi);
        assert!(digon_root_function(beta, c.t1).abs() <= 1e-12, "{beta}");
        assert!(c.t1 > half_turn_time(beta) && c.t1 < full_turn_time(beta));
        assert!(beta.abs() * c.t1 > 0.0 && beta.abs() * c.t1 < PI);
    }
}

#[test]
fn bracket_straddles_root() {
    let eps = 1e-9;
    for beta in digon_betas(1000) {
        let lo = digon_root_function(beta, half_turn_time(beta) + eps);
        let hi = digon_root_function(beta, full_turn_time(beta) - eps);
        assert!(lo * hi < 0.0, "{beta}: {lo} {hi}");
    }
}

#[test]
fn branch_tags_follow_beta() {
    for beta in atan_grid(2001, 20.0) {
        let c = cut_time(beta).unwrap();
        let want = if beta == 0.0 {
            Branch::BetaZero
        } else if beta.abs() >= CRITICAL_BETA {
            Branch::FullCircle
        } else {
            Branch::DigonPi
        };
        assert_eq!(c.branch, want, "{beta}");
        if want == Branch::FullCircle {
            assert!((c.t1 - full_turn_time(beta)).abs() <= 1e-12);
        }
    }
}

/// The left limit approaches like a cube root, so the value at the peak is
/// extrapolated from a geometric sequence of offsets. The deficit behaves
/// like `C·δ^(1/3) + O(δ)`, so two Richardson steps remove both terms.
#[test]
fn continuous_at_peak() {
    let t = |d: f64| cut_length(CRITICAL_BETA - d).unwrap();
    let richardson = |d: f64| 2.0 * t(d / 8.0) - t(d);
    let d = 1e-7;
    let limit = (8.0 * richardson(d / 8.0) - richardson(d)) / 7.0;
    assert!((limit - diameter()).abs() <= 1e-8, "left limit {limit}");
    let deficits: Vec<f64> = [1e-3, 1e-5, 1e-7, 1e-9].iter().map(|&d| diameter() - t(d)).collect();
    assert!(deficits.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0), "{deficits:?}");
    assert!((cut_length(CRITICAL_BETA + 1e-9).unwrap() - diameter()).abs() <= 1e-8);
}

/// Geodesics slightly shorter than the cut time, over a grid of initial
/// data, never reach the cut endpoint.
#[test]
fn no_shorter_geodesic_reaches_the_cut_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut betas: Vec<f64> = (0..100).map(|_| rng.gen_range(-CRITICAL_BETA..CRITICAL_BETA)).collect();
    for _ in 0..100 {
        let b: f64 = rng.gen_range(CRITICAL_BETA * 1.01..4.0);
        betas.push(if rng.gen() { b } else { -b });
    }
    let grid_beta = atan_grid(400, 30.0);
    for beta in betas {
        let t1 = cut_length(beta).unwrap();
        let target = geodesic_closed_form(&GeodesicParam::new(0.0, beta), t1);
        let length = t1 - 0.05;
        let mut closest = f64::INFINITY;
        for &b in &grid_beta {
            for k in 0..64 {
                let phi0 = TAU * k as f64 / 64.0;
                let reached = geodesic_closed_form(&GeodesicParam::new(phi0, b), length);
                closest = closest.min(reached.angle_to(&target));
            }
        }
        assert!(closest > 1e-3, "beta {beta}: a shorter geodesic comes within {closest:e}");
    }
}
