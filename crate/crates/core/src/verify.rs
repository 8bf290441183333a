//! The acceptance checks, runnable from tests and from the CLI.
//!
//! Each check returns an [`Outcome`] with the worst observed error against
//! its bound. [`Profile::Full`] uses the stated sample counts;
//! [`Profile::Quick`] shrinks them for interactive use.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cut::{
    atan_grid, cut_endpoint, cut_length, cut_symmetry_partner, cut_time, diameter, diameter_check, fiber_deviation,
    in_fiber,
};
use crate::distance::{brute_force_distance, sr_log};
use crate::geodesic::{geodesic_closed_form, geodesic_ode, geodesic_product, GeodesicParam};
use crate::lie::{fiber_rotation, Rotation};
use crate::sphere::{
    digon_angle, disc_area, gauss_bonnet_residual, geodesic_curvature_numeric, holonomy_angle, projected_samples,
    transport_defect, Orientation,
};
use crate::CRITICAL_BETA;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    fn scale(self, full: usize, quick: usize) -> usize {
        match self {
            Profile::Full => full,
            Profile::Quick => quick,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Worst error seen (or violation count where noted in `detail`).
    pub observed: f64,
    pub bound: f64,
    pub elapsed: Duration,
    pub time_limit: Duration,
    pub detail: String,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<22} observed {:.3e} (bound {:.1e}) in {:.2}s (limit {}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.observed,
            self.bound,
            self.elapsed.as_secs_f64(),
            self.time_limit.as_secs(),
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "diameter"),
    (2, "known-cut-times"),
    (3, "formula-cross-check"),
    (4, "gauss-bonnet"),
    (5, "curvature"),
    (6, "conjugate-set"),
    (7, "double-cover"),
    (8, "monotonicity"),
    (9, "log-round-trip"),
    (10, "oracle-sandwich"),
    (11, "parallel-transport"),
];

pub const DEFAULT_SEED: u64 = 20_240_601;

pub fn run_all(profile: Profile, seed: u64) -> Vec<Outcome> {
    CRITERIA.iter().map(|&(id, _)| run(id, profile, seed).expect("known id")).collect()
}

/// Runs one check by number (1..=11).
pub fn run(id: u8, profile: Profile, seed: u64) -> Option<Outcome> {
    let (_, name) = *CRITERIA.iter().find(|c| c.0 == id)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ u64::from(id).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let start = Instant::now();
    let (limit, raw) = match id {
        1 => (5, diameter_grid(profile)),
        2 => (1, known_cut_times()),
        3 => (10, formula_cross_check(profile, &mut rng)),
        4 => (10, gauss_bonnet(profile)),
        5 => (5, curvature()),
        6 => (5, conjugate_set(profile)),
        7 => (5, double_cover(profile, &mut rng)),
        8 => (5, monotonicity(profile)),
        9 => (60, log_round_trip(profile, &mut rng)),
        10 => (600, oracle_sandwich(profile, &mut rng, seed)),
        11 => (10, parallel_transport(profile, &mut rng)),
        _ => unreachable!(),
    };
    let elapsed = start.elapsed();
    let time_limit = Duration::from_secs(limit);
    Some(Outcome {
        id,
        name,
        passed: raw.ok && elapsed <= time_limit,
        observed: raw.observed,
        bound: raw.bound,
        elapsed,
        time_limit,
        detail: raw.detail,
    })
}

struct Raw {
    ok: bool,
    observed: f64,
    bound: f64,
    detail: String,
}

/// Tracks the worst ratio `error / bound` across several sub-checks.
struct Worst {
    observed: f64,
    bound: f64,
    ratio: f64,
    failures: usize,
    checked: usize,
}

impl Worst {
    fn new() -> Self {
        Worst {
            observed: 0.0,
            bound: 0.0,
            ratio: f64::NEG_INFINITY,
            failures: 0,
            checked: 0,
        }
    }

    fn add(&mut self, err: f64, bound: f64) {
        self.checked += 1;
        let ok = err <= bound;
        if !ok {
            self.failures += 1;
        }
        let ratio = match (ok, bound > 0.0) {
            (_, true) if !err.is_nan() => err / bound,
            (true, false) => 0.0,
            _ => f64::INFINITY,
        };
        if ratio > self.ratio {
            self.ratio = ratio;
            self.observed = err;
            self.bound = bound;
        }
    }

    fn finish(self, what: &str) -> Raw {
        Raw {
            ok: self.failures == 0 && self.checked > 0,
            observed: self.observed,
            bound: self.bound,
            detail: format!("{} of {} {what} within bounds", self.checked - self.failures, self.checked),
        }
    }
}

fn diameter_grid(profile: Profile) -> Raw {
    let grid = atan_grid(profile.scale(10_000, 2_000), 5.0);
    let check = match diameter_check(&grid) {
        Ok(c) => c,
        Err(e) => return failed(e),
    };
    let err = (check.max - diameter()).abs();
    let at = (check.argmax.abs() - CRITICAL_BETA).abs();
    Raw {
        ok: err <= 1e-6 && at <= 1e-3,
        observed: err,
        bound: 1e-6,
        detail: format!(
            "max t1 = {:.15} at beta = {:.6} (|beta| - 1/sqrt3 = {at:.1e}); grid max {:.9}",
            check.max, check.argmax, check.grid_max
        ),
    }
}

fn known_cut_times() -> Raw {
    let mut w = Worst::new();
    let t0 = cut_time(0.0).map(|c| c.t1).unwrap_or(f64::NAN);
    w.add(if t0 == PI { 0.0 } else { (t0 - PI).abs().max(f64::MIN_POSITIVE) }, 0.0);
    w.add((cut_length(1.0).unwrap_or(f64::NAN) - PI * 2f64.sqrt()).abs(), 1e-12);
    w.add((cut_length(1.0 / 3f64.sqrt()).unwrap_or(f64::NAN) - PI * 3f64.sqrt()).abs(), 1e-12);
    w.finish("cut times")
}

fn formula_cross_check(profile: Profile, rng: &mut ChaCha8Rng) -> Raw {
    let mut w = Worst::new();
    let mut worst_product = 0.0f64;
    for _ in 0..profile.scale(10_000, 1_000) {
        let p = GeodesicParam::new(rng.gen_range(0.0..TAU), rng.gen_range(-5.0..5.0));
        let t = rng.gen_range(0.0..TAU);
        let err = geodesic_product(&p, t).max_abs_diff(&geodesic_closed_form(&p, t));
        worst_product = worst_product.max(err);
        w.add(err, 1e-10);
    }
    let mut worst_ode = 0.0f64;
    for _ in 0..profile.scale(100, 10) {
        let p = GeodesicParam::new(rng.gen_range(0.0..TAU), rng.gen_range(-5.0..5.0));
        let t = rng.gen_range(0.0..TAU);
        let err = geodesic_ode(&p, t, 1e-3).max_abs_diff(&geodesic_closed_form(&p, t));
        worst_ode = worst_ode.max(err);
        w.add(err, 1e-7);
    }
    let mut raw = w.finish("evaluations");
    raw.detail = format!("{}; product {worst_product:.1e}, ode {worst_ode:.1e}", raw.detail);
    raw
}

fn gauss_bonnet(profile: Profile) -> Raw {
    let n = profile.scale(20, 5);
    let mut w = Worst::new();
    let mut worst_area = 0.0f64;
    let mut worst_pi = 0.0f64;
    for k in 0..n {
        let beta = CRITICAL_BETA * (k as f64 + 0.5) / n as f64;
        let t1 = match cut_length(beta) {
            Ok(t) => t,
            Err(e) => return failed(e),
        };
        let area = gauss_bonnet_residual(beta, t1).unwrap_or(f64::NAN);
        worst_area = worst_area.max(area);
        w.add(area, 1e-6);
        let closed = (2.0 * digon_angle(beta, t1) - beta * t1 - PI).abs();
        worst_pi = worst_pi.max(closed);
        w.add(closed, 1e-9);
    }
    let mut raw = w.finish("area checks");
    raw.detail = format!("{}; numeric vs formula {worst_area:.1e}, area - pi {worst_pi:.1e}", raw.detail);
    raw
}

fn curvature() -> Raw {
    let mut w = Worst::new();
    for beta in [0.25, 0.5, 1.0, 2.0] {
        let p = GeodesicParam::new(0.0, beta);
        let samples = projected_samples(&p, crate::sphere::full_turn_time(beta), 1_000);
        let k = geodesic_curvature_numeric(&samples, Orientation::Forward).unwrap_or(f64::NAN);
        w.add((k + beta).abs(), 1e-4);
    }
    w.finish("curvatures")
}

fn conjugate_set(profile: Profile) -> Raw {
    let n = profile.scale(1_000, 100);
    let mut w = Worst::new();
    let xi_lo = CRITICAL_BETA.atan();
    let xi_hi = 50f64.atan();
    let mut worst_fiber = 0.0f64;
    for k in 0..n {
        let xi = xi_lo + (xi_hi - xi_lo) * (k / 2) as f64 / (n / 2 - 1).max(1) as f64;
        let beta = if k % 2 == 0 { xi.tan() } else { -xi.tan() };
        let e = match cut_endpoint(beta) {
            Ok(e) => e,
            Err(err) => return failed(err),
        };
        let dev = fiber_deviation(&e).max(fiber_deviation(&e.inverse()));
        worst_fiber = worst_fiber.max(dev);
        w.add(if in_fiber(&e, 1e-10) { dev } else { dev.max(1.0) }, 1e-10);
        // distinct from the identity
        w.add(if e.angle() > 1e-12 { 0.0 } else { 1.0 }, 0.0);
    }
    let m = profile.scale(200, 40);
    let mut min_dev = f64::INFINITY;
    for k in 0..m {
        let beta = CRITICAL_BETA * (2.0 * (k as f64 + 0.5) / m as f64 - 1.0);
        let dev = cut_endpoint(beta).map(|e| fiber_deviation(&e)).unwrap_or(0.0);
        min_dev = min_dev.min(dev);
        w.add(if dev > 1e-3 { 0.0 } else { 1.0 }, 0.0);
    }
    let mut raw = w.finish("endpoints");
    raw.observed = worst_fiber;
    raw.bound = 1e-10;
    raw.detail = format!("{}; smallest deviation below 1/sqrt3 {min_dev:.3e}", raw.detail);
    raw
}

fn double_cover(profile: Profile, rng: &mut ChaCha8Rng) -> Raw {
    let mut w = Worst::new();
    for _ in 0..profile.scale(100, 20) {
        let phi0 = rng.gen_range(0.0..TAU);
        let beta = rng.gen_range(-CRITICAL_BETA..=CRITICAL_BETA);
        let err = (|| -> crate::Result<f64> {
            let t1 = cut_length(beta)?;
            let (phi, b) = cut_symmetry_partner(phi0, beta)?;
            let x = geodesic_closed_form(&GeodesicParam::new(phi0, beta), t1);
            let y = geodesic_closed_form(&GeodesicParam::new(phi, b), cut_length(b)?);
            Ok(x.max_abs_diff(&y))
        })()
        .unwrap_or(f64::NAN);
        w.add(err, 1e-9);
    }
    w.finish("partner pairs")
}

fn monotonicity(profile: Profile) -> Raw {
    let n = profile.scale(500, 100);
    let up: Vec<f64> = (0..=n).map(|k| CRITICAL_BETA * k as f64 / n as f64).collect();
    let down: Vec<f64> = (0..=n)
        .map(|k| CRITICAL_BETA + (5.0 - CRITICAL_BETA) * k as f64 / n as f64)
        .collect();
    let t = |grid: &[f64]| grid.iter().map(|&b| cut_length(b).unwrap_or(f64::NAN)).collect::<Vec<_>>();
    let (tu, td) = (t(&up), t(&down));
    let rising = tu.windows(2).filter(|w| !(w[1] > w[0])).count();
    let falling = td.windows(2).filter(|w| !(w[1] < w[0])).count();
    let violations = rising + falling;
    Raw {
        ok: violations == 0,
        observed: violations as f64,
        bound: 0.0,
        detail: format!(
            "{violations} violations on {} points (rising {rising}, falling {falling})",
            up.len() + down.len() - 1
        ),
    }
}

fn log_round_trip(profile: Profile, rng: &mut ChaCha8Rng) -> Raw {
    let mut w = Worst::new();
    let mut errors = 0;
    for _ in 0..profile.scale(1_000, 100) {
        let beta = rng.gen_range(-5f64.atan()..5f64.atan()).tan();
        let p = GeodesicParam::new(rng.gen_range(0.0..TAU), beta);
        let t = 0.95 * cut_length(beta).unwrap_or(0.0) * rng.gen_range(0.0..=1.0);
        match sr_log(&geodesic_closed_form(&p, t), 1e-9) {
            Ok(r) => w.add((r.distance - t).abs(), 1e-6),
            Err(_) => {
                errors += 1;
                w.add(f64::INFINITY, 1e-6);
            }
        }
    }
    let mut raw = w.finish("round trips");
    raw.detail = format!("{}; {errors} solver errors", raw.detail);
    raw
}

/// Haar-random rotation from a uniform unit quaternion.
fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation {
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (w, x, y, z) = (a * (TAU * u2).sin(), a * (TAU * u2).cos(), b * (TAU * u3).sin(), b * (TAU * u3).cos());
    Rotation::from_row_major([
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    ])
    .expect("unit quaternion gives a rotation")
}

fn oracle_sandwich(profile: Profile, rng: &mut ChaCha8Rng, seed: u64) -> Raw {
    let (n_random, budget) = match profile {
        Profile::Full => (10, 200),
        Profile::Quick => (2, 40),
    };
    let mut targets: Vec<(String, Rotation)> = (0..n_random)
        .map(|k| (format!("random#{k}"), random_rotation(rng)))
        .collect();
    targets.push(("exp(pi c)".into(), fiber_rotation(PI)));
    let cut_betas: &[f64] = match profile {
        Profile::Full => &[0.0, 0.1, -0.25, 0.4, 0.5, 0.57, 0.75, 1.0, -1.6],
        Profile::Quick => &[0.0, 0.4, 1.0],
    };
    for &b in cut_betas {
        targets.push((format!("cut({b})"), cut_endpoint(b).expect("finite beta")));
    }

    let mut w = Worst::new();
    let mut worst: Option<String> = None;
    let mut worst_excess = f64::NEG_INFINITY;
    for (k, (label, g)) in targets.iter().enumerate() {
        let d = match sr_log(g, 1e-9) {
            Ok(r) => r.distance,
            Err(e) => return failed(e),
        };
        let bound = match brute_force_distance(g, 16, budget, seed.wrapping_add(k as u64)) {
            Ok(b) => b,
            Err(e) => return failed(e),
        };
        let excess = bound.length - d;
        if excess > worst_excess {
            worst_excess = excess;
            worst = Some(format!("{label}: d = {d:.6}, bound = {:.6}", bound.length));
        }
        // map the two-sided window onto one error/bound pair
        let err = if !bound.feasible() {
            f64::INFINITY
        } else if excess < 0.0 {
            -excess * 5.0
        } else {
            excess
        };
        w.add(err, 5e-2);
    }
    let mut raw = w.finish("targets");
    raw.observed = worst_excess;
    raw.bound = 5e-2;
    raw.detail = format!("{}; largest excess {}", raw.detail, worst.unwrap_or_default());
    raw
}

fn parallel_transport(profile: Profile, rng: &mut ChaCha8Rng) -> Raw {
    let mut w = Worst::new();
    for _ in 0..profile.scale(10, 3) {
        let p = GeodesicParam::new(rng.gen_range(0.0..TAU), rng.gen_range(-2.0..2.0));
        let t1 = rng.gen_range(0.5..TAU);
        w.add(transport_defect(&p, t1, 1_000), 1e-4);
    }
    let hol = holonomy_angle(1.0, profile.scale(20_000, 5_000));
    let area = disc_area(1.0).rem_euclid(TAU);
    let diff = (hol - area).abs();
    let diff = diff.min(TAU - diff);
    w.add(diff, 1e-3);
    let mut raw = w.finish("transport checks");
    raw.detail = format!("{}; holonomy {hol:.6} vs area {area:.6}", raw.detail);
    raw
}

fn failed(e: crate::Error) -> Raw {
    Raw {
        ok: false,
        observed: f64::INFINITY,
        bound: 0.0,
        detail: format!("error: {e}"),
    }
}
