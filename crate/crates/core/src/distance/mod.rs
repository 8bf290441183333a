//! Sub-Riemannian logarithm and distance from the identity.
//!
//! Any geodesic `γ_{(φ0,β)}` with `t ≤ t1(β)` that reaches `g` is a shortest
//! arc, so the distance is the time of such a preimage. [`sr_log`] finds one
//! in two steps:
//!
//! 1. Conjugating by `exp(φ0·c)` turns the quaternion vector part
//!    `(q_y, q_z)` of `g` and fixes `(w, q_x)`. The pair
//!    `κ = q_y² + q_z²` and the phase of `w + i·q_x` are therefore invariants,
//!    and for `φ0 = 0` they depend on `(β, t)` through
//!    `w + i·q_x = (cos h + i(β/ω) sin h)·exp(-iβt/2)` and
//!    `κ = sin²h / ω²`, where `ω = √(1+β²)` and `h = tω/2`. Fixing `κ`
//!    leaves a closed one-parameter curve in `(β, t)`, which is scanned for
//!    roots of the phase mismatch.
//! 2. Each root fixes `φ0` by comparing vector parts, and a damped
//!    Gauss–Newton pass on `log(γ(p,t)⁻¹·g)` polishes `(φ0, β, t)`.
//!
//! Targets in SO(2) are solved directly (a full turn of the projected
//! circle). [`full_search`] is an independent grid + Gauss–Newton solver
//! used as a fallback and to cross-check.

mod oracle;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::cut::cut_length;
use crate::error::{Error, Result};
use crate::geodesic::{geodesic_closed_form, normalize_angle, GeodesicParam};
use crate::lie::{log_unchecked, Rotation, ORTHOGONALITY_TOL};
use crate::CRITICAL_BETA;

pub use oracle::{brute_force_distance, OracleBound};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Slack allowed on `t ≤ t1(β)`.
const CUT_SLACK: f64 = 1e-9;

/// `|(q_y, q_z)|` below which the target is treated as a rotation about `e1`.
const FIBER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    /// One minimizer.
    Unique,
    /// Cut endpoint with `β² ≤ 1/3`: a mirrored second minimizer exists.
    CutPair,
    /// Target in SO(2)∖{e}: a whole circle of minimizers (any `φ0`).
    Circle,
}

impl Multiplicity {
    pub fn name(self) -> &'static str {
        match self {
            Multiplicity::Unique => "unique",
            Multiplicity::CutPair => "cut_pair",
            Multiplicity::Circle => "circle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceResult {
    pub distance: f64,
    pub param: GeodesicParam,
    pub time: f64,
    /// `‖log(γ(param, time)⁻¹·g)‖`.
    pub residual: f64,
    pub oracle_bound: Option<f64>,
    pub multiplicity: Multiplicity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    /// Grid size of the one-parameter scan.
    pub scan_points: usize,
    /// Gauss–Newton iterations per candidate.
    pub polish_iters: usize,
    /// Run [`full_search`] if the scan finds nothing.
    pub fallback: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOL,
            scan_points: 4096,
            polish_iters: 40,
            fallback: true,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            ..Self::default()
        }
    }
}

pub fn sr_log(g: &Rotation, tol: f64) -> Result<DistanceResult> {
    sr_log_with(g, &SolveOptions::with_tol(tol))
}

/// Distance from the identity with the default tolerance.
pub fn distance(g: &Rotation) -> Result<f64> {
    sr_log(g, DEFAULT_TOL).map(|r| r.distance)
}

pub fn sr_log_with(g: &Rotation, opts: &SolveOptions) -> Result<DistanceResult> {
    validate(g, opts.tol)?;
    if g.angle() <= 1e-15 {
        return Ok(DistanceResult {
            distance: 0.0,
            param: GeodesicParam::new(0.0, 0.0),
            time: 0.0,
            residual: g.angle(),
            oracle_bound: None,
            multiplicity: Multiplicity::Unique,
        });
    }
    let q = g.to_quaternion();
    let sk = q[2].hypot(q[3]).min(1.0);
    if sk <= FIBER_TOL {
        return Ok(solve_fiber(g, q));
    }

    let mut best: Option<DistanceResult> = None;
    for (beta, t, phi0) in scan_candidates(q, sk, opts.scan_points) {
        let cand = polish(g, [phi0, beta, t], opts.polish_iters);
        if let Some(r) = accept(cand, opts.tol) {
            if best.map_or(true, |b| r.time < b.time) {
                best = Some(r);
            }
        }
    }
    match best {
        Some(r) => Ok(r),
        None if opts.fallback => full_search(g, opts),
        None => Err(no_convergence(g, opts.tol)),
    }
}

fn validate(g: &Rotation, tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::OutOfDomain(format!("tolerance must be positive, got {tol}")));
    }
    let defect = g.defect();
    if !(defect <= ORTHOGONALITY_TOL) {
        return Err(Error::InvalidRotation {
            defect,
            tol: ORTHOGONALITY_TOL,
        });
    }
    Ok(())
}

/// Rotation by `α` about `e1`: the endpoint of one full turn,
/// `exp(-βt1·c)` with `t1 = 2π/ω`, gives `β/ω = sgn(α)(1 - |α|/2π)`.
fn solve_fiber(g: &Rotation, q: [f64; 4]) -> DistanceResult {
    let alpha = 2.0 * q[1].atan2(q[0]);
    let s = alpha.signum() * (1.0 - alpha.abs() / TAU);
    let cos_xi = (1.0 - s * s).sqrt();
    let beta = s / cos_xi;
    let time = TAU * cos_xi;
    let param = GeodesicParam::new(0.0, beta);
    DistanceResult {
        distance: time,
        param,
        time,
        residual: residual_norm(g, &param, time),
        oracle_bound: None,
        multiplicity: Multiplicity::Circle,
    }
}

/// Point of the invariant curve at loop parameter `th ∈ [-π/2, 3π/2]`:
/// `ξ = atan β = ξ_max sin th`, with `h ≤ π/2` on the first half.
/// Returns `(β, t, h)`.
fn curve_point(sk: f64, xi_max: f64, th: f64) -> (f64, f64, f64) {
    let xi = xi_max * th.sin();
    let cx = xi.cos();
    let a = (sk / cx).min(1.0).asin();
    let h = if th <= FRAC_PI_2 { a } else { PI - a };
    (xi.tan(), 2.0 * h * cx, h)
}

fn phase_mismatch(sk: f64, theta_g: f64, beta: f64, t: f64, h: f64) -> f64 {
    ((beta * sk).atan2(h.cos()) - 0.5 * beta * t - theta_g).sin()
}

/// Roots of the phase mismatch along the invariant curve, each turned into
/// an initial guess `(β, t, φ0)`.
fn scan_candidates(q: [f64; 4], sk: f64, n: usize) -> Vec<(f64, f64, f64)> {
    let theta_g = q[1].atan2(q[0]);
    let xi_max = sk.acos();
    let f = |th: f64| {
        let (beta, t, h) = curve_point(sk, xi_max, th);
        phase_mismatch(sk, theta_g, beta, t, h)
    };

    let mut roots = Vec::new();
    if xi_max < 1e-7 {
        // κ ≈ 1 collapses the curve onto β = 0, h = π/2
        roots.push(0.0);
    } else {
        let n = n.max(16);
        let th: Vec<f64> = (0..=n).map(|k| -FRAC_PI_2 + TAU * k as f64 / n as f64).collect();
        let v: Vec<f64> = th.iter().map(|&x| f(x)).collect();
        for k in 0..n {
            if v[k] == 0.0 {
                roots.push(th[k]);
            } else if v[k] * v[k + 1] < 0.0 {
                roots.push(bisect(&f, th[k], th[k + 1], v[k]));
            } else if k > 0 && v[k].abs() < v[k - 1].abs() && v[k].abs() < v[k + 1].abs() && v[k].abs() < 1e-2 {
                // possible double root between samples
                let x = golden_min(|x| f(x).abs(), th[k - 1], th[k + 1]);
                if f(x).abs() < 1e-8 {
                    roots.push(x);
                }
            }
        }
    }

    roots
        .into_iter()
        .map(|th| {
            let (beta, t, h) = curve_point(sk, xi_max, th);
            (beta, t, recover_phi0(q, sk, beta, t, h))
        })
        .collect()
}

/// `φ0` turning the `φ0 = 0` model quaternion into `q` (vector parts
/// `(q_y, q_z)` differ by a rotation through `φ0`).
fn recover_phi0(q: [f64; 4], sk: f64, beta: f64, t: f64, h: f64) -> f64 {
    let (s2, c2) = (0.5 * beta * t).sin_cos();
    let ch = h.cos();
    let bs = beta * sk;
    let w_m = ch * c2 + bs * s2;
    let x_m = bs * c2 - ch * s2;
    let sign = if q[0] * w_m + q[1] * x_m < 0.0 { -1.0 } else { 1.0 };
    normalize_angle((sign * q[3]).atan2(sign * q[2]) - (FRAC_PI_2 + 0.5 * beta * t))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

fn residual_vec(g: &Rotation, x: [f64; 3]) -> Vector3<f64> {
    let reached = geodesic_closed_form(&GeodesicParam::new(x[0], x[1]), x[2]);
    Vector3::from(log_unchecked(&(reached.inverse() * *g)).to_array())
}

fn residual_norm(g: &Rotation, p: &GeodesicParam, t: f64) -> f64 {
    geodesic_closed_form(p, t).angle_to(g)
}

/// Levenberg–Marquardt on `log(γ(φ0, β, t)⁻¹·g)` with a central-difference
/// Jacobian. Returns the final `(φ0, β, t)` and residual norm.
fn polish(g: &Rotation, x0: [f64; 3], iters: usize) -> ([f64; 3], f64) {
    let mut x = x0;
    let mut r = residual_vec(g, x);
    let mut nr = r.norm();
    let mut lambda = 1e-8;
    for _ in 0..iters {
        if nr < 1e-15 {
            break;
        }
        let j = jacobian(g, x);
        let jtj = j.transpose() * j;
        let rhs = -(j.transpose() * r);
        let mut damped = jtj;
        for i in 0..3 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
        }
        let Some(step) = damped.lu().solve(&rhs) else {
            lambda *= 10.0;
            continue;
        };
        let trial = [x[0] + step[0], x[1] + step[1], x[2] + step[2]];
        let rt = residual_vec(g, trial);
        let nt = rt.norm();
        if nt < nr {
            x = trial;
            r = rt;
            let gain = nr - nt;
            nr = nt;
            lambda = (lambda * 0.1).max(1e-14);
            if gain < 1e-17 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e10 {
                break;
            }
        }
    }
    (x, nr)
}

fn jacobian(g: &Rotation, x: [f64; 3]) -> Matrix3<f64> {
    let mut j = Matrix3::zeros();
    for k in 0..3 {
        let h = 1e-6 * x[k].abs().max(1.0);
        let mut xp = x;
        let mut xm = x;
        xp[k] += h;
        xm[k] -= h;
        let d = (residual_vec(g, xp) - residual_vec(g, xm)) / (2.0 * h);
        j.set_column(k, &d);
    }
    j
}

/// Keeps a polished candidate that reaches `g` within `tol` no later than
/// its cut time.
fn accept((x, residual): ([f64; 3], f64), tol: f64) -> Option<DistanceResult> {
    let [phi0, beta, time] = x;
    if !(residual <= tol) || !(time >= 0.0) || !beta.is_finite() {
        return None;
    }
    let t1 = cut_length(beta).ok()?;
    if time > t1 + CUT_SLACK {
        return None;
    }
    let on_cut = (time - t1).abs() <= 1e-7 * t1.max(1.0);
    let multiplicity = if on_cut && beta.abs() < CRITICAL_BETA {
        Multiplicity::CutPair
    } else {
        Multiplicity::Unique
    };
    Some(DistanceResult {
        distance: time,
        param: GeodesicParam::new(phi0, beta),
        time,
        residual,
        oracle_bound: None,
        multiplicity,
    })
}

fn no_convergence(g: &Rotation, tol: f64) -> Error {
    // report the best point of the coarse grid
    let (x, residual) = coarse_grid(g)
        .into_iter()
        .next()
        .map(|(x, _)| polish(g, x, 40))
        .unwrap_or(([0.0, 0.0, 0.0], g.angle()));
    let param = GeodesicParam::new(x[0], x[1]);
    Error::NoConvergence {
        residual,
        tol,
        best: Box::new(DistanceResult {
            distance: x[2],
            param,
            time: x[2],
            residual,
            oracle_bound: None,
            multiplicity: Multiplicity::Unique,
        }),
    }
}

const GRID_PHI: usize = 16;
const GRID_XI: usize = 32;
const GRID_S: usize = 16;
const GRID_KEEP: usize = 12;

/// `(φ0, β, t)` grid points sorted by residual, `t = s·t1(β)`.
fn coarse_grid(g: &Rotation) -> Vec<([f64; 3], f64)> {
    let mut pts: Vec<([f64; 3], f64)> = (0..GRID_PHI * GRID_XI * GRID_S)
        .into_par_iter()
        .map(|idx| {
            let i = idx / (GRID_XI * GRID_S);
            let j = (idx / GRID_S) % GRID_XI;
            let k = idx % GRID_S;
            let phi0 = TAU * i as f64 / GRID_PHI as f64;
            let xi = -FRAC_PI_2 + PI * (j as f64 + 0.5) / GRID_XI as f64;
            let beta = xi.tan();
            let t = cut_length(beta).expect("finite beta") * (k as f64 + 1.0) / GRID_S as f64;
            let x = [phi0, beta, t];
            (x, residual_vec(g, x).norm())
        })
        .collect();
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    pts
}

/// Three-parameter search: coarse `(φ0, atan β, t/t1)` grid, then
/// Gauss–Newton from the best grid points. Slower than [`sr_log`] and
/// independent of the invariant reduction.
pub fn full_search(g: &Rotation, opts: &SolveOptions) -> Result<DistanceResult> {
    validate(g, opts.tol)?;
    if g.angle() <= 1e-15 {
        return sr_log_with(g, &SolveOptions { fallback: false, ..*opts });
    }
    let polished: Vec<([f64; 3], f64)> = coarse_grid(g)
        .into_iter()
        .take(GRID_KEEP)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(x, _)| polish(g, x, opts.polish_iters.max(100)))
        .collect();
    let mut best: Option<DistanceResult> = None;
    for cand in polished {
        if let Some(r) = accept(cand, opts.tol) {
            if best.map_or(true, |b| r.time < b.time) {
                best = Some(r);
            }
        }
    }
    best.ok_or_else(|| no_convergence(g, opts.tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut::{cut_endpoint, cut_symmetry_partner, diameter};
    use crate::geodesic::geodesic;
    use crate::lie::{exp, fiber_rotation, LieVector};

    fn model_quaternion(beta: f64, t: f64) -> [f64; 4] {
        let w = (1.0 + beta * beta).sqrt();
        let h = 0.5 * t * w;
        let (s2, c2) = (0.5 * beta * t).sin_cos();
        let (sh, ch) = h.sin_cos();
        let r = beta / w * sh;
        [ch * c2 + r * s2, r * c2 - ch * s2, -sh * s2 / w, sh * c2 / w]
    }

    #[test]
    fn quaternion_model_matches_closed_form() {
        for (beta, t) in [(0.0, 1.0), (0.7, 2.3), (-1.4, 4.0), (3.0, 0.2), (0.3, 5.5)] {
            let q = geodesic(&GeodesicParam::new(0.0, beta), t).to_quaternion();
            let m = model_quaternion(beta, t);
            let s = if q.iter().zip(&m).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            for i in 0..4 {
                assert!((q[i] - s * m[i]).abs() < 1e-14, "({beta}, {t}) {q:?} {m:?}");
            }
        }
    }

    #[test]
    fn recovers_known_geodesic() {
        let p = GeodesicParam::new(1.0, 0.5);
        assert!(2.0 < cut_length(0.5).unwrap());
        let r = sr_log(&geodesic(&p, 2.0), 1e-9).unwrap();
        assert!((r.distance - 2.0).abs() < 1e-6);
        assert!((r.param.phi0() - 1.0).abs() < 1e-6);
        assert!((r.param.beta() - 0.5).abs() < 1e-6);
        assert_eq!(r.multiplicity, Multiplicity::Unique);
        assert!(r.residual <= 1e-9);
    }

    #[test]
    fn identity_has_distance_zero() {
        let r = sr_log(&Rotation::identity(), 1e-9).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.time, 0.0);
    }

    #[test]
    fn farthest_point() {
        let r = sr_log(&fiber_rotation(PI), 1e-9).unwrap();
        assert!((r.distance - diameter()).abs() < 1e-9);
        assert!((r.param.beta().abs() - CRITICAL_BETA).abs() < 1e-9);
        assert_eq!(r.multiplicity, Multiplicity::Circle);
    }

    #[test]
    fn half_turn_about_third_axis_is_cut_pair() {
        let g = Rotation::from_row_major([-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let r = sr_log(&g, 1e-9).unwrap();
        assert!((r.distance - PI).abs() < 1e-9);
        assert!(r.param.beta().abs() < 1e-9);
        assert_eq!(r.multiplicity, Multiplicity::CutPair);
    }

    #[test]
    fn short_horizontal_rotation() {
        let d = distance(&exp(LieVector::new(0.3, 0.0, 0.0))).unwrap();
        assert!((d - 0.3).abs() < 1e-9);
    }

    #[test]
    fn fiber_targets_are_full_turns() {
        for alpha in [0.1, 1.0, -2.0, 3.0, -PI] {
            let r = sr_log(&fiber_rotation(alpha), 1e-9).unwrap();
            assert_eq!(r.multiplicity, Multiplicity::Circle);
            assert!(r.param.beta().abs() >= CRITICAL_BETA - 1e-12);
            assert!((r.time - cut_length(r.param.beta()).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn digon_cut_endpoints_are_cut_pairs() {
        for beta in [0.1, -0.3, 0.5] {
            let g = cut_endpoint(beta).unwrap();
            let r = sr_log(&g, 1e-9).unwrap();
            assert!((r.distance - cut_length(beta).unwrap()).abs() < 1e-8);
            assert_eq!(r.multiplicity, Multiplicity::CutPair);
            let (phi, b) = cut_symmetry_partner(0.0, beta).unwrap();
            let twin = geodesic(&GeodesicParam::new(phi, b), cut_length(b).unwrap());
            assert!((sr_log(&twin, 1e-9).unwrap().distance - r.distance).abs() < 1e-8);
        }
    }

    #[test]
    fn near_fiber_target() {
        let p = GeodesicParam::new(0.4, 1.2);
        let t = cut_length(1.2).unwrap() * (1.0 - 1e-6);
        let r = sr_log(&geodesic(&p, t), 1e-9).unwrap();
        assert!((r.distance - t).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn full_search_agrees_with_reduction() {
        for (phi0, beta, t) in [(0.3, 0.2, 1.5), (4.0, -1.0, 3.0), (2.0, 2.5, 1.0)] {
            let g = geodesic(&GeodesicParam::new(phi0, beta), t);
            let a = sr_log(&g, 1e-9).unwrap();
            let b = full_search(&g, &SolveOptions::default()).unwrap();
            assert!((a.distance - b.distance).abs() < 1e-9, "{a:?} {b:?}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let m = Rotation::from_matrix_unchecked(Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0));
        assert!(matches!(sr_log(&m, 1e-9), Err(Error::InvalidRotation { .. })));
        assert!(sr_log(&Rotation::identity(), 0.0).is_err());
    }
}
