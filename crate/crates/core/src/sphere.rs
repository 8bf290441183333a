//! Projection `g ↦ g·e1` of SO(3) onto the unit sphere and the spherical
//! geometry of projected geodesics.
//!
//! The projection of `γ_{(0,β)}` is the circle `x(t) = (1-n, m, βn)` of
//! spherical radius `arccos(|β|/√(1+β²))`. Closing an arc of it with the
//! great-circle chord gives a digon with interior angle `ψ` and area
//! `2ψ - |β|t1`; this module provides both the closed forms and numerical
//! routes (polygon areas, finite-difference curvature, parallel transport)
//! that check them.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geodesic::{geodesic_closed_form, mn, normalize_angle, GeodesicParam, MNCoefficients};
use crate::lie::Rotation;

/// Boundary samples used by [`gauss_bonnet_residual`].
pub const DEFAULT_AREA_SAMPLES: usize = 10_000;

/// Point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S2Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl S2Point {
    pub const E1: S2Point = S2Point { x: 1.0, y: 0.0, z: 0.0 };

    /// Normalizes `(x, y, z)`.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self::from_vector(&Vector3::new(x, y, z))
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        let u = v.normalize();
        S2Point { x: u.x, y: u.y, z: u.z }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    /// Great-circle distance in `[0, π]`.
    pub fn distance(self, other: S2Point) -> f64 {
        let (u, v) = (self.to_vector(), other.to_vector());
        u.cross(&v).norm().atan2(u.dot(&v))
    }
}

/// `R·e1`, the first column of `R`.
pub fn project(r: &Rotation) -> S2Point {
    let c = r.matrix().column(0);
    S2Point { x: c[0], y: c[1], z: c[2] }
}

/// `(β, 0, 1)/√(1+β²)`, the zero-eigenvector of `a + βc`; the projected
/// circle of `γ_{(0,β)}` rotates about this axis.
pub fn circle_center(beta: f64) -> S2Point {
    let w = (1.0 + beta * beta).sqrt();
    S2Point { x: beta / w, y: 0.0, z: 1.0 / w }
}

/// Spherical radius `arccos(|β|/√(1+β²))` of the projected circle, measured
/// from the nearer of the two axis points.
pub fn circle_radius(beta: f64) -> f64 {
    // atan2 form of arccos(|β|/w), accurate at both ends
    1.0f64.atan2(beta.abs())
}

/// Length `α·sin r` of a circular arc of radius `r` and central angle `α`.
pub fn arc_length(r: f64, alpha: f64) -> f64 {
    alpha * r.sin()
}

/// Area `α·(1 - cos r)` of the corresponding sector.
pub fn sector_area(r: f64, alpha: f64) -> f64 {
    // 1 - cos r = 2 sin²(r/2)
    let s = (0.5 * r).sin();
    2.0 * alpha * s * s
}

/// Chord length, interior angle and area of the digon cut off by the chord
/// `[x(0), x(t1)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigonGeometry {
    pub r: f64,
    pub psi: f64,
    pub area: f64,
}

/// Full-turn time `2π/√(1+β²)` of the projected circle.
pub fn full_turn_time(beta: f64) -> f64 {
    TAU / (1.0 + beta * beta).sqrt()
}

/// Interior angle `ψ(t1)` of the digon, from
///
/// ```text
/// cos ψ = √(1+β²)·cos(h) / √(cos² h + β²)
/// sin ψ =      |β|·sin(h) / √(cos² h + β²),   h = t1·√(1+β²)/2
/// ```
///
/// taken through `atan2`, so `ψ ∈ (0, π)` on the whole open interval.
pub fn digon_angle(beta: f64, t1: f64) -> f64 {
    let w = (1.0 + beta * beta).sqrt();
    let (sh, ch) = (0.5 * t1 * w).sin_cos();
    (beta.abs() * sh).atan2(w * ch)
}

/// Chord length `r = arccos(1 - n)` between `x(0)` and `x(t1)`.
pub fn chord_length(beta: f64, t1: f64) -> f64 {
    let MNCoefficients { m, n } = mn(beta, t1);
    m.hypot(beta * n).atan2(1.0 - n)
}

/// Closed-form digon geometry; `t1` must lie strictly inside
/// `(0, 2π/√(1+β²))` and `β ≠ 0`.
pub fn digon(beta: f64, t1: f64) -> Result<DigonGeometry> {
    if !beta.is_finite() {
        return Err(Error::NonFinite("beta"));
    }
    if !t1.is_finite() {
        return Err(Error::NonFinite("t1"));
    }
    if beta == 0.0 {
        return Err(Error::OutOfDomain(
            "digon needs beta != 0 (the beta = 0 projection is a great circle)".into(),
        ));
    }
    let full = full_turn_time(beta);
    if !(t1 > 0.0 && t1 < full) {
        return Err(Error::OutOfDomain(format!(
            "digon needs 0 < t1 < {full}, got {t1} (projection would self-intersect)"
        )));
    }
    let psi = digon_angle(beta, t1);
    Ok(DigonGeometry {
        r: chord_length(beta, t1),
        psi,
        area: 2.0 * psi - beta.abs() * t1,
    })
}

/// `2ψ - |β|t1`, extended to the closed full turn where `ψ = π`.
fn digon_area_formula(beta: f64, t1: f64) -> Result<f64> {
    let full = full_turn_time(beta);
    if beta != 0.0 && (t1 - full).abs() <= 1e-12 * full {
        return Ok(TAU - beta.abs() * t1);
    }
    digon(beta, t1).map(|d| d.area)
}

/// `count` uniformly spaced projected points of `γ_p` on `[0, t_max]`.
pub fn projected_samples(p: &GeodesicParam, t_max: f64, count: usize) -> Vec<S2Point> {
    match count {
        0 => Vec::new(),
        1 => vec![project(&geodesic_closed_form(p, t_max))],
        _ => (0..count)
            .map(|k| {
                let t = t_max * k as f64 / (count - 1) as f64;
                project(&geodesic_closed_form(p, t))
            })
            .collect(),
    }
}

/// Direction in which a sample sequence is traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Forward,
    Reversed,
}

/// Mean signed geodesic curvature of a uniformly sampled curve, by central
/// differences.
///
/// The sign is taken against the normal `T × N` (unit tangent × outward
/// sphere normal), the side a region lies on when the boundary keeps the
/// region on its right. With this convention the projection of `γ_{(0,β)}`
/// has curvature `-|β|` for `β > 0`.
pub fn geodesic_curvature_numeric(samples: &[S2Point], orientation: Orientation) -> Result<f64> {
    const MIN_SAMPLES: usize = 5;
    if samples.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            need: MIN_SAMPLES,
        });
    }
    let pts: Vec<Vector3<f64>> = match orientation {
        Orientation::Forward => samples.iter().map(|p| p.to_vector()).collect(),
        Orientation::Reversed => samples.iter().rev().map(|p| p.to_vector()).collect(),
    };
    let mut total = 0.0;
    for w in pts.windows(3) {
        // the sample spacing cancels between numerator and denominator
        let vel = (w[2] - w[0]) * 0.5;
        let acc = w[2] - w[1] * 2.0 + w[0];
        let normal = w[1];
        total += acc.dot(&vel.cross(&normal)) / vel.norm().powi(3);
    }
    Ok(total / (pts.len() - 2) as f64)
}

/// Signed area of the spherical triangle `(p, q, r)`.
fn triangle_area(p: &Vector3<f64>, q: &Vector3<f64>, r: &Vector3<f64>) -> f64 {
    let det = p.dot(&q.cross(r));
    let den = 1.0 + p.dot(q) + q.dot(r) + r.dot(p);
    2.0 * det.atan2(den)
}

/// Area of the digon bounded by `x([0, t1])` and the chord back to `x(0)`,
/// from a geodesic polygon with `samples` edges along the arc. The
/// triangle fan is anchored at the axis point inside the projected disc.
pub fn numeric_digon_area(beta: f64, t1: f64, samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(Error::TooFewSamples { got: samples, need: 2 });
    }
    let p = GeodesicParam::new(0.0, beta);
    let pts = projected_samples(&p, t1, samples + 1);
    let w = (1.0 + beta * beta).sqrt();
    let sign = if beta < 0.0 { -1.0 } else { 1.0 };
    let anchor = Vector3::new(beta.abs() / w, 0.0, sign / w);

    let mut area = 0.0;
    for k in 0..pts.len() {
        let q = pts[k].to_vector();
        let r = pts[(k + 1) % pts.len()].to_vector();
        area += triangle_area(&anchor, &q, &r);
    }
    Ok(area.abs())
}

/// `|numeric digon area - (2ψ - |β|t1)|` with [`DEFAULT_AREA_SAMPLES`]
/// boundary samples. Accepts `t1` up to and including the full turn.
pub fn gauss_bonnet_residual(beta: f64, t1: f64) -> Result<f64> {
    gauss_bonnet_residual_with(beta, t1, DEFAULT_AREA_SAMPLES)
}

pub fn gauss_bonnet_residual_with(beta: f64, t1: f64, samples: usize) -> Result<f64> {
    let formula = digon_area_formula(beta, t1)?;
    let numeric = numeric_digon_area(beta, t1, samples)?;
    Ok((numeric - formula).abs())
}

/// Largest tangential component of `d/dt[γ(t)·e2]` along the projected
/// curve, over `samples` times in `[0, t1]`. A horizontal curve carries
/// `γ·e2` by parallel transport, so this should vanish up to the
/// finite-difference error.
///
/// # Panics
/// If `samples < 10`.
pub fn transport_defect(p: &GeodesicParam, t1: f64, samples: usize) -> f64 {
    assert!(samples >= 10, "transport_defect needs at least 10 samples");
    let h = t1 / (samples - 1) as f64;
    let frame = |t: f64| {
        let g = geodesic_closed_form(p, t);
        let m = g.matrix();
        (m.column(0).into_owned(), m.column(1).into_owned())
    };
    (0..samples)
        .map(|k| {
            let t = k as f64 * h;
            let (x, _) = frame(t);
            let (_, ahead) = frame(t + h);
            let (_, behind) = frame(t - h);
            let deriv = (ahead - behind) / (2.0 * h);
            (deriv - x * deriv.dot(&x)).norm()
        })
        .fold(0.0, f64::max)
}

/// Levi-Civita transport of `w0` along the projection of `γ_p` over
/// `[0, t_end]`, integrating `w' = -(w·x')x` with RK4 in `steps` steps.
/// Uses only the projected curve, not the frame of `γ`.
pub fn sphere_transport(p: &GeodesicParam, t_end: f64, steps: usize, w0: Vector3<f64>) -> Vector3<f64> {
    let steps = steps.max(1);
    let h = t_end / steps as f64;
    // x(t) and x'(t) = γ(t)(cos φ(t)·e2 + sin φ(t)·e3)
    let curve = |t: f64| {
        let g = geodesic_closed_form(p, t);
        let m = g.matrix();
        let (s, c) = p.phase(t).sin_cos();
        let x = m.column(0).into_owned();
        let v = m.column(1) * c + m.column(2) * s;
        (x, v)
    };
    let rhs = |t: f64, w: &Vector3<f64>| {
        let (x, v) = curve(t);
        -x * w.dot(&v)
    };
    let mut w = w0;
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, &w);
        let k2 = rhs(t + 0.5 * h, &(w + k1 * (0.5 * h)));
        let k3 = rhs(t + 0.5 * h, &(w + k2 * (0.5 * h)));
        let k4 = rhs(t + h, &(w + k3 * h));
        w += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    }
    w
}

/// Rotation angle in `[0, 2π)` of `e2` after transport once around the
/// projected circle of `γ_{(0,β)}`, measured counter-clockwise about the
/// outward normal `e1`.
pub fn holonomy_angle(beta: f64, steps: usize) -> f64 {
    let p = GeodesicParam::new(0.0, beta);
    let w = sphere_transport(&p, full_turn_time(beta), steps, Vector3::y());
    let e1 = Vector3::x();
    let e2 = Vector3::y();
    normalize_angle(e1.dot(&e2.cross(&w)).atan2(e2.dot(&w)))
}

/// Area `2π(1 - |β|/√(1+β²))` of the disc bounded by the projected circle.
pub fn disc_area(beta: f64) -> f64 {
    sector_area(circle_radius(beta), TAU)
}

/// Half-turn time `π/√(1+β²)`; the digon angle is at most `π/2` up to it.
pub fn half_turn_time(beta: f64) -> f64 {
    PI / (1.0 + beta * beta).sqrt()
}
