//! Unit-speed geodesics from the identity.
//!
//! Every arclength-parametrized geodesic with `γ(0) = e` is
//!
//! ```text
//! γ(t) = exp(t(cos φ0·a + sin φ0·b + β·c)) · exp(-tβ·c)
//! ```
//!
//! with horizontal control `u(t) = cos(βt + φ0)·a + sin(βt + φ0)·b`.
//! [`geodesic_closed_form`] is the evaluator used everywhere else;
//! [`geodesic_product`] and [`geodesic_ode`] exist to check it.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix3;

use crate::lie::{self, fiber_rotation, LieVector, Rotation};

/// Initial heading `φ0` (normalized to `[0, 2π)`) and vertical momentum `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicParam {
    phi0: f64,
    beta: f64,
}

impl GeodesicParam {
    /// # Panics
    /// If either argument is not finite.
    pub fn new(phi0: f64, beta: f64) -> Self {
        assert!(phi0.is_finite(), "phi0 must be finite");
        assert!(beta.is_finite(), "beta must be finite");
        GeodesicParam {
            phi0: normalize_angle(phi0),
            beta,
        }
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Heading `βt + φ0` of the control at time `t`.
    pub fn phase(&self, t: f64) -> f64 {
        self.beta * t + self.phi0
    }

    /// Horizontal control `u(t)`.
    pub fn control(&self, t: f64) -> LieVector {
        LieVector::horizontal(self.phase(t))
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `m = sin(tω)/ω`, `n = (1 - cos(tω))/ω²` with `ω = √(1+β²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MNCoefficients {
    pub m: f64,
    pub n: f64,
}

pub fn mn(beta: f64, t: f64) -> MNCoefficients {
    let w2 = 1.0 + beta * beta;
    let w = w2.sqrt();
    let half = 0.5 * t * w;
    let sh = half.sin();
    MNCoefficients {
        m: (t * w).sin() / w,
        n: 2.0 * sh * sh / w2,
    }
}

/// `exp(t(cos φ0·a + sin φ0·b + β·c))·exp(-tβ·c)`, evaluated literally.
pub fn geodesic_product(p: &GeodesicParam, t: f64) -> Rotation {
    let (s, c) = p.phi0.sin_cos();
    let generator = LieVector::new(c, s, p.beta);
    lie::exp(t * generator) * lie::exp(LieVector::new(0.0, 0.0, -t * p.beta))
}

/// Explicit matrix of the geodesic in terms of `m`, `n`, `β`, `φ0` and the
/// phase `βt + φ0`.
pub fn geodesic_closed_form(p: &GeodesicParam, t: f64) -> Rotation {
    let beta = p.beta;
    let MNCoefficients { m, n } = mn(beta, t);
    let (s0, c0) = p.phi0.sin_cos();
    let (sp, cp) = p.phase(t).sin_cos();
    let (sb, cb) = (beta * t).sin_cos();
    let q = 1.0 - beta * beta * n;

    Rotation::from_matrix_unchecked(Matrix3::new(
        1.0 - n,
        -m * cp - beta * n * sp,
        -m * sp + beta * n * cp,
        //
        m * c0 - beta * n * s0,
        q * cb + beta * m * sb - n * cp * c0,
        q * sb - beta * m * cb - n * sp * c0,
        //
        m * s0 + beta * n * c0,
        beta * m * cb - q * sb - n * cp * s0,
        q * cb + beta * m * sb - n * sp * s0,
    ))
}

/// The canonical geodesic evaluator.
#[inline]
pub fn geodesic(p: &GeodesicParam, t: f64) -> Rotation {
    geodesic_closed_form(p, t)
}

/// Classical RK4 on `γ' = γ·u(s)` from `γ(0) = I`, re-projected to SO(3)
/// after every step. The step is shrunk so that it divides `|t|` evenly.
///
/// # Panics
/// If `step` is not positive.
pub fn geodesic_ode(p: &GeodesicParam, t: f64, step: f64) -> Rotation {
    assert!(step > 0.0, "step must be positive");
    if t == 0.0 {
        return Rotation::identity();
    }
    let steps = (t.abs() / step).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let rhs = |g: &Matrix3<f64>, s: f64| g * p.control(s).to_matrix();

    let mut g: Matrix3<f64> = Matrix3::identity();
    for i in 0..steps {
        let s = i as f64 * h;
        let k1 = rhs(&g, s);
        let k2 = rhs(&(g + k1 * (0.5 * h)), s + 0.5 * h);
        let k3 = rhs(&(g + k2 * (0.5 * h)), s + 0.5 * h);
        let k4 = rhs(&(g + k3 * h), s + h);
        g += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        g = *Rotation::from_matrix_unchecked(g).reorthonormalized().matrix();
    }
    Rotation::from_matrix_unchecked(g)
}

/// Parameters of the geodesic `s ↦ γ(t0)⁻¹·γ(t0 + s)`.
pub fn restart(p: &GeodesicParam, t0: f64) -> GeodesicParam {
    GeodesicParam::new(p.phase(t0), p.beta)
}

/// Flipping the sign of `β` is the same as flipping the sign of `t` and
/// turning the heading by `π`: `γ_{(φ0+π, -β)}(-t) = γ_{(φ0, β)}(t)`.
pub fn reverse_sign(p: &GeodesicParam, t: f64) -> (GeodesicParam, f64) {
    (GeodesicParam::new(p.phi0 + PI, -p.beta), -t)
}

/// `B·γ_{(0,β)}(t)·B⁻¹` with `B = exp(φ0·c)`; equals `γ_{(φ0,β)}(t)`.
///
/// # Panics
/// If `base` does not have `φ0 = 0`.
pub fn conjugate_phase(base: &GeodesicParam, phi0: f64, t: f64) -> Rotation {
    assert!(base.phi0 == 0.0, "base geodesic must start with heading 0");
    let b = fiber_rotation(phi0);
    b * geodesic_closed_form(base, t) * b.inverse()
}
