//! The Lie algebra so(3) in the basis
//!
//! ```text
//! a = e21 - e12,   b = e31 - e13,   c = e32 - e23
//! ```
//!
//! with `[a,b] = c`, `[b,c] = a`, `[c,a] = b`, and the group SO(3) of 3×3
//! rotation matrices. In `(a, b, c)` coefficients the bracket is the plain
//! cross product and `ad(X)` is the usual hat matrix of the coefficient
//! vector. The matrix of `X` itself is not that hat matrix: the standard
//! angular-velocity vector of `X = xa·a + xb·b + xc·c` is `(xc, -xb, xa)`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Default tolerance for accepting a user-supplied matrix as a rotation.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// Below this angle `exp` uses Taylor expansions of its coefficients.
const EXP_TAYLOR_ANGLE: f64 = 1e-4;

/// `log` switches to the symmetric-part axis extraction once
/// `trace(R) <= -1 + LOG_PI_BAND`.
const LOG_PI_BAND: f64 = 1e-6;

/// Element of so(3) as coefficients on the basis `a`, `b`, `c`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LieVector {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LieVector {
    pub const ZERO: LieVector = LieVector { a: 0.0, b: 0.0, c: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        LieVector { a, b, c }
    }

    /// Horizontal unit vector `cos θ·a + sin θ·b`.
    pub fn horizontal(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        LieVector::new(c, s, 0.0)
    }

    /// Skew-symmetric matrix `xa·a + xb·b + xc·c`.
    pub fn to_matrix(self) -> Matrix3<f64> {
        let LieVector { a, b, c } = self;
        Matrix3::new(
            0.0, -a, -b, //
            a, 0.0, -c, //
            b, c, 0.0,
        )
    }

    /// Coefficients of the skew-symmetric part of `m`.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        LieVector::new(
            0.5 * (m[(1, 0)] - m[(0, 1)]),
            0.5 * (m[(2, 0)] - m[(0, 2)]),
            0.5 * (m[(2, 1)] - m[(1, 2)]),
        )
    }

    /// Standard angular-velocity vector of the matrix, `(xc, -xb, xa)`.
    pub fn to_axis_vector(self) -> Vector3<f64> {
        Vector3::new(self.c, -self.b, self.a)
    }

    /// Inverse of [`LieVector::to_axis_vector`].
    pub fn from_axis_vector(w: &Vector3<f64>) -> Self {
        LieVector::new(w.z, -w.y, w.x)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn dot(self, other: LieVector) -> f64 {
        self.a * other.a + self.b * other.b + self.c * other.c
    }

    /// Euclidean norm of the coefficient vector. On the horizontal plane this
    /// is the sub-Riemannian norm (a, b orthonormal).
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Norm of the `(a, b)` part.
    pub fn horizontal_norm(self) -> f64 {
        self.a.hypot(self.b)
    }
}

impl Add for LieVector {
    type Output = LieVector;
    fn add(self, o: LieVector) -> LieVector {
        LieVector::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }
}

impl Sub for LieVector {
    type Output = LieVector;
    fn sub(self, o: LieVector) -> LieVector {
        LieVector::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }
}

impl Neg for LieVector {
    type Output = LieVector;
    fn neg(self) -> LieVector {
        LieVector::new(-self.a, -self.b, -self.c)
    }
}

impl Mul<LieVector> for f64 {
    type Output = LieVector;
    fn mul(self, v: LieVector) -> LieVector {
        LieVector::new(self * v.a, self * v.b, self * v.c)
    }
}

impl Mul<f64> for LieVector {
    type Output = LieVector;
    fn mul(self, s: f64) -> LieVector {
        s * self
    }
}

/// A 3×3 rotation matrix.
///
/// Matrices built by this crate are rotations to rounding error. Matrices
/// coming from outside go through [`Rotation::try_new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Validates `m` against [`ORTHOGONALITY_TOL`].
    pub fn try_new(m: Matrix3<f64>) -> Result<Self> {
        Self::try_new_with_tol(m, ORTHOGONALITY_TOL)
    }

    pub fn try_new_with_tol(m: Matrix3<f64>, tol: f64) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("rotation entries"));
        }
        let defect = rotation_defect(&m);
        if defect > tol {
            return Err(Error::InvalidRotation { defect, tol });
        }
        Ok(Rotation(m))
    }

    /// Validates within `tol`, then snaps to the nearest rotation (polar
    /// factor) so downstream invariants hold at rounding level.
    pub fn try_new_orthonormalized(m: Matrix3<f64>, tol: f64) -> Result<Self> {
        let r = Self::try_new_with_tol(m, tol)?;
        Ok(r.reorthonormalized())
    }

    /// Wraps `m` without checking.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    /// Row-major entries `r11, r12, ..., r33`.
    pub fn from_row_major(entries: [f64; 9]) -> Result<Self> {
        Self::try_new(Matrix3::from_row_slice(&entries))
    }

    /// Rotation by `angle` about `axis` (any non-zero vector of ℝ³,
    /// right-hand rule).
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self> {
        let w = Vector3::from(axis);
        let len = w.norm();
        if !len.is_finite() || !angle.is_finite() {
            return Err(Error::NonFinite("axis-angle"));
        }
        if len == 0.0 {
            return Err(Error::OutOfDomain("rotation axis must be non-zero".into()));
        }
        Ok(exp(LieVector::from_axis_vector(&(w * (angle / len)))))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    pub fn inverse(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Max-entry defect of `RᵀR = I` and `det R = 1`.
    pub fn defect(&self) -> f64 {
        rotation_defect(&self.0)
    }

    /// One Newton–Schulz step towards the polar factor, `R(3I - RᵀR)/2`.
    pub fn reorthonormalized(&self) -> Self {
        let m = &self.0;
        let mut r = m * (Matrix3::identity() * 3.0 - m.transpose() * m) * 0.5;
        // second pass only matters for inputs far from orthogonal
        if rotation_defect(&r) > 1e-14 {
            r = r * (Matrix3::identity() * 3.0 - r.transpose() * r) * 0.5;
        }
        Rotation(r)
    }

    /// Bi-invariant angle between two rotations, `‖log(self⁻¹·other)‖`.
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        log_unchecked(&(self.inverse() * *other)).norm()
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        rotation_angle(&self.0)
    }

    /// Max-entry difference.
    pub fn max_abs_diff(&self, other: &Rotation) -> f64 {
        (self.0 - other.0).amax()
    }

    /// Unit quaternion `(w, x, y, z)` with `w >= 0` of the rotation.
    pub fn to_quaternion(&self) -> [f64; 4] {
        let m = &self.0;
        let tr = m.trace();
        let q = if tr > 0.0 {
            let s = 2.0 * (1.0 + tr).sqrt();
            [
                0.25 * s,
                (m[(2, 1)] - m[(1, 2)]) / s,
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(1, 0)] - m[(0, 1)]) / s,
            ]
        } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
            let s = 2.0 * (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt();
            [
                (m[(2, 1)] - m[(1, 2)]) / s,
                0.25 * s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
            ]
        } else if m[(1, 1)] > m[(2, 2)] {
            let s = 2.0 * (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt();
            [
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                0.25 * s,
                (m[(1, 2)] + m[(2, 1)]) / s,
            ]
        } else {
            let s = 2.0 * (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt();
            [
                (m[(1, 0)] - m[(0, 1)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
                (m[(1, 2)] + m[(2, 1)]) / s,
                0.25 * s,
            ]
        };
        let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sign = if q[0] < 0.0 { -1.0 } else { 1.0 };
        q.map(|x| sign * x / norm)
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        for i in 0..3 {
            writeln!(f, "[{:+.12} {:+.12} {:+.12}]", m[(i, 0)], m[(i, 1)], m[(i, 2)])?;
        }
        Ok(())
    }
}

fn rotation_defect(m: &Matrix3<f64>) -> f64 {
    let gram = (m.transpose() * m - Matrix3::identity()).amax();
    gram.max((m.determinant() - 1.0).abs())
}

fn rotation_angle(m: &Matrix3<f64>) -> f64 {
    let s = LieVector::from_matrix(m).norm();
    let c = 0.5 * (m.trace() - 1.0);
    s.atan2(c)
}

/// The basis `(a, b, c)`.
pub fn basis() -> (LieVector, LieVector, LieVector) {
    (
        LieVector::new(1.0, 0.0, 0.0),
        LieVector::new(0.0, 1.0, 0.0),
        LieVector::new(0.0, 0.0, 1.0),
    )
}

/// `[X, Y] = XY - YX`.
pub fn bracket(x: LieVector, y: LieVector) -> LieVector {
    LieVector::new(
        x.b * y.c - x.c * y.b,
        x.c * y.a - x.a * y.c,
        x.a * y.b - x.b * y.a,
    )
}

/// Matrix of `ad(X) = [X, ·]` acting on `(a, b, c)` coefficient columns.
pub fn ad_matrix(x: LieVector) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -x.c, x.b, //
        x.c, 0.0, -x.a, //
        -x.b, x.a, 0.0,
    )
}

/// Matrix exponential of `X` (Rodrigues).
pub fn exp(x: LieVector) -> Rotation {
    let theta2 = x.dot(x);
    let theta = theta2.sqrt();
    let (s_coef, c_coef) = if theta < EXP_TAYLOR_ANGLE {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        let half = 0.5 * theta;
        let sh = half.sin() / half;
        (theta.sin() / theta, 0.5 * sh * sh)
    };
    let k = x.to_matrix();
    Rotation(Matrix3::identity() + k * s_coef + k * k * c_coef)
}

/// Principal logarithm with coefficient norm in `[0, π]`; rejects matrices
/// that are not rotations within [`ORTHOGONALITY_TOL`].
pub fn log(r: &Rotation) -> Result<LieVector> {
    log_with_tol(r, ORTHOGONALITY_TOL)
}

pub fn log_with_tol(r: &Rotation, tol: f64) -> Result<LieVector> {
    let defect = r.defect();
    if !(defect <= tol) {
        return Err(Error::InvalidRotation { defect, tol });
    }
    Ok(log_unchecked(r))
}

/// [`log`] without validation, for matrices produced inside the crate.
///
/// At angle π the axis sign is ambiguous; the representative whose first
/// non-zero coefficient (in `a, b, c` order) is positive is returned.
pub fn log_unchecked(r: &Rotation) -> LieVector {
    let m = &r.0;
    let skew = LieVector::from_matrix(m);
    let sin = skew.norm();
    let tr = m.trace();
    let cos = (0.5 * (tr - 1.0)).clamp(-1.0, 1.0);
    let theta = sin.atan2(cos);

    if tr > -1.0 + LOG_PI_BAND {
        // theta / sin(theta), series below 1e-4
        let scale = if theta < EXP_TAYLOR_ANGLE {
            1.0 + theta * theta / 6.0
        } else {
            theta / sin
        };
        return skew * scale;
    }

    // (R + Rᵀ)/2 - cos θ·I = (1 - cos θ)·k kᵀ for the unit axis k of ℝ³.
    let one_minus_cos = 1.0 - cos;
    let sym = (m + m.transpose()) * 0.5 - Matrix3::identity() * cos;
    let j = (0..3)
        .max_by(|&i, &k| sym[(i, i)].total_cmp(&sym[(k, k)]))
        .unwrap_or(0);
    let kj = (sym[(j, j)].max(0.0) / one_minus_cos).sqrt();
    let mut axis = Vector3::zeros();
    for i in 0..3 {
        axis[i] = if i == j { kj } else { sym[(i, j)] / (one_minus_cos * kj) };
    }
    let axis = axis.normalize();
    let mut v = LieVector::from_axis_vector(&axis);

    let aligned = v.dot(skew);
    if aligned < 0.0 || (aligned == 0.0 && !leading_nonnegative(v)) {
        v = -v;
    }
    theta.min(PI) * v
}

fn leading_nonnegative(v: LieVector) -> bool {
    for x in v.to_array() {
        if x != 0.0 {
            return x > 0.0;
        }
    }
    true
}

/// `Ad(g)X = g X g⁻¹`, in coefficients.
pub fn adjoint(g: &Rotation, x: LieVector) -> LieVector {
    let m = g.0 * x.to_matrix() * g.0.transpose();
    LieVector::from_matrix(&m)
}

/// `exp(θ·c)`, the SO(2) element rotating about `e1` by `θ`.
pub fn fiber_rotation(theta: f64) -> Rotation {
    let (s, c) = theta.sin_cos();
    Rotation(Matrix3::new(
        1.0, 0.0, 0.0, //
        0.0, c, -s, //
        0.0, s, c,
    ))
}
