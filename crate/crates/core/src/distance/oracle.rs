//! Brute-force upper bound on the distance from horizontal polygons.
//!
//! A path made of `N` constant-heading pieces ends at
//! `∏ exp(ℓ_i (cos θ_i·a + sin θ_i·b))` and has length `Σ|ℓ_i|`. Each
//! restart starts from a random polygon, is pulled onto the constraint
//! `endpoint = g` by minimum-norm Gauss–Newton, and then shortened along the
//! constraint by reduced Newton steps. The shortest feasible
//! polygon over all restarts is the bound. Nothing here uses the geodesic
//! formulas.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lie::{adjoint, bracket, exp, log_unchecked, LieVector, Rotation};

/// Endpoint mismatch a polygon must reach to count.
pub const FEASIBLE_MISMATCH: f64 = 1e-6;

const MAX_NEWTON_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBound {
    /// Length of the best polygon found.
    pub length: f64,
    /// `‖log(endpoint⁻¹·g)‖` of that polygon.
    pub mismatch: f64,
}

impl OracleBound {
    pub fn feasible(&self) -> bool {
        self.mismatch <= FEASIBLE_MISMATCH
    }
}

/// Upper bound on `d(e, g)` from `budget` restarts over polygons with
/// `segments` pieces. Equal seeds give identical results regardless of
/// thread count. If no restart gets within [`FEASIBLE_MISMATCH`] the
/// least-mismatched polygon is reported.
pub fn brute_force_distance(g: &Rotation, segments: usize, budget: usize, seed: u64) -> Result<OracleBound> {
    if !(4..=32).contains(&segments) {
        return Err(Error::OutOfDomain(format!("segments must lie in [4, 32], got {segments}")));
    }
    if budget == 0 {
        return Err(Error::OutOfDomain("budget must be at least 1".into()));
    }
    let runs: Vec<OracleBound> = (0..budget)
        .into_par_iter()
        .map(|k| restart(g, segments, seed, k as u64))
        .collect();

    let best_feasible = runs
        .iter()
        .filter(|r| r.feasible())
        .min_by(|a, b| a.length.total_cmp(&b.length));
    Ok(match best_feasible {
        Some(r) => *r,
        None => *runs
            .iter()
            .min_by(|a, b| a.mismatch.total_cmp(&b.mismatch))
            .expect("budget >= 1"),
    })
}

/// Variables a restart moves through, with the endpoint map linearized.
trait Chart: Sized {
    fn shifted(&self, dx: &DVector<f64>) -> Self;
    /// `log(g⁻¹·P)` and its Jacobian.
    fn linearize(&self, g_inv: &Rotation) -> (Vector3<f64>, DMatrix<f64>);
    fn length(&self) -> f64;
}

/// Raw pieces `(ℓ_i, θ_i)`; lengths may go negative while restoring.
#[derive(Clone)]
struct Polygon {
    len: Vec<f64>,
    heading: Vec<f64>,
}

impl Polygon {
    fn n(&self) -> usize {
        self.len.len()
    }

    fn pieces(&self) -> Vec<Rotation> {
        self.len
            .iter()
            .zip(&self.heading)
            .map(|(&l, &th)| exp(l * LieVector::horizontal(th)))
            .collect()
    }

    fn endpoint(&self) -> Rotation {
        self.pieces().into_iter().fold(Rotation::identity(), |acc, p| acc * p)
    }

    /// `ℓ < 0` with heading `θ` is the same piece as `-ℓ` with `θ + π`.
    fn canonicalize(&mut self) {
        for (l, th) in self.len.iter_mut().zip(self.heading.iter_mut()) {
            if *l < 0.0 {
                *l = -*l;
                *th += PI;
            }
            *th = th.rem_euclid(TAU);
        }
    }

    /// Mismatch and the `3 × 2N` Jacobian (lengths first, then headings).
    fn linearize_pieces(&self, g_inv: &Rotation) -> (Vector3<f64>, DMatrix<f64>) {
        let n = self.n();
        let pieces = self.pieces();
        let mut suffix = vec![Rotation::identity(); n + 1];
        for i in (0..n).rev() {
            suffix[i] = pieces[i] * suffix[i + 1];
        }
        let r = log_unchecked(&(*g_inv * suffix[0]));
        let fix = inverse_right_jacobian(r);
        let c = LieVector::new(0.0, 0.0, 1.0);
        let mut j = DMatrix::zeros(3, 2 * n);
        for i in 0..n {
            // P⁻¹ ∂P = Ad(S_i⁻¹)(A_i⁻¹ ∂A_i) with S_i the product after piece i
            let s_inv = suffix[i + 1].inverse();
            let d_len = adjoint(&s_inv, LieVector::horizontal(self.heading[i]));
            let d_head = adjoint(&s_inv, adjoint(&pieces[i].inverse(), c) - c);
            j.set_column(i, &(fix * Vector3::from(d_len.to_array())));
            j.set_column(n + i, &(fix * Vector3::from(d_head.to_array())));
        }
        (Vector3::from(r.to_array()), j)
    }
}

impl Chart for Polygon {
    fn shifted(&self, dx: &DVector<f64>) -> Polygon {
        let n = self.n();
        Polygon {
            len: (0..n).map(|i| self.len[i] + dx[i]).collect(),
            heading: (0..n).map(|i| self.heading[i] + dx[n + i]).collect(),
        }
    }

    fn linearize(&self, g_inv: &Rotation) -> (Vector3<f64>, DMatrix<f64>) {
        self.linearize_pieces(g_inv)
    }

    fn length(&self) -> f64 {
        self.len.iter().map(|l| l.abs()).sum()
    }
}

/// Total length `L`, length shares `softmax(s)` and headings: the length is
/// a smooth (linear) function of the variables and pieces stay positive.
#[derive(Clone)]
struct Shape {
    total: f64,
    logits: Vec<f64>,
    heading: Vec<f64>,
}

impl Shape {
    fn from_polygon(p: &Polygon) -> Shape {
        let total: f64 = p.len.iter().sum();
        let floor = 1e-9 * total.max(1e-300);
        Shape {
            total,
            logits: p.len.iter().map(|&l| l.max(floor).ln()).collect(),
            heading: p.heading.clone(),
        }
    }

    fn shares(&self) -> Vec<f64> {
        let top = self.logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = self.logits.iter().map(|s| (s - top).exp()).collect();
        let sum: f64 = e.iter().sum();
        e.into_iter().map(|x| x / sum).collect()
    }

    fn polygon(&self) -> Polygon {
        Polygon {
            len: self.shares().iter().map(|p| self.total * p).collect(),
            heading: self.heading.clone(),
        }
    }
}

impl Chart for Shape {
    fn shifted(&self, dx: &DVector<f64>) -> Shape {
        let n = self.logits.len();
        Shape {
            total: self.total + dx[0],
            logits: (0..n).map(|i| self.logits[i] + dx[1 + i]).collect(),
            heading: (0..n).map(|i| self.heading[i] + dx[1 + n + i]).collect(),
        }
    }

    /// Chain rule through `ℓ_i = L·p_i`, `∂p_i/∂s_k = p_i(δ_ik - p_k)`.
    fn linearize(&self, g_inv: &Rotation) -> (Vector3<f64>, DMatrix<f64>) {
        let n = self.logits.len();
        let p = self.shares();
        let (r, jp) = self.polygon().linearize_pieces(g_inv);
        let mut j = DMatrix::zeros(3, 2 * n + 1);
        let mut weighted = Vector3::zeros();
        for i in 0..n {
            weighted += p[i] * jp.fixed_view::<3, 1>(0, i);
        }
        j.set_column(0, &weighted);
        for k in 0..n {
            let col = self.total * p[k] * (jp.fixed_view::<3, 1>(0, k) - weighted);
            j.set_column(1 + k, &col);
            j.set_column(1 + n + k, &jp.column(n + k));
        }
        (r, j)
    }

    fn length(&self) -> f64 {
        self.total
    }
}

fn inverse_right_jacobian(r: LieVector) -> Matrix3<f64> {
    let theta = r.norm();
    let unit = [LieVector::new(1.0, 0.0, 0.0), LieVector::new(0.0, 1.0, 0.0), LieVector::new(0.0, 0.0, 1.0)];
    let k = Matrix3::from_fn(|i, j| bracket(r, unit[j]).to_array()[i]);
    let coef = if theta < 1e-4 {
        1.0 / 12.0
    } else {
        1.0 / (theta * theta) - (1.0 + theta.cos()) / (2.0 * theta * theta.sin())
    };
    Matrix3::identity() + 0.5 * k + coef * k * k
}

fn gram_inverse_apply(j: &DMatrix<f64>, v: &Vector3<f64>) -> Option<Vector3<f64>> {
    let jjt = Matrix3::from_iterator((j * j.transpose()).iter().copied());
    jjt.lu().solve(v)
}

/// Minimum-norm step `-Jᵀ(JJᵀ)⁻¹ r`.
fn min_norm_step(r: &Vector3<f64>, j: &DMatrix<f64>) -> Option<DVector<f64>> {
    let y = gram_inverse_apply(j, r)?;
    Some(-(j.transpose() * DVector::from_column_slice(y.as_slice())))
}

/// Gauss–Newton onto `P = g` with backtracking; returns the final mismatch.
fn restore<C: Chart>(x: &mut C, g_inv: &Rotation, target: f64, max_iter: usize) -> f64 {
    let (mut r, mut j) = x.linearize(g_inv);
    let mut nr = r.norm();
    for _ in 0..max_iter {
        if nr <= target {
            break;
        }
        let Some(step) = min_norm_step(&r, &j) else { break };
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial = x.shifted(&(scale * &step));
            let (rt, jt) = trial.linearize(g_inv);
            if rt.norm() < nr {
                *x = trial;
                r = rt;
                j = jt;
                nr = r.norm();
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    nr
}

/// Orthonormal basis (columns) of the null space of the `3 × m` matrix `j`.
fn null_space(j: &DMatrix<f64>) -> DMatrix<f64> {
    let m = j.ncols();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m);
    let push = |mut v: DVector<f64>, basis: &mut Vec<DVector<f64>>| {
        for _ in 0..2 {
            for b in basis.iter() {
                let d = b.dot(&v);
                v -= d * b;
            }
        }
        let nv = v.norm();
        if nv > 0.3 {
            basis.push(v / nv);
            true
        } else {
            false
        }
    };
    let mut rank = 0;
    for i in 0..3 {
        let row = j.row(i).transpose();
        let scale = row.norm();
        if scale > 0.0 && push(row / scale, &mut basis) {
            rank += 1;
        }
    }
    for k in 0..m {
        if basis.len() == m {
            break;
        }
        push(DVector::from_fn(m, |i, _| if i == k { 1.0 } else { 0.0 }), &mut basis);
    }
    DMatrix::from_columns(&basis[rank..])
}

/// Newton on the total length restricted to `P = g`: multipliers by least
/// squares, Lagrangian Hessian by central differences of `Jᵀλ`, reduced to
/// the null space of `J`, eigenvalues replaced by their magnitudes.
fn descend(x: &mut Shape, g_inv: &Rotation) {
    let dim = 2 * x.logits.len() + 1;
    let mut grad = DVector::zeros(dim);
    grad[0] = 1.0;
    for _ in 0..MAX_NEWTON_STEPS {
        let (_, j) = x.linearize(g_inv);
        let jg = Vector3::new(j[(0, 0)], j[(1, 0)], j[(2, 0)]);
        let Some(y) = gram_inverse_apply(&j, &jg) else { break };
        let lambda = DVector::from_column_slice((-y).as_slice());
        let lagrange_grad = &grad + j.transpose() * &lambda;
        if lagrange_grad.norm() < 1e-11 {
            break;
        }

        let eps = 1e-6;
        let mut w = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let mut dx = DVector::zeros(dim);
            dx[k] = eps;
            let (_, jp) = x.shifted(&dx).linearize(g_inv);
            let (_, jm) = x.shifted(&(-dx)).linearize(g_inv);
            w.set_column(k, &((jp - jm).transpose() * &lambda / (2.0 * eps)));
        }
        let w = 0.5 * (&w + w.transpose());
        let z = null_space(&j);
        let gz = z.transpose() * &lagrange_grad;
        let eig = (z.transpose() * &w * &z).symmetric_eigen();
        let top = eig.eigenvalues.amax().max(1e-12);
        let mut dz = DVector::zeros(gz.len());
        for (k, &e) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            dz -= v * (v.dot(&gz) / e.abs().max(1e-8 * top));
        }
        let mut delta = &z * dz;
        let cap = 0.5 + 0.5 * x.total;
        if delta.norm() > cap {
            delta *= cap / delta.norm();
        }

        let length = x.total;
        let mut scale = 1.0;
        let mut progress = None;
        for _ in 0..25 {
            let mut trial = x.shifted(&(scale * &delta));
            if restore(&mut trial, g_inv, 1e-13, 10) <= 1e-11 && trial.total < length {
                progress = Some(length - trial.total);
                *x = trial;
                break;
            }
            scale *= 0.5;
        }
        match progress {
            Some(p) if p > 1e-14 => {}
            _ => break,
        }
    }
}

fn initial_polygon(rng: &mut ChaCha8Rng, n: usize, total: f64, kind: u64) -> Polygon {
    if kind == 3 {
        return Polygon {
            len: (0..n).map(|_| rng.gen_range(0.0..2.0 * total / n as f64)).collect(),
            heading: (0..n).map(|_| rng.gen_range(0.0..TAU)).collect(),
        };
    }
    // constant turning rate, jittered for kinds 1 and 2
    let start = rng.gen_range(0.0..TAU);
    let turn = rng.gen_range(-1.45f64..1.45).tan();
    let jitter = if kind == 0 { 0.0 } else { 0.3 };
    let step = total / n as f64;
    Polygon {
        len: (0..n).map(|_| step * (1.0 + jitter * rng.gen_range(-1.0..1.0))).collect(),
        heading: (0..n)
            .map(|i| start + turn * step * (i as f64 + 0.5) + jitter * rng.gen_range(-1.0..1.0))
            .collect(),
    }
}

fn restart(g: &Rotation, n: usize, seed: u64, stream: u64) -> OracleBound {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let g_inv = g.inverse();

    let lo = g.angle();
    let hi = PI * 3f64.sqrt() + 0.5;
    let total = rng.gen_range(lo..=hi.max(lo));
    let mut poly = initial_polygon(&mut rng, n, total, stream % 4);

    if restore(&mut poly, &g_inv, 1e-13, 100) <= 1e-9 {
        poly.canonicalize();
        let mut shape = Shape::from_polygon(&poly);
        if restore(&mut shape, &g_inv, 1e-13, 20) <= 1e-11 {
            descend(&mut shape, &g_inv);
            restore(&mut shape, &g_inv, 1e-14, 20);
            poly = shape.polygon();
        }
    }
    OracleBound {
        length: poly.length(),
        mismatch: poly.endpoint().angle_to(g),
    }
}
