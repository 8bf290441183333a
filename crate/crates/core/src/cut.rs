//! Cut times, the diameter and the cut/conjugate loci of the identity.
//!
//! The cut time `t1(β)` of `γ_{(φ0,β)}` does not depend on `φ0`:
//!
//! * `β = 0`: `t1 = π` (the projection reaches the antipode `-e1`);
//! * `|β| ≥ 1/√3`: `t1 = 2π/√(1+β²)`, one full turn of the projected circle,
//!   ending in SO(2);
//! * `0 < |β| < 1/√3`: the unique `t1 ∈ (π/√(1+β²), 2π/√(1+β²))` where the
//!   digon area `2ψ - |β|t1` equals `π`.
//!
//! `t1` increases on `[0, 1/√3]` and decreases afterwards, so the diameter
//! is `t1(1/√3) = π√3`. Approaching the peak from below `t1` behaves like
//! a cube root of the distance to `1/√3`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geodesic::{geodesic_closed_form, normalize_angle, GeodesicParam};
use crate::lie::{log_unchecked, Rotation};
use crate::sphere::{digon_angle, full_turn_time, half_turn_time};
use crate::CRITICAL_BETA;

const BISECTION_STEPS: usize = 100;

/// Slack (in ulps of 1/√3) inside which `|β|` counts as sitting on the
/// branch boundary; `1.0 / 3f64.sqrt()` and the rounded constant differ by
/// an ulp.
const BOUNDARY_SLACK: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `|β| ≥ 1/√3`: one full turn, endpoint in SO(2).
    FullCircle,
    /// `0 < |β| < 1/√3`: digon of area `π`.
    DigonPi,
    /// `β = 0`.
    BetaZero,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::FullCircle => "full_circle",
            Branch::DigonPi => "digon_pi",
            Branch::BetaZero => "beta_zero",
        }
    }
}

/// End of the shortest arc `γ_{(0,β)}|[0, t1(β)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutPoint {
    pub beta: f64,
    pub t1: f64,
    pub endpoint: Rotation,
    pub branch: Branch,
}

pub fn branch_of(beta: f64) -> Branch {
    if beta == 0.0 {
        Branch::BetaZero
    } else if beta.abs() >= CRITICAL_BETA * (1.0 - BOUNDARY_SLACK) {
        Branch::FullCircle
    } else {
        Branch::DigonPi
    }
}

/// `F(t) = 2ψ(t) - |β|t - π`; its root in the digon bracket is the cut time.
pub fn digon_root_function(beta: f64, t: f64) -> f64 {
    2.0 * digon_angle(beta, t) - beta.abs() * t - PI
}

/// Cut time only.
pub fn cut_length(beta: f64) -> Result<f64> {
    if !beta.is_finite() {
        return Err(Error::NonFinite("beta"));
    }
    Ok(match branch_of(beta) {
        Branch::BetaZero => PI,
        Branch::FullCircle => full_turn_time(beta),
        Branch::DigonPi => digon_cut_time(beta),
    })
}

fn digon_cut_time(beta: f64) -> f64 {
    let mut lo = half_turn_time(beta);
    let mut hi = full_turn_time(beta);
    // endpoint values in closed form (ψ = π/2 and ψ = π); evaluating them
    // numerically can land on the wrong side of the ψ = π branch cut
    let w = (1.0 + beta * beta).sqrt();
    let mut f_lo = -PI * beta.abs() / w;
    let mut f_hi = PI * (1.0 - 2.0 * beta.abs() / w);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = digon_root_function(beta, mid);
        if f < 0.0 {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    if f_hi.abs() < f_lo.abs() {
        hi
    } else {
        lo
    }
}

pub fn cut_time(beta: f64) -> Result<CutPoint> {
    let t1 = cut_length(beta)?;
    Ok(CutPoint {
        beta,
        t1,
        endpoint: geodesic_closed_form(&GeodesicParam::new(0.0, beta), t1),
        branch: branch_of(beta),
    })
}

/// `π√3`.
pub fn diameter() -> f64 {
    PI * 3f64.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterCheck {
    /// Largest cut time among the grid points, and where it occurs.
    pub grid_max: f64,
    pub grid_argmax: f64,
    /// Largest cut time after refining between the neighbours of the grid
    /// maximum.
    pub max: f64,
    pub argmax: f64,
}

/// Maximizes the cut time over a sorted `β`-grid, then refines the best
/// grid cell by golden-section search (the cut time is unimodal in `|β|`).
pub fn diameter_check(grid: &[f64]) -> Result<DiameterCheck> {
    if grid.is_empty() {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    let values: Vec<f64> = grid.par_iter().map(|&b| cut_length(b)).collect::<Result<_>>()?;
    let (k, &grid_max) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is non-empty");

    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let (argmax, max) = golden_max(lo, hi, |b| cut_length(b).unwrap_or(f64::NEG_INFINITY));
    let (argmax, max) = if max >= grid_max {
        (argmax, max)
    } else {
        (grid[k], grid_max)
    };
    Ok(DiameterCheck {
        grid_max,
        grid_argmax: grid[k],
        max,
        argmax,
    })
}

fn golden_max(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    [(lo, f(lo)), (x1, f1), (x2, f2), (hi, f(hi))]
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("four candidates")
}

/// `γ_{(0,β)}(t1(β))`.
pub fn cut_endpoint(beta: f64) -> Result<Rotation> {
    cut_time(beta).map(|c| c.endpoint)
}

/// Second geodesic reaching the same cut point for `β² ≤ 1/3`:
/// `γ_{(φ0,β)}(t1) = γ_{(φ0 + βt1 + π, -β)}(t1)`. The projection of the
/// partner is the mirror image of the original arc across the chord.
pub fn cut_symmetry_partner(phi0: f64, beta: f64) -> Result<(f64, f64)> {
    if !phi0.is_finite() {
        return Err(Error::NonFinite("phi0"));
    }
    if beta.abs() > CRITICAL_BETA * (1.0 + BOUNDARY_SLACK) {
        return Err(Error::OutOfDomain(format!(
            "cut symmetry partner needs beta^2 <= 1/3, got beta = {beta}"
        )));
    }
    let t1 = cut_length(beta)?;
    Ok((normalize_angle(phi0 + beta * t1 + PI), -beta))
}

/// `β_k = tan ξ_k` with `ξ` on the midpoint grid of
/// `[-atan(beta_max), atan(beta_max)]`; `n = 1` gives `β = 0`.
pub fn atan_grid(n: usize, beta_max: f64) -> Vec<f64> {
    let xi_max = beta_max.abs().atan().min(FRAC_PI_2);
    let step = 2.0 * xi_max / n as f64;
    (0..n)
        .map(|k| {
            let xi = -xi_max + (k as f64 + 0.5) * step;
            // keep the centre exact
            if xi.abs() < 0.25 * step {
                0.0
            } else {
                xi.tan().clamp(-beta_max.abs(), beta_max.abs())
            }
        })
        .collect()
}

/// Cut points on [`atan_grid`].
pub fn sample_cut_locus(n: usize, beta_max: f64) -> Result<Vec<CutPoint>> {
    if n == 0 {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    atan_grid(n, beta_max).into_par_iter().map(cut_time).collect()
}

/// `true` if the first row and column of `r` equal `e1` within `tol`
/// (membership in SO(2) = exp(ℝc)).
pub fn in_fiber(r: &Rotation, tol: f64) -> bool {
    let m = r.matrix();
    let dev = [m[(0, 0)] - 1.0, m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(2, 0)]]
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    dev <= tol
}

/// Largest deviation of the first column from `e1`.
pub fn fiber_deviation(r: &Rotation) -> f64 {
    let c = r.matrix().column(0);
    (c[0] - 1.0).abs().max(c[1].abs()).max(c[2].abs())
}

/// Left-trivialized differential of `(φ0, β, t) ↦ γ_{(φ0,β)}(t)` by central
/// differences.
pub fn exp_map_jacobian(p: &GeodesicParam, t: f64) -> Matrix3<f64> {
    let h = 1e-6;
    let base = geodesic_closed_form(p, t).inverse();
    let column = |dp: f64, db: f64, dt: f64| {
        let plus = geodesic_closed_form(&GeodesicParam::new(p.phi0() + dp, p.beta() + db), t + dt);
        let minus = geodesic_closed_form(&GeodesicParam::new(p.phi0() - dp, p.beta() - db), t - dt);
        let d = log_unchecked(&(base * plus)) - log_unchecked(&(base * minus));
        nalgebra::Vector3::from(d.to_array()) / (2.0 * h)
    };
    Matrix3::from_columns(&[column(h, 0.0, 0.0), column(0.0, h, 0.0), column(0.0, 0.0, h)])
}

/// Ratio of smallest to largest singular value of [`exp_map_jacobian`] at
/// the cut point of `β`. Near zero means the cut point is also conjugate.
/// Diagnostic only.
pub fn conjugacy_indicator(beta: f64) -> Result<f64> {
    let t1 = cut_length(beta)?;
    let j = exp_map_jacobian(&GeodesicParam::new(0.0, beta), t1);
    let sv = j.singular_values();
    Ok(sv.min() / sv.max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::geodesic;
    use crate::lie::fiber_rotation;
    use crate::sphere::digon;

    #[test]
    fn known_cut_times() {
        let c = cut_time(0.0).unwrap();
        assert_eq!(c.t1, PI);
        assert_eq!(c.branch, Branch::BetaZero);

        let c = cut_time(1.0).unwrap();
        assert!((c.t1 - PI * 2f64.sqrt()).abs() < 1e-12);
        assert!((c.t1 - 4.442_882_938).abs() < 1e-9);
        assert_eq!(c.branch, Branch::FullCircle);

        for beta in [CRITICAL_BETA, 1.0 / 3f64.sqrt(), 3f64.sqrt().recip(), -CRITICAL_BETA] {
            let c = cut_time(beta).unwrap();
            assert!((c.t1 - diameter()).abs() < 1e-12, "{beta}: {}", c.t1);
            assert_eq!(c.branch, Branch::FullCircle);
        }
        assert!((diameter() - 5.441_398_093).abs() < 1e-9);
    }

    #[test]
    fn digon_branch_root() {
        let beta = 0.3;
        let c = cut_time(beta).unwrap();
        assert_eq!(c.branch, Branch::DigonPi);
        let w2: f64 = 1.09;
        assert!(c.t1 > PI / w2.sqrt() && c.t1 < 2.0 * PI / w2.sqrt());
        assert!(digon_root_function(beta, c.t1).abs() <= 1e-13);
        let d = digon(beta, c.t1).unwrap();
        assert!((d.area - PI).abs() < 1e-12);
        // |β| t1 < π on this branch
        assert!(beta * c.t1 > 0.0 && beta * c.t1 < PI);
    }

    #[test]
    fn cut_time_rejects_non_finite() {
        assert!(matches!(cut_time(f64::NAN), Err(Error::NonFinite(_))));
        assert!(cut_time(f64::INFINITY).is_err());
    }

    #[test]
    fn cut_time_is_even() {
        for beta in [0.05, 0.31, 0.57, 0.8, 4.0] {
            assert_eq!(cut_length(beta).unwrap(), cut_length(-beta).unwrap());
        }
    }

    #[test]
    fn cut_time_below_diameter_away_from_peak() {
        assert!(cut_length(0.0).unwrap() < diameter());
        assert!(cut_length(1.0).unwrap() < diameter());
    }

    #[test]
    fn diameter_check_on_uniform_grid() {
        let grid: Vec<f64> = (0..=6000).map(|k| -3.0 + k as f64 * 1e-3).collect();
        let check = diameter_check(&grid).unwrap();
        assert!((check.max - diameter()).abs() < 1e-6, "{check:?}");
        assert!((check.argmax.abs() - CRITICAL_BETA).abs() < 1e-3);
        assert!(check.grid_max <= check.max);
    }

    #[test]
    fn cut_endpoints() {
        let e = cut_endpoint(1.0).unwrap();
        let want = fiber_rotation(-PI * 2f64.sqrt());
        assert!(e.max_abs_diff(&want) < 1e-12);
        assert!(in_fiber(&e, 1e-10));

        let e = cut_endpoint(CRITICAL_BETA).unwrap();
        let flip = Rotation::from_row_major([1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(e.max_abs_diff(&flip) < 1e-12);

        let e = cut_endpoint(0.0).unwrap();
        let half = Rotation::from_row_major([-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(e.max_abs_diff(&half) < 1e-15);
        assert!(!in_fiber(&e, 1e-3));
    }

    #[test]
    fn symmetry_partner_examples() {
        let (phi, beta) = cut_symmetry_partner(0.0, 0.0).unwrap();
        assert!((phi - PI).abs() < 1e-15 && beta == 0.0);
        let a = geodesic(&GeodesicParam::new(0.0, 0.0), PI);
        let b = geodesic(&GeodesicParam::new(phi, beta), PI);
        assert!(a.max_abs_diff(&b) < 1e-15);

        for (phi0, beta) in [(0.5, 0.2), (2.0, -0.45), (0.1, CRITICAL_BETA)] {
            let t1 = cut_length(beta).unwrap();
            let (phi, b) = cut_symmetry_partner(phi0, beta).unwrap();
            let x = geodesic(&GeodesicParam::new(phi0, beta), t1);
            let y = geodesic(&GeodesicParam::new(phi, b), cut_length(b).unwrap());
            assert!(x.max_abs_diff(&y) < 1e-9, "({phi0}, {beta})");
        }
        assert!(cut_symmetry_partner(0.0, 0.7).is_err());
    }

    #[test]
    fn grid_shape() {
        assert_eq!(atan_grid(1, 5.0), vec![0.0]);
        let g = atan_grid(101, 5.0);
        assert_eq!(g.len(), 101);
        assert_eq!(g[50], 0.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.iter().all(|b| b.abs() <= 5.0));
        let pts = sample_cut_locus(1, 3.0).unwrap();
        assert_eq!(pts[0].t1, PI);
    }

    #[test]
    fn fiber_endpoints_of_opposite_beta_are_inverse() {
        for beta in [0.6, 1.0, 2.5] {
            let p = cut_endpoint(beta).unwrap();
            let q = cut_endpoint(-beta).unwrap();
            assert!((p * q).max_abs_diff(&Rotation::identity()) < 1e-12);
            let t1 = cut_length(beta).unwrap();
            assert!(p.max_abs_diff(&fiber_rotation(-beta * t1)) < 1e-12);
        }
    }

    #[test]
    fn conjugate_diagnostic_separates_branches() {
        assert!(conjugacy_indicator(1.0).unwrap() < 1e-6);
        assert!(conjugacy_indicator(2.0).unwrap() < 1e-6);
        assert!(conjugacy_indicator(0.3).unwrap() > 1e-3);
    }
}
