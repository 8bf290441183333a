use std::f64::consts::TAU;

use proptest::prelude::*;
use srso3::geodesic::{geodesic_closed_form, geodesic_ode, geodesic_product, mn, restart, GeodesicParam};
use srso3::LieVector;

fn param(beta_max: f64) -> impl Strategy<Value = GeodesicParam> {
    (0.0..TAU, -beta_max..beta_max).prop_map(|(p, b)| GeodesicParam::new(p, b))
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(10_000) })]

    #[test]
    fn product_matches_closed_form(p in param(5.0), t in 0.0..TAU) {
        let d = geodesic_product(&p, t).max_abs_diff(&geodesic_closed_form(&p, t));
        prop_assert!(d <= 1e-10, "{d}");
    }

    #[test]
    fn mn_identity(beta in -5.0..5.0f64, t in -10.0..10.0f64) {
        let w2 = 1.0 + beta * beta;
        let c = mn(beta, t);
        let lhs = c.m * c.m * w2 + (1.0 - c.n * w2).powi(2);
        prop_assert!((lhs - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(1_000) })]

    #[test]
    fn restart_contract(p in param(3.0), t0 in -3.0..3.0f64, s in -3.0..3.0f64) {
        let lhs = geodesic_closed_form(&p, t0).inverse() * geodesic_closed_form(&p, t0 + s);
        let rhs = geodesic_closed_form(&restart(&p, t0), s);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11);
    }

    #[test]
    fn horizontal_with_unit_speed(p in param(5.0), t in 0.0..TAU) {
        let h = 1e-6;
        let g = geodesic_closed_form(&p, t);
        let diff = (geodesic_closed_form(&p, t + h).matrix() - geodesic_closed_form(&p, t - h).matrix()) / (2.0 * h);
        let d = LieVector::from_matrix(&(g.matrix().transpose() * diff));
        prop_assert!(d.c.abs() <= 1e-5);
        prop_assert!((d.horizontal_norm() - 1.0).abs() <= 1e-5);
        let u = p.control(t);
        prop_assert!((d - u).norm() <= 1e-5);
    }
}

#[test]
fn ode_converges_at_fourth_order() {
    let cases = [(0.0, 0.0, 3.0), (1.1, -0.7, 2.0), (0.4, 2.5, 4.0), (5.0, 1.0, 6.0)];
    for (phi0, beta, t) in cases {
        let p = GeodesicParam::new(phi0, beta);
        let exact = geodesic_closed_form(&p, t);
        let coarse = geodesic_ode(&p, t, 0.1).max_abs_diff(&exact);
        let fine = geodesic_ode(&p, t, 0.05).max_abs_diff(&exact);
        assert!(coarse / fine >= 12.0, "({phi0}, {beta}, {t}): {coarse:e} / {fine:e}");
    }
}

#[test]
fn ode_is_identity_at_zero_time() {
    for step in [1e-3, 0.5, 10.0] {
        let r = geodesic_ode(&GeodesicParam::new(0.3, 0.2), 0.0, step);
        assert_eq!(r, srso3::Rotation::identity());
    }
}
