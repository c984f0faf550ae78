//! Property-based invariants.

use proptest::prelude::*;

use renormvol::conformal::{check_conformal_covariance, gauss_bonnet_4d};
use renormvol::geometry::{poincare_einstein_model, Analytic, EndKind, RadialMetric, SpaceForm};
use renormvol::report::test_basket;
use renormvol::scattering::{conformal_scaling_check, scattering_value};
use renormvol::volume::volume_expansion_series;
use renormvol::LogSeries;

const ORDER: i32 = 12;

fn series() -> impl Strategy<Value = LogSeries> {
    prop::collection::vec(-1.0f64..1.0, 1..8).prop_map(|c| LogSeries::from_coeffs(0, &c, ORDER))
}

fn unit_series() -> impl Strategy<Value = LogSeries> {
    (0.5f64..2.0, prop::collection::vec(-1.0f64..1.0, 0..6)).prop_map(|(a0, rest)| {
        let mut c = vec![a0];
        c.extend(rest);
        LogSeries::from_coeffs(0, &c, ORDER)
    })
}

fn close(a: &LogSeries, b: &LogSeries, tol: f64) -> bool {
    (0..=ORDER).all(|k| (a.c(k) - b.c(k)).abs() <= tol * (1.0 + b.c(k).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_commutative_and_divides_back(a in series(), b in unit_series()) {
        prop_assert!(close(&(&a * &b), &(&b * &a), 1e-14));
        let q = (&a * &b).div(&b).unwrap();
        prop_assert!(close(&q, &a, 1e-9));
    }

    #[test]
    fn exp_inverts_ln(b in unit_series()) {
        let back = b.ln().unwrap().exp().unwrap();
        prop_assert!(close(&back, &b, 1e-9));
    }

    #[test]
    fn derivative_inverts_antiderivative(a in series()) {
        let back = a.antiderivative().derivative().truncate(ORDER);
        prop_assert!(close(&back, &a, 1e-14));
    }

    #[test]
    fn rebase_matches_evaluation(a in series(), x0 in -0.5f64..0.5, xi in -0.1f64..0.1) {
        let r = a.rebase(x0, ORDER as usize).unwrap();
        let lhs = r.eval(xi).unwrap();
        let rhs = a.eval(x0 + xi).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn powers_agree_with_repeated_products(b in unit_series(), p in 1i32..5) {
        let mut acc = LogSeries::constant(1.0, ORDER);
        for _ in 0..p {
            acc = &acc * &b;
        }
        prop_assert!(close(&b.powi(p).unwrap(), &acc, 1e-11));
        prop_assert!(close(&b.pow(p as f64).unwrap(), &acc, 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn q_curvature_and_paneitz_are_covariant(a in -0.5f64..0.5, b in -0.5f64..0.5, x in 0.2f64..1.6) {
        let m = poincare_einstein_model(SpaceForm::unit_sphere(3)).radial_metric();
        let w = Analytic::new("a x² + b sin x", move |t| Ok(&(t * t).scale(a) + &t.sin_cos()?.0.scale(b))).profile();
        let r = check_conformal_covariance(&m, &w, &test_basket(), &[x]).unwrap();
        prop_assert!(r <= 1e-9, "{r}");
    }

    #[test]
    fn geodesic_balls_have_unit_euler_characteristic(radius in 0.2f64..2.8, kappa in prop::sample::select(vec![-1.0f64, 1.0])) {
        let warp = move |t: &LogSeries| -> renormvol::Result<LogSeries> {
            if kappa > 0.0 {
                Ok(t.sin_cos()?.0)
            } else {
                Ok((&t.exp()? - &(-t).exp()?).scale(0.5))
            }
        };
        let m = RadialMetric::new(
            Analytic::constant(1.0).profile(),
            Analytic::new("sn", warp).profile(),
            SpaceForm::unit_sphere(3),
            (0.0, radius),
            [EndKind::Center, EndKind::Boundary],
        );
        let chi = gauss_bonnet_4d(&m).unwrap().chi;
        prop_assert!((chi - 1.0).abs() <= 1e-8, "{chi}");
    }

    #[test]
    fn volume_is_linear_in_boundary_volume(n in 2usize..7, scale in 0.1f64..10.0) {
        let base = SpaceForm::unit_sphere(n);
        let v1 = volume_expansion_series(&poincare_einstein_model(base)).unwrap();
        let v2 = volume_expansion_series(&poincare_einstein_model(base.with_volume(scale * base.total_volume))).unwrap();
        prop_assert!((v2.v - scale * v1.v).abs() <= 1e-11 * (1.0 + v2.v.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constant_rescaling_of_scattering(n in 2usize..6, w in -0.6f64..0.6, frac in 0.15f64..0.85) {
        let half = n as f64 / 2.0;
        let s = half + frac * half;
        prop_assume!((s - s.round()).abs() > 0.02 && (s - half - (s - half).round()).abs() > 0.02);
        let m = poincare_einstein_model(SpaceForm::unit_sphere(n));
        let (at_s, _) = conformal_scaling_check(&m, w, s).unwrap();
        prop_assert!(at_s.rel_err() <= 1e-8, "{at_s:?}");
    }

    #[test]
    fn scattering_value_is_finite_and_real_off_resonance(n in 2usize..6, frac in 0.1f64..0.9) {
        let half = n as f64 / 2.0;
        let s = half + frac * half;
        prop_assume!((s - half - (s - half).round()).abs() > 0.02);
        let m = poincare_einstein_model(SpaceForm::unit_sphere(n));
        prop_assert!(scattering_value(&m, s).unwrap().is_finite());
    }
}
