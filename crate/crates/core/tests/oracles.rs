//! Frozen closed-form oracles.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use renormvol::geometry::{fg_tr_g2, poincare_einstein_model, SpaceForm};
use renormvol::scattering::{ck, poisson_solve, scattering_derivative, scattering_limit_at_n};
use renormvol::special::sphere_volume;
use renormvol::vequation::solve_v;
use renormvol::volume::{epstein_volume, volume_expansion_series};

/// `S(s)1` on `H^{n+1}` with the round unit boundary.
fn hyperbolic_scattering(n: f64, s: f64) -> f64 {
    2f64.powf(n - 2.0 * s) * gamma(n / 2.0 - s) * gamma(s) / (gamma(s - n / 2.0) * gamma(n - s))
}

fn h(n: usize) -> renormvol::geometry::PoincareModel {
    poincare_einstein_model(SpaceForm::unit_sphere(n))
}

#[test]
fn scattering_value_matches_gamma_ratio() {
    for n in 2..=6usize {
        let m = h(n);
        let half = n as f64 / 2.0;
        for frac in [0.13, 0.37, 0.61, 0.89] {
            let s = half + frac * half;
            if (s - half - (s - half).round()).abs() < 0.02 {
                continue;
            }
            let got = poisson_solve(&m, s).unwrap().s_value;
            let exact = hyperbolic_scattering(n as f64, s);
            assert!((got - exact).abs() <= 1e-8 * (1.0 + exact.abs()), "n = {n}, s = {s}: {got} vs {exact}");
        }
    }
}

#[test]
fn scattering_derivative_values() {
    let ln2 = 2f64.ln();
    let expect = [(2usize, ln2 / 2.0), (3, -2.0 / 3.0), (4, -0.125 - 0.375 * ln2), (5, 8.0 / 15.0)];
    for (n, d) in expect {
        let got = scattering_derivative(&h(n)).unwrap().value;
        assert!((got - d).abs() <= 1e-8, "n = {n}: {got} vs {d}");
    }
}

#[test]
fn scattering_at_n_gives_q_curvature() {
    let s2 = scattering_limit_at_n(&h(2)).unwrap();
    assert!((s2 + 0.25).abs() < 1e-9);
    assert!((s2 / ck(1) - 1.0).abs() < 1e-8);
    let s4 = scattering_limit_at_n(&h(4)).unwrap();
    assert!((s4 - 3.0 / 16.0).abs() < 1e-9);
    assert!((s4 / ck(2) - 6.0).abs() < 1e-7);
}

#[test]
fn a2_matches_closed_form_across_s() {
    let m = h(4);
    let tr = fg_tr_g2(&m.boundary).unwrap();
    assert_eq!(tr, -2.0);
    for s in [2.3, 2.7, 3.5, 3.9] {
        let a2 = poisson_solve(&m, s).unwrap().a_coeffs[0];
        let exact = -(4.0 - s) / (4.0 * (3.0 - s)) * tr;
        assert!((a2 - exact).abs() < 1e-12, "s = {s}");
    }
}

#[test]
fn hyperbolic_volumes_and_epstein_values() {
    let ln2 = 2f64.ln();
    let v = |n| volume_expansion_series(&h(n)).unwrap();
    assert!((v(2).v + 2.0 * PI * ln2).abs() < 1e-12);
    assert!((v(2).log_coeff.unwrap() + 2.0 * PI).abs() < 1e-12);
    assert!((v(3).v - 4.0 * PI * PI / 3.0).abs() < 1e-12);
    assert!((v(4).v - PI * PI * ln2).abs() < 1e-11);
    assert!((v(4).log_coeff.unwrap() - PI * PI).abs() < 1e-11);
    assert!((v(5).v + 8.0 * PI.powi(3) / 15.0).abs() < 1e-10);
    let (v_hyp, v_eps) = epstein_volume(3, 1).unwrap();
    assert!((v_hyp - 4.0 * PI * PI / 3.0).abs() < 1e-13);
    assert!((v_eps - 4.0 / 3.0).abs() < 1e-15);
    assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-14);
    assert!((sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-14);
}

#[test]
fn b0_equals_v_over_volume() {
    for (n, b0) in [(3usize, 2.0 / 3.0), (5, -8.0 / 15.0)] {
        let s = solve_v(&h(n)).unwrap();
        assert!((s.b0 - b0).abs() < 1e-8, "n = {n}: {}", s.b0);
        assert!((s.b0 - s.b0_coarse).abs() < 1e-8);
    }
}
