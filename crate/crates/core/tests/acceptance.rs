//! Acceptance criteria, one line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use renormvol::conformal::{
    bm_constant, check_conformal_covariance, gauss_bonnet_4d, gjms_polynomial, paneitz4_apply, Q4_LAPLACIAN_R_COEFF,
};
use renormvol::fit::log_grid;
use renormvol::geometry::{flat_ball, poincare_einstein_model, round_sphere, Analytic, PoincareModel, SpaceForm};
use renormvol::report::{builtin, conformal_factors, run_scenario, test_basket};
use renormvol::scattering::{
    a_primes_fd, anomaly_variation_check, conformal_scaling_check, volume_via_scattering_even,
    volume_via_scattering_odd,
};
use renormvol::vequation::{
    check_laplacian_power, check_q_vanishing, check_scalar_expansion, check_q_integral, compactify, kn_constant, solve_v,
    t_curvature_check,
};
use renormvol::volume::{
    default_eps_grid, gb6_check, volume_expansion_fit, volume_expansion_series,
};
use renormvol::Result;

fn h(n: usize) -> PoincareModel {
    poincare_einstein_model(SpaceForm::unit_sphere(n))
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

struct Line {
    ok: bool,
    detail: String,
}

fn line(ok: bool, detail: String) -> Result<Line> {
    Ok(Line { ok, detail })
}

fn hyperbolic_volumes() -> Result<Line> {
    let ln2 = 2f64.ln();
    let cases = [
        (2usize, -2.0 * PI * ln2, Some(-2.0 * PI)),
        (3, 4.0 * PI * PI / 3.0, None),
        (4, PI * PI * ln2, Some(PI * PI)),
        (5, -8.0 * PI.powi(3) / 15.0, None),
    ];
    let mut worst: f64 = 0.0;
    for (n, v, l) in cases {
        let m = h(n);
        let series = volume_expansion_series(&m)?;
        let fit = volume_expansion_fit(&m, &default_eps_grid(&m))?;
        for e in [&series, &fit] {
            worst = worst.max(rel(e.v, v));
            if let Some(l) = l {
                worst = worst.max(rel(e.log_coeff.unwrap_or(f64::NAN), l));
            }
        }
    }
    line(worst <= 1e-6, format!("max rel err {worst:.2e} over V, L for H³..H⁶ by series and fit"))
}

fn q_integral_closure() -> Result<Line> {
    let mut worst: f64 = 0.0;
    let mut q3 = f64::NAN;
    for n in [3usize, 5] {
        let m = h(n);
        let sol = solve_v(&m)?;
        if n == 3 {
            q3 = sol.qn.unwrap_or(f64::NAN);
        }
        let c = check_q_integral(&sol, sol.b0, &volume_expansion_series(&m)?)?;
        worst = worst.max(c.rel_err());
    }
    let k3 = kn_constant(3)?;
    let ok = worst <= 1e-5 && (q3 - 2.0).abs() <= 1e-6 && (k3 - 3.0).abs() <= 1e-12;
    line(ok, format!("rel err {worst:.2e}, Q₃ = {q3:.10}, k₃ = {k3}"))
}

fn anderson_chain() -> Result<Line> {
    let sol = solve_v(&h(3))?;
    let g = compactify(&sol)?;
    let q = check_q_vanishing(&g, &log_grid(0.02, 1.9, 20))?;
    let t = t_curvature_check(&g, sol.b0)?;
    let t_err = (t.from_scalar - 3.0 * sol.b0).abs();
    let chi = gauss_bonnet_4d(&g)?.chi;
    let ok = q <= 1e-6 && t_err <= 1e-6 && (chi - 1.0).abs() <= 1e-4;
    line(ok, format!("max |Q₄| {q:.2e}, |T - 3B₀| {t_err:.2e}, χ = {chi:.10}"))
}

fn gauss_bonnet_assembly() -> Result<Line> {
    let ball = gauss_bonnet_4d(&flat_ball(3, 1.0))?.chi;
    let sphere = gauss_bonnet_4d(&round_sphere(3))?.chi;
    let ok = (ball - 1.0).abs() <= 1e-6 && (sphere - 2.0).abs() <= 1e-6;
    line(ok, format!("flat ball χ = {ball:.12}, S⁴ χ = {sphere:.12}"))
}

fn six_dim_identity() -> Result<Line> {
    let m = h(5);
    let v = volume_expansion_series(&m)?.v;
    let r = gb6_check(&m, v)?;
    line((r - 1.0).abs() <= 1e-4, format!("-(15/8π³)V(H⁶) = {r:.12}"))
}

fn parity_identities() -> Result<Line> {
    let mut worst_lead: f64 = 0.0;
    let mut worst_power: f64 = 0.0;
    let mut worst_odd: f64 = 0.0;
    for n in [3usize, 5] {
        let sol = solve_v(&h(n))?;
        let g = compactify(&sol)?;
        let se = check_scalar_expansion(&g, sol.b0)?;
        let expect = -2.0 * (n * n * (n - 1)) as f64 * sol.b0;
        worst_lead = worst_lead.max(rel(se.leading.lhs, expect));
        worst_odd = worst_odd.max(se.lower_odd);
        let l = check_laplacian_power(&g, sol.b0)?;
        let nfact: f64 = (1..=n).map(|k| k as f64).product();
        worst_power = worst_power.max(rel(l.lhs, -2.0 * n as f64 * nfact * sol.b0));
    }
    let b4 = bm_constant(4)?;
    let ok = worst_lead <= 1e-4 && worst_power <= 1e-4 && worst_odd <= 1e-6 && b4 == Q4_LAPLACIAN_R_COEFF && b4 == -1.0 / 6.0;
    line(ok, format!("leading {worst_lead:.2e}, Δ-power coefficient {worst_power:.2e}, lower odd {worst_odd:.2e}, b₄ = {b4}"))
}

fn conformal_covariance() -> Result<Line> {
    let grid = [0.15, 0.6, 1.1, 1.7];
    let factors = conformal_factors();
    let mut worst: f64 = 0.0;
    for m in [h(3).radial_metric(), flat_ball(3, 1.0), round_sphere(3)] {
        for w in &factors {
            worst = worst.max(check_conformal_covariance(&m, w, &test_basket(), &[grid[0], grid[1], grid[2]])?);
        }
    }
    let zero = Analytic::constant(0.0).profile();
    let trivial = check_conformal_covariance(&h(3).radial_metric(), &zero, &test_basket(), &grid)?;
    let ok = factors.len() >= 5 && worst <= 1e-5 && trivial == 0.0;
    line(ok, format!("{} factors, max residual {worst:.2e}, w ≡ 0 residual {trivial}", factors.len()))
}

fn gjms_equivalence() -> Result<Line> {
    let m = h(3).radial_metric();
    let p = gjms_polynomial(3)?;
    let mut worst: f64 = 0.0;
    for u in test_basket() {
        for x in [0.1, 0.5, 1.0, 1.5, 1.9] {
            let a = paneitz4_apply(&m, &u, x)?;
            let b = p.apply(&m, &u, x)?;
            worst = worst.max((a - b).abs() / (1.0 + b.abs()));
        }
    }
    let grid = log_grid(0.02, 1.8, 15);
    let r3 = solve_v(&h(3))?.gjms_residual(&grid)?;
    let r5 = solve_v(&h(5))?.gjms_residual(&grid)?;
    let ok = worst <= 1e-6 && r3 <= 1e-5 && r5 <= 1e-4;
    line(ok, format!("P₄ vs product {worst:.2e}, P v + Q: n = 3 {r3:.2e}, n = 5 {r5:.2e}"))
}

fn scattering_pipelines() -> Result<Line> {
    let mut odd: f64 = 0.0;
    for n in [3usize, 5] {
        let m = h(n);
        odd = odd.max(rel(volume_via_scattering_odd(&m)?, volume_expansion_series(&m)?.v));
    }
    let r2 = volume_via_scattering_even(&h(2))?;
    let r4 = volume_via_scattering_even(&h(4))?;
    let even = rel(r2.v_scatter, r2.v_quadrature).max(rel(r4.v_scatter, r4.v_quadrature));
    let curv = (r4.curvature_term + PI * PI / 3.0).abs();
    let ap = a_primes_fd(&h(4))?;
    let a_err = (ap[0] - 0.5).abs().max((ap[1] - 0.375).abs());
    let mut conf: f64 = 0.0;
    for n in [2usize, 4] {
        let (a, b) = conformal_scaling_check(&h(n), 0.4, n as f64 - 0.35)?;
        conf = conf.max(a.rel_err()).max(b.rel_err());
        conf = conf.max(anomaly_variation_check(&h(n), 1.0)?.rel_err());
    }
    let ok = odd <= 1e-5 && even <= 1e-5 && curv <= 1e-8 && a_err <= 1e-5 && conf <= 1e-4;
    line(
        ok,
        format!("odd {odd:.2e}, even {even:.2e}, curvature term {curv:.2e}, a' {a_err:.2e}, rescaling/variation {conf:.2e}"),
    )
}

fn negative_controls() -> Result<Line> {
    let failing = |s: &renormvol::report::Scenario| -> Result<Vec<String>> {
        Ok(run_scenario(s)?.into_iter().filter(|r| !r.passed).map(|r| r.check_id).collect())
    };
    let mut b0 = builtin("h4")?;
    b0.b0_perturbation = 0.01;
    let mut log = builtin("h5")?;
    log.fit_log_term = false;
    let mut warp = builtin("h4")?;
    warp.warp_perturbation = 1e-3;
    let (fb, fl, fw) = (failing(&b0)?, failing(&log)?, failing(&warp)?);
    let ok = !fb.is_empty() && !fl.is_empty() && fw.iter().any(|c| c == "einstein_residual");
    line(ok, format!("B₀ +1% fails {fb:?}; no log term fails {fl:?}; non-Einstein warp fails {} checks", fw.len()))
}

type Criterion = (u32, &'static str, fn() -> Result<Line>, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "hyperbolic volumes", hyperbolic_volumes, Duration::from_secs(5)),
        (2, "Q-curvature integral equals V", q_integral_closure, Duration::from_secs(30)),
        (3, "Anderson chain on compactified H⁴", anderson_chain, Duration::from_secs(60)),
        (4, "Gauss-Bonnet assembly", gauss_bonnet_assembly, Duration::from_secs(60)),
        (5, "six-dimensional identity", six_dim_identity, Duration::from_secs(60)),
        (6, "parity and coefficient identities", parity_identities, Duration::from_secs(60)),
        (7, "conformal covariance", conformal_covariance, Duration::from_secs(60)),
        (8, "GJMS product and P v + Q = 0", gjms_equivalence, Duration::from_secs(60)),
        (9, "scattering pipelines", scattering_pipelines, Duration::from_secs(120)),
        (10, "negative controls", negative_controls, Duration::from_secs(120)),
    ];
    let mut failures = 0;
    for (k, name, f, budget) in criteria {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let (ok, detail) = match out {
            Ok(l) => (l.ok && took <= budget, l.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {k:>2} {}: {name}: {detail} ({:.2} s)",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
