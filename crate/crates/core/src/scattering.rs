//! Poisson solutions `(-Δ - s(n-s)) u = 0` with boundary data `f ≡ 1`, the
//! scattering value `S(s)1`, its `s`-derivative at `s = n`, and the
//! resulting volume and anomaly formulas.
//!
//! The regular solution is integrated from the center and split near
//! `x = 0` as `u = α x^{n-s} F̂ + β x^s Ĝ`, where `F̂ = 1 + a₂x² + …` and
//! `Ĝ = 1 + …` are the two Frobenius series. Then `S(s)1 = β/α`.

use rayon::prelude::*;
use serde::Serialize;

use crate::check::Comparison;
use crate::error::{Error, Result};
use crate::fit::{log_grid, lstsq};
use crate::geometry::{fg_tr_g2, poincare_einstein_model, radial_laplacian, vcoeffs, PoincareModel, SpaceForm};
use crate::radial_ode::{
    boundary_frobenius, log_derivative_series, solve_two_resolutions, warp_polynomial,
    FrobeniusProblem, FrobeniusSeries, IntegratorOptions, RadialOde, RadialSolution,
};
use crate::series::LogSeries;
use crate::special::factorial;

/// Minimal distance of `s` from `n/2 + ℕ`.
pub const RESONANCE_GUARD: f64 = 1e-2;

/// Steps of the `s`-differences at `s = n`.
pub const DIFF_STEPS: (f64, f64) = (1e-3, 1e-4);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringOptions {
    /// Fit window as fractions of `x_center`.
    pub window: (f64, f64),
    pub window_points: usize,
    pub boundary_order: i32,
    pub integrator: IntegratorOptions,
}

impl Default for ScatteringOptions {
    fn default() -> Self {
        Self { window: (0.01, 0.5), window_points: 40, boundary_order: 72, integrator: IntegratorOptions::default() }
    }
}

/// `c_k = (-1)^k / (2^{2k} k! (k-1)!)`.
pub fn ck(k: u32) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign / (4f64.powi(k as i32) * factorial(k) * factorial(k - 1))
}

#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    pub s: f64,
    pub n: usize,
    /// Regular solution with center value 1; `u = solution / alpha`.
    pub solution: Option<RadialSolution>,
    pub alpha: f64,
    pub beta: f64,
    /// `x^{n-s} F̂`.
    pub f_series: FrobeniusSeries,
    /// `x^s Ĝ`.
    pub g_series: FrobeniusSeries,
    /// `S(s)1`.
    pub s_value: f64,
    /// `a₂(s), a₄(s), …` of `F̂`.
    pub a_coeffs: Vec<f64>,
    pub fit_residual: f64,
    pub integration_error: f64,
}

impl ScatteringSolution {
    /// `u(s) = 𝒫(s)1`, normalized so that `F|_M = 1`.
    pub fn u(&self, x: f64) -> Result<f64> {
        match &self.solution {
            Some(sol) => Ok(sol.value(x)? / self.alpha),
            None => Ok(1.0),
        }
    }

    pub fn u_jet(&self, x0: f64, order: usize) -> Result<LogSeries> {
        match &self.solution {
            Some(sol) => Ok(sol.x_jet(x0, order)?.scale(1.0 / self.alpha)),
            None => Ok(LogSeries::constant(1.0, order as i32)),
        }
    }

    /// Largest odd coefficient of `F̂` below degree `n`.
    pub fn f_odd_max(&self) -> f64 {
        (1..self.n as i32).step_by(2).map(|k| self.f_series.series.c(k).abs()).fold(0.0, f64::max)
    }

    /// `max |(-Δ - s(n-s))u|` on `grid`.
    pub fn equation_residual(&self, model: &PoincareModel, grid: &[f64]) -> Result<f64> {
        let (h, f) = model.metric_series();
        let lambda = self.s * (self.n as f64 - self.s);
        let mut worst: f64 = 0.0;
        for &x in grid {
            let u = self.u_jet(x, 6)?;
            let lap = radial_laplacian(&h.rebase(x, 4)?, &f.rebase(x, 4)?, self.n, &u)?;
            worst = worst.max((-lap.c(0) - lambda * u.c(0)).abs());
        }
        Ok(worst)
    }
}

fn check_resonance(n: usize, s: f64) -> Result<()> {
    let half = n as f64 / 2.0;
    if s <= half {
        return Err(Error::Domain(format!("s = {s} must exceed n/2 = {half}")));
    }
    let k = (s - half).round();
    let removable = (half + k - n as f64).abs() < 1e-12;
    if (s - half - k).abs() < RESONANCE_GUARD && !removable {
        return Err(Error::Resonance(format!("s = {s} is within {RESONANCE_GUARD} of n/2 + {k}")));
    }
    Ok(())
}

/// `x^{n-s} F̂` and `x^s Ĝ` at the boundary.
pub fn frobenius_pair(m: &PoincareModel, s: f64, order: i32) -> Result<(FrobeniusSeries, FrobeniusSeries)> {
    let n = m.dim();
    check_resonance(n, s)?;
    let phi = warp_polynomial(&m.warp)?;
    let e = log_derivative_series(&phi, order)?;
    let lambda = s * (n as f64 - s);
    let pair = |alpha: f64| {
        boundary_frobenius(&FrobeniusProblem { n, lambda, alpha, e: &e, source: None, free: &[(0, 1.0)], order })
    };
    let f = pair(n as f64 - s)?;
    let g = pair(s)?;
    if f.series.log_depth() > 0 || g.series.log_depth() > 0 {
        return Err(Error::Resonance(format!("log terms at s = {s}")));
    }
    Ok((f, g))
}

pub fn poisson_solve(m: &PoincareModel, s: f64) -> Result<ScatteringSolution> {
    poisson_solve_with(m, s, ScatteringOptions::default())
}

pub fn poisson_solve_with(m: &PoincareModel, s: f64, opts: ScatteringOptions) -> Result<ScatteringSolution> {
    m.require_global()?;
    let n = m.dim();
    let (f_series, g_series) = frobenius_pair(m, s, opts.boundary_order)?;
    let a_coeffs: Vec<f64> = (1..=opts.boundary_order / 2).map(|k| f_series.series.c(2 * k)).collect();
    if s == n as f64 {
        let s_value = scattering_limit_at_n_with(m, opts)?;
        return Ok(ScatteringSolution {
            s,
            n,
            solution: None,
            alpha: 1.0,
            beta: s_value,
            f_series,
            g_series,
            s_value,
            a_coeffs,
            fit_residual: 0.0,
            integration_error: 0.0,
        });
    }
    let (lo, hi) = (opts.window.0 * m.x_center, opts.window.1 * m.x_center);
    if !(lo > 0.0 && hi > lo && hi < m.x_center) {
        return Err(Error::Extraction(format!("fit window {:?} is unusable", opts.window)));
    }
    let lambda = s * (n as f64 - s);
    let ode = RadialOde { n, lambda, sigma: 0.0, phi: warp_polynomial(&m.warp)?, x_center: m.x_center };
    let xs = log_grid(lo, hi, opts.window_points);
    let (sol, integration_error) = solve_two_resolutions(&ode, 1.0, lo * 0.5, opts.integrator, &xs)?;
    let mut y = Vec::with_capacity(xs.len());
    let mut cf = Vec::with_capacity(xs.len());
    let mut cg = Vec::with_capacity(xs.len());
    for &x in &xs {
        y.push(sol.value(x)?);
        cf.push(f_series.eval(x)?);
        cg.push(g_series.eval(x)?);
    }
    let fit = lstsq(&[cf, cg], &y, 1e12).map_err(|e| Error::Extraction(format!("two-frequency fit: {e}")))?;
    let (alpha, beta) = (fit.coeffs[0], fit.coeffs[1]);
    Ok(ScatteringSolution {
        s,
        n,
        solution: Some(sol),
        alpha,
        beta,
        f_series,
        g_series,
        s_value: beta / alpha,
        a_coeffs,
        fit_residual: fit.residual,
        integration_error,
    })
}

pub fn scattering_value(m: &PoincareModel, s: f64) -> Result<f64> {
    Ok(poisson_solve(m, s)?.s_value)
}

fn values_around_n(m: &PoincareModel, opts: ScatteringOptions) -> Result<[f64; 4]> {
    let n = m.dim() as f64;
    let (h1, h2) = DIFF_STEPS;
    let ss = [n + h1, n - h1, n + h2, n - h2];
    let v: Vec<f64> = ss.par_iter().map(|&s| Ok(poisson_solve_with(m, s, opts)?.s_value)).collect::<Result<_>>()?;
    Ok([v[0], v[1], v[2], v[3]])
}

fn richardson10(coarse: f64, fine: f64) -> f64 {
    (100.0 * fine - coarse) / 99.0
}

/// `S(n)1` as the symmetric limit `s → n`.
pub fn scattering_limit_at_n(m: &PoincareModel) -> Result<f64> {
    scattering_limit_at_n_with(m, ScatteringOptions::default())
}

pub fn scattering_limit_at_n_with(m: &PoincareModel, opts: ScatteringOptions) -> Result<f64> {
    let v = values_around_n(m, opts)?;
    Ok(richardson10((v[0] + v[1]) / 2.0, (v[2] + v[3]) / 2.0))
}

/// `𝒮 = d/ds S(s)1` at `s = n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringDerivative {
    pub value: f64,
    /// Central differences at the two steps.
    pub coarse: f64,
    pub fine: f64,
    /// `S(n)1` from the same solves.
    pub limit: f64,
}

pub fn scattering_derivative(m: &PoincareModel) -> Result<ScatteringDerivative> {
    scattering_derivative_with(m, ScatteringOptions::default())
}

pub fn scattering_derivative_with(m: &PoincareModel, opts: ScatteringOptions) -> Result<ScatteringDerivative> {
    let v = values_around_n(m, opts)?;
    let (h1, h2) = DIFF_STEPS;
    let coarse = (v[0] - v[1]) / (2.0 * h1);
    let fine = (v[2] - v[3]) / (2.0 * h2);
    if (coarse - fine).abs() > 1e-3 * (1.0 + fine.abs()) {
        return Err(Error::Differentiation(format!("difference quotients {coarse} and {fine} disagree")));
    }
    Ok(ScatteringDerivative {
        value: richardson10(coarse, fine),
        coarse,
        fine,
        limit: richardson10((v[0] + v[1]) / 2.0, (v[2] + v[3]) / 2.0),
    })
}

/// `Q_n = S(n)1 / c_{n/2}` for even `n`.
pub fn q_from_scattering(m: &PoincareModel) -> Result<f64> {
    let n = m.dim();
    if n % 2 == 1 {
        return Err(Error::Scope("Q from S(n)1 needs even n".into()));
    }
    Ok(scattering_limit_at_n(m)? / ck((n / 2) as u32))
}

/// `V = -𝒮 vol(M)` for odd `n`.
pub fn volume_via_scattering_odd(m: &PoincareModel) -> Result<f64> {
    if m.dim() % 2 == 0 {
        return Err(Error::Scope("odd-n scattering volume called with even n".into()));
    }
    Ok(-scattering_derivative(m)?.value * m.boundary.total_volume)
}

/// `(a₂', a₄')` for `n = 4`: `-¼ Tr g⁽²⁾` and `(3 (Tr g⁽²⁾)² + Δ̂ Tr g⁽²⁾)/32`.
pub fn a_primes(boundary: &SpaceForm, n: usize) -> Result<(f64, f64)> {
    if n != 4 || boundary.dim != 4 {
        return Err(Error::Scope(format!("closed forms for a₂', a₄' need n = 4, got {n}")));
    }
    let tr = fg_tr_g2(boundary)?;
    Ok((-tr / 4.0, 3.0 * tr * tr / 32.0))
}

/// `d/ds a_{2k}(s)` at `s = n` by central differences on the recursion,
/// `k = 1..=n/2`.
pub fn a_primes_fd(m: &PoincareModel) -> Result<Vec<f64>> {
    let n = m.dim();
    let nf = n as f64;
    let order = n as i32 + 2;
    let a = |s: f64| -> Result<Vec<f64>> {
        let (f, _) = frobenius_pair(m, s, order)?;
        Ok((1..=n / 2).map(|k| f.series.c(2 * k as i32)).collect())
    };
    let (h1, h2) = DIFF_STEPS;
    let (p1, m1, p2, m2) = (a(nf + h1)?, a(nf - h1)?, a(nf + h2)?, a(nf - h2)?);
    Ok((0..n / 2)
        .map(|i| richardson10((p1[i] - m1[i]) / (2.0 * h1), (p2[i] - m2[i]) / (2.0 * h2)))
        .collect())
}

/// Even-`n` volume from the scattering derivative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnomalyReport {
    pub n: usize,
    #[serde(rename = "S_deriv")]
    pub s_deriv: f64,
    /// `-𝒮 vol(M)`.
    pub scattering_term: f64,
    /// Curvature term: `0` for `n = 2`, `-(1/(32·36)) ∫R²` for `n = 4`.
    pub curvature_term: f64,
    /// `-(1/n) Σ 2k a'_{2k} v^{(n-2k)} vol - a_n' vol` from difference quotients.
    pub a_prime_term: f64,
    #[serde(rename = "V_scatter")]
    pub v_scatter: f64,
    #[serde(rename = "V_quadrature")]
    pub v_quadrature: f64,
}

pub fn volume_via_scattering_even(m: &PoincareModel) -> Result<AnomalyReport> {
    let n = m.dim();
    if n != 2 && n != 4 {
        return Err(Error::Scope(format!("even-n scattering volume implemented for n ∈ {{2, 4}}, got {n}")));
    }
    let vol = m.boundary.total_volume;
    let d = scattering_derivative(m)?;
    let r = m.boundary.scalar_curvature();
    let curvature_term = if n == 2 { 0.0 } else { -r * r * vol / (32.0 * 36.0) };
    let ap = a_primes_fd(m)?;
    let v = vcoeffs(&m.boundary, n)?;
    let nf = n as f64;
    let mut a_prime_term = -ap[n / 2 - 1] * vol;
    for k in 1..n / 2 {
        a_prime_term -= 2.0 * k as f64 * ap[k - 1] * v[n / 2 - k - 1] * vol / nf;
    }
    let v_quadrature = crate::volume::volume_expansion_series(m)?.v;
    Ok(AnomalyReport {
        n,
        s_deriv: d.value,
        scattering_term: -d.value * vol,
        curvature_term,
        a_prime_term,
        v_scatter: curvature_term - d.value * vol,
        v_quadrature,
    })
}

/// Model over the boundary metric `e^{2w} ĝ` for constant `w`.
pub fn rescaled_model(m: &PoincareModel, w: f64) -> PoincareModel {
    poincare_einstein_model(m.boundary.rescaled(w.exp()))
}

/// `S_{ĝ_w}(s)1` against `e^{(n-2s)w} S(s)1`, and
/// `e^{nw} S_{ĝ_w}(n)1` against `S(n)1`.
pub fn conformal_scaling_check(m: &PoincareModel, w: f64, s: f64) -> Result<(Comparison, Comparison)> {
    let n = m.dim() as f64;
    let mw = rescaled_model(m, w);
    let at_s = Comparison::new(scattering_value(&mw, s)?, ((n - 2.0 * s) * w).exp() * scattering_value(m, s)?);
    let at_n = Comparison::new((n * w).exp() * scattering_limit_at_n(&mw)?, scattering_limit_at_n(m)?);
    Ok((at_s, at_n))
}

/// `d/dα ∫𝒮_{e^{2αw}ĝ} dv` at `α = 0` against `-2 c_{n/2} w Q_n vol(M)`.
pub fn anomaly_variation_check(m: &PoincareModel, w: f64) -> Result<Comparison> {
    let n = m.dim();
    if n % 2 == 1 {
        return Err(Error::Scope("the anomaly variation needs even n".into()));
    }
    const ALPHA: f64 = 1e-3;
    let integral = |a: f64| -> Result<f64> {
        let ma = rescaled_model(m, a * w);
        Ok(scattering_derivative(&ma)?.value * ma.boundary.total_volume)
    };
    let lhs = if w == 0.0 { 0.0 } else { (integral(ALPHA)? - integral(-ALPHA)?) / (2.0 * ALPHA) };
    let c = ck((n / 2) as u32);
    let q = q_from_scattering(m)?;
    Ok(Comparison::new(lhs, -2.0 * c * w * q * m.boundary.total_volume))
}

/// `v = -d/ds|_{s=n} 𝒫(s)1` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringV {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    /// `max |-Δv - n|` on `xs`.
    pub equation_residual: f64,
}

pub fn v_via_scattering(m: &PoincareModel, xs: &[f64]) -> Result<ScatteringV> {
    let n = m.dim() as f64;
    let (h1, h2) = DIFF_STEPS;
    let ss = [n + h1, n - h1, n + h2, n - h2];
    let opts = ScatteringOptions::default();
    let sols: Vec<ScatteringSolution> = ss.par_iter().map(|&s| poisson_solve_with(m, s, opts)).collect::<Result<_>>()?;
    let (h, f) = m.metric_series();
    let mut values = Vec::with_capacity(xs.len());
    let mut residual: f64 = 0.0;
    for &x in xs {
        let j: Vec<LogSeries> = sols.iter().map(|s| s.u_jet(x, 6)).collect::<Result<_>>()?;
        let coarse = (&j[0] - &j[1]).scale(1.0 / (2.0 * h1));
        let fine = (&j[2] - &j[3]).scale(1.0 / (2.0 * h2));
        let v = (&fine.scale(100.0) - &coarse).scale(-1.0 / 99.0);
        let lap = radial_laplacian(&h.rebase(x, 4)?, &f.rebase(x, 4)?, m.dim(), &v)?;
        residual = residual.max((lap.c(0) + n).abs());
        values.push(v.c(0));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Differentiation("nonfinite difference quotient".into()));
    }
    Ok(ScatteringV { xs: xs.to_vec(), values, equation_residual: residual })
}

/// `S(s)1` at each `s`.
pub fn scattering_sweep(m: &PoincareModel, ss: &[f64]) -> Result<Vec<(f64, f64)>> {
    ss.par_iter().map(|&s| Ok((s, scattering_value(m, s)?))).collect()
}
