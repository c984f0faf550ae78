//! The equation `-Δv = n` on the models: radial solution, boundary
//! coefficient `B₀`, `Q_n = k_n B₀`, and the compactified metric `e^{2v}g`.
//!
//! Near `x = 0` the solution is `v = log x + A + B xⁿ` (with `xⁿ log x`
//! terms for even `n`). The series recursion fixes `A` and leaves the `xⁿ`
//! coefficient free, so `w = v - log x` on a boundary window is fitted by
//! `w₀ + S₀ + B₀ S₁`, where `S₀` is the particular series and `S₁` the
//! homogeneous one starting at `xⁿ`.

use std::sync::Arc;

use serde::Serialize;

use crate::check::Comparison;
use crate::conformal::{boundary_t, gjms_polynomial, hyperbolic_q, q4_curvature};
use crate::error::{Error, Result};
use crate::fit::{log_grid, lstsq};
use crate::geometry::{
    curvature_series, exp_of, product, radial_laplacian, EndKind, PoincareModel, Profile, RadialMetric, RadialProfile,
};
use crate::radial_ode::{
    boundary_frobenius, log_derivative_series, solve_two_resolutions, warp_polynomial, FrobeniusProblem,
    FrobeniusSeries, IntegratorOptions, RadialOde, RadialSolution,
};
use crate::series::LogSeries;
use crate::special::{factorial, gamma_half};
use crate::volume::VolumeExpansion;

/// `k_n = 2ⁿ Γ(n/2) / Γ(-n/2)` for odd `n`.
pub fn kn_constant(n: usize) -> Result<f64> {
    if n % 2 == 0 {
        return Err(Error::Pole(format!("Γ(-n/2) has a pole for even n = {n}")));
    }
    Ok(2f64.powi(n as i32) * gamma_half(n as i64)? / gamma_half(-(n as i64))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VMethod {
    BvpShooting,
    ScatteringDerivative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VSolveOptions {
    /// Boundary fit window in `x`.
    pub window: (f64, f64),
    pub window_points: usize,
    pub boundary_order: i32,
    pub integrator: IntegratorOptions,
}

impl Default for VSolveOptions {
    fn default() -> Self {
        Self { window: (1e-3, 1e-1), window_points: 40, boundary_order: 40, integrator: IntegratorOptions::default() }
    }
}

/// Radial solution of `-Δv = n`, regular at the center, `v - log x → 0`.
#[derive(Debug, Clone)]
pub struct VSolution {
    pub model: PoincareModel,
    pub n: usize,
    pub method: VMethod,
    pub options: VSolveOptions,
    /// `v = solution - shift`.
    pub solution: RadialSolution,
    pub shift: f64,
    pub particular: FrobeniusSeries,
    pub homogeneous: FrobeniusSeries,
    pub b0: f64,
    /// `B₀` from the coarse integration.
    pub b0_coarse: f64,
    pub kn: Option<f64>,
    pub qn: Option<f64>,
    /// Coefficients of `A = S₀` by degree.
    pub a_coeffs: Vec<f64>,
    pub fit_residual: f64,
    pub integration_error: f64,
}

fn fit_boundary(
    sol: &RadialSolution,
    s0: &FrobeniusSeries,
    s1: &FrobeniusSeries,
    xs: &[f64],
) -> Result<(f64, f64, f64)> {
    let mut y = Vec::with_capacity(xs.len());
    let mut c1 = Vec::with_capacity(xs.len());
    for &x in xs {
        y.push(sol.value(x)? - x.ln() - s0.eval(x)?);
        c1.push(s1.eval(x)?);
    }
    let fit = lstsq(&[vec![1.0; xs.len()], c1], &y, 1e12)
        .map_err(|e| Error::Extraction(format!("boundary fit failed: {e}")))?;
    Ok((fit.coeffs[0], fit.coeffs[1], fit.residual))
}

pub fn solve_v(m: &PoincareModel) -> Result<VSolution> {
    solve_v_with(m, VSolveOptions::default())
}

pub fn solve_v_with(m: &PoincareModel, opts: VSolveOptions) -> Result<VSolution> {
    m.require_global()?;
    let n = m.dim();
    let (lo, hi) = opts.window;
    if !(lo > 0.0 && hi > lo && hi < m.x_center) || opts.window_points < 4 {
        return Err(Error::Extraction(format!("fit window {:?} is unusable", opts.window)));
    }
    if hi / lo < 2.0 {
        return Err(Error::Extraction(format!("fit window {:?} is too narrow", opts.window)));
    }
    let phi = warp_polynomial(&m.warp)?;
    let e = log_derivative_series(&phi, opts.boundary_order)?;
    let src = e.scale(-(n as f64));
    let nk = n as i32;
    let particular = boundary_frobenius(&FrobeniusProblem {
        n,
        lambda: 0.0,
        alpha: 0.0,
        e: &e,
        source: Some(&src),
        free: &[(0, 0.0), (nk, 0.0)],
        order: opts.boundary_order,
    })?;
    let homogeneous = boundary_frobenius(&FrobeniusProblem {
        n,
        lambda: 0.0,
        alpha: 0.0,
        e: &e,
        source: None,
        free: &[(0, 0.0), (nk, 1.0)],
        order: opts.boundary_order,
    })?;
    let ode = RadialOde { n, lambda: 0.0, sigma: -(n as f64), phi, x_center: m.x_center };
    let xs = log_grid(lo, hi, opts.window_points);
    let coarse_opts = opts.integrator;
    let (fine, integration_error) = solve_two_resolutions(&ode, 0.0, lo * 0.5, coarse_opts, &xs)?;
    let coarse = crate::radial_ode::solve_from_center(&ode, 0.0, lo * 0.5, coarse_opts)?;
    let (shift, b0, fit_residual) = fit_boundary(&fine, &particular, &homogeneous, &xs)?;
    let (_, b0_coarse, _) = fit_boundary(&coarse, &particular, &homogeneous, &xs)?;
    let kn = kn_constant(n).ok();
    let qn = kn.map(|k| k * b0);
    let a_coeffs = (0..=opts.boundary_order).map(|k| particular.series.coeff(k, 0)).collect();
    Ok(VSolution {
        model: m.clone(),
        n,
        method: VMethod::BvpShooting,
        options: opts,
        solution: fine,
        shift,
        particular,
        homogeneous,
        b0,
        b0_coarse,
        kn,
        qn,
        a_coeffs,
        fit_residual,
        integration_error,
    })
}

impl VSolution {
    pub fn v(&self, x: f64) -> Result<f64> {
        Ok(self.solution.value(x)? - self.shift)
    }

    /// Jet of `v` in `ξ = x - x0` from the integrated solution.
    pub fn v_jet(&self, x0: f64, order: usize) -> Result<LogSeries> {
        Ok(self.solution.x_jet(x0, order)?.add_scalar(-self.shift))
    }

    /// `w = v - log x` near the boundary: `S₀ + B₀ S₁`.
    pub fn boundary_w(&self) -> LogSeries {
        &self.particular.series + &self.homogeneous.series.scale(self.b0)
    }

    /// Profile of `w = v - log x` on `[0, x_center)`.
    pub fn w_profile(&self) -> Profile {
        Arc::new(WProfile { sol: self.clone(), boundary: self.boundary_w(), switch: self.options.window.1 })
    }

    /// `max |-Δv - n|` over `grid`.
    pub fn equation_residual(&self, grid: &[f64]) -> Result<f64> {
        let (h, f) = self.model.metric_series();
        let mut worst: f64 = 0.0;
        for &x in grid {
            let hj = h.rebase(x, 4)?;
            let fj = f.rebase(x, 4)?;
            let lap = radial_laplacian(&hj, &fj, self.n, &self.v_jet(x, 6)?)?;
            worst = worst.max((lap.c(0) + self.n as f64).abs());
        }
        Ok(worst)
    }

    /// `max |P_{(n+1)/2} v + Q_{n+1}|` over `grid`, odd `n`.
    pub fn gjms_residual(&self, grid: &[f64]) -> Result<f64> {
        let p = gjms_polynomial(self.n)?;
        let q = hyperbolic_q(self.n);
        let order = p.order() + 2;
        let (h, f) = self.model.metric_series();
        let mut worst: f64 = 0.0;
        for &x in grid {
            let pv = p.apply_jet(&h.rebase(x, order)?, &f.rebase(x, order)?, &self.v_jet(x, order)?)?;
            worst = worst.max((pv.c(0) + q).abs());
        }
        Ok(worst)
    }

    /// Largest odd coefficient below degree `n` in a free polynomial fit of
    /// `v - log x` on the boundary window.
    pub fn odd_coefficient_fit(&self) -> Result<f64> {
        let (lo, hi) = self.options.window;
        let xs = log_grid(lo, hi, 60);
        let top = self.n + 3;
        let mut cols: Vec<Vec<f64>> = (0..=top).map(|k| xs.iter().map(|x| x.powi(k as i32)).collect()).collect();
        if self.n % 2 == 0 {
            cols.push(xs.iter().map(|x| x.powi(self.n as i32) * x.ln()).collect());
        }
        let y: Vec<f64> = xs.iter().map(|&x| Ok(self.v(x)? - x.ln())).collect::<Result<_>>()?;
        let fit = lstsq(&cols, &y, 1e14)?;
        Ok((1..self.n).step_by(2).map(|k| fit.coeffs[k].abs()).fold(0.0, f64::max))
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "B0": self.b0,
            "Qn": self.qn,
            "kn": self.kn,
            "fit_residual": self.fit_residual,
            "integration_error": self.integration_error,
            "b0_resolution_change": (self.b0 - self.b0_coarse).abs(),
            "method": self.method,
        })
    }
}

struct WProfile {
    sol: VSolution,
    boundary: LogSeries,
    switch: f64,
}

impl RadialProfile for WProfile {
    fn jet(&self, x0: f64, order: usize) -> Result<LogSeries> {
        if x0 <= self.switch {
            return self.boundary.rebase(x0, order);
        }
        let log = LogSeries::identity_jet(x0, order).ln()?;
        Ok(&self.sol.v_jet(x0, order)? - &log)
    }
}

/// `((1/k_n) Q_n vol(M), V)`.
pub fn check_q_integral(sol: &VSolution, b0: f64, vol: &VolumeExpansion) -> Result<Comparison> {
    let kn = kn_constant(sol.n)?;
    let qn = kn * b0;
    Ok(Comparison::new(qn * vol.boundary_volume / kn, vol.v))
}

/// `e^{2v} g = e^{2w}(dx² + φ² ĝ₀)` with `w = v - log x`; odd `n` only.
pub fn compactify(sol: &VSolution) -> Result<RadialMetric> {
    if sol.n % 2 == 0 {
        return Err(Error::Scope("the compactified metric is smooth at x = 0 only for odd n".into()));
    }
    let ew = exp_of(sol.w_profile());
    let phi: Profile = Arc::new(LogSeries::from_coeffs(0, &warp_polynomial(&sol.model.warp)?, 64));
    Ok(RadialMetric::new(
        ew.clone(),
        product(ew, phi),
        sol.model.boundary,
        (0.0, sol.model.x_center),
        [EndKind::Boundary, EndKind::Center],
    ))
}

/// `max |Q₄|` over `grid`.
pub fn check_q_vanishing(compact: &RadialMetric, grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in grid {
        worst = worst.max(q4_curvature(compact, x)?.abs());
    }
    Ok(worst)
}

/// Scalar curvature of `compact` as a power series at `x = 0`.
pub fn scalar_curvature_at_boundary(compact: &RadialMetric, order: usize) -> Result<(LogSeries, LogSeries, LogSeries)> {
    let (h, f) = compact.jets(0.0, order + 2)?;
    let c = curvature_series(&h, &f, compact.slice.kappa, compact.dim())?;
    Ok((c.scalar, h, f))
}

/// Odd part of `R` at `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarExpansion {
    /// Coefficient of `x^{n-2}` against `-2n²(n-1)B₀`.
    pub leading: Comparison,
    /// Largest odd coefficient below degree `n - 2`.
    pub lower_odd: f64,
}

pub fn check_scalar_expansion(compact: &RadialMetric, b0: f64) -> Result<ScalarExpansion> {
    let n = compact.dim();
    let (r, _, _) = scalar_curvature_at_boundary(compact, n + 2)?;
    let nf = n as f64;
    let leading = Comparison::new(r.c(n as i32 - 2), -2.0 * nf * nf * (nf - 1.0) * b0);
    let lower_odd = (1..n as i32 - 2).step_by(2).map(|k| r.c(k).abs()).fold(0.0, f64::max);
    Ok(ScalarExpansion { leading, lower_odd })
}

/// `∂ₓ Δ^{(n-3)/2} R |₀` against `-2n·n!·B₀`, for `n ∈ {3, 5}`.
pub fn check_laplacian_power(compact: &RadialMetric, b0: f64) -> Result<Comparison> {
    let n = compact.dim();
    if n != 3 && n != 5 {
        return Err(Error::Scope(format!("n = {n} outside {{3, 5}}")));
    }
    let (mut r, h, f) = scalar_curvature_at_boundary(compact, n + 3)?;
    for _ in 0..(n - 3) / 2 {
        r = radial_laplacian(&h, &f, n, &r)?;
    }
    Ok(Comparison::new(r.c(1), -2.0 * n as f64 * factorial(n as u32) * b0))
}

/// `T` at the totally geodesic boundary, three ways.
#[derive(Debug, Clone, PartialEq)]
pub struct TCurvature {
    /// `-(1/12) ∂ₓR|₀`.
    pub from_scalar: f64,
    /// Full boundary formula with the outward normal.
    pub from_formula: f64,
    /// `3B₀`.
    pub expected: f64,
}

pub fn t_curvature_check(compact: &RadialMetric, b0: f64) -> Result<TCurvature> {
    if compact.dim() != 3 {
        return Err(Error::Scope("T-curvature needs n = 3".into()));
    }
    let (r, _, _) = scalar_curvature_at_boundary(compact, 4)?;
    Ok(TCurvature { from_scalar: -r.c(1) / 12.0, from_formula: boundary_t(compact, 0.0)?, expected: 3.0 * b0 })
}
