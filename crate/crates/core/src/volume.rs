//! Renormalized volume of the model metrics, by term-wise antidifferentiation
//! of the volume density and independently by fitting quadratures of
//! `Vol({x > ε})` in `ε`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::lstsq;
use crate::geometry::PoincareModel;
use crate::quadrature::integrate;
use crate::radial_ode::warp_polynomial;
use crate::series::LogSeries;
use crate::special::{factorial, gamma_half};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeMethod {
    Series,
    Fit,
}

/// `Vol({x > ε}) = Σ c_{2k} ε^{-n+2k} (+ L log(1/ε)) + V + o(1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeExpansion {
    pub n: usize,
    pub method: VolumeMethod,
    /// `c₀, c₂, …` of the divergent powers `ε^{-n}, ε^{-n+2}, …`.
    pub c: Vec<f64>,
    #[serde(rename = "L")]
    pub log_coeff: Option<f64>,
    #[serde(rename = "V")]
    pub v: f64,
    pub fit_residual: f64,
    /// Volume of `(M, ĝ)` the expansion refers to.
    pub boundary_volume: f64,
}

impl VolumeExpansion {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// `x^{-(n+1)} φⁿ` exactly (a Laurent polynomial for polynomial warps).
pub fn exact_volume_density(m: &PoincareModel) -> Result<LogSeries> {
    let phi = warp_polynomial(&m.warp)?;
    let n = m.dim();
    let deg = ((phi.len() - 1) * n) as i32;
    let phin = LogSeries::from_coeffs(0, &phi, deg).powi(n as i32)?;
    Ok(phin.shift(-(n as i32 + 1)))
}

fn density(m: &PoincareModel) -> Result<impl Fn(f64) -> f64 + Sync> {
    let phi = warp_polynomial(&m.warp)?;
    let n = m.dim() as i32;
    Ok(move |x: f64| {
        let p = phi.iter().rev().fold(0.0, |acc, c| acc * x + c);
        x.powi(-(n + 1)) * p.powi(n)
    })
}

/// Expansion from the antiderivative of the density series on
/// `(ε, x_split]` and adaptive quadrature on `[x_split, x_center]`.
pub fn volume_expansion_series(m: &PoincareModel) -> Result<VolumeExpansion> {
    m.require_global()?;
    let n = m.dim() as i32;
    let vol = m.boundary.total_volume;
    let mu = exact_volume_density(m)?;
    let big_f = mu.antiderivative();
    let x_split = m.x_center / 2.0;
    let tail = integrate(density(m)?, x_split, m.x_center, 1e-14, 0.0)?.value;
    let c: Vec<f64> = (0..(n + 1) / 2).map(|k| -vol * big_f.coeff(-n + 2 * k, 0)).collect();
    let log_coeff = (n % 2 == 0).then(|| vol * big_f.coeff(0, 1));
    let v = vol * (big_f.eval(x_split)? + tail - big_f.coeff(0, 0));
    Ok(VolumeExpansion {
        n: n as usize,
        method: VolumeMethod::Series,
        c,
        log_coeff,
        v,
        fit_residual: 0.0,
        boundary_volume: vol,
    })
}

/// `Vol({ε < x < x_center})` by adaptive quadrature; for collars the
/// upper limit is the collar end.
pub fn volume_above(m: &PoincareModel, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < m.x_center) {
        return Err(Error::Domain(format!("ε = {eps} outside (0, {})", m.x_center)));
    }
    let r = integrate(density(m)?, eps, m.x_center, 1e-13, 0.0)?;
    Ok(m.boundary.total_volume * r.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Include `log(1/ε)` for even `n`.
    pub log_term: bool,
    /// Number of vanishing powers `ε^{1 or 2}, …` kept in the basis.
    pub tail_terms: Option<usize>,
    pub max_condition: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { log_term: true, tail_terms: None, max_condition: 1e12 }
    }
}

/// Twelve points, geometric, in `[x_center/16, 0.225 x_center]`.
pub fn default_eps_grid(m: &PoincareModel) -> Vec<f64> {
    let (lo, hi) = (m.x_center / 16.0, 0.225 * m.x_center);
    let r = (lo / hi).powf(1.0 / 11.0);
    (0..12).map(|i| hi * r.powi(i)).collect()
}

pub fn volume_expansion_fit(m: &PoincareModel, eps_grid: &[f64]) -> Result<VolumeExpansion> {
    volume_expansion_fit_with(m, eps_grid, FitOptions::default())
}

/// Least-squares fit of quadratures at `eps_grid` against
/// `ε^{-n}, ε^{-n+2}, …, [log(1/ε)], 1` and trailing vanishing powers.
pub fn volume_expansion_fit_with(m: &PoincareModel, eps_grid: &[f64], opts: FitOptions) -> Result<VolumeExpansion> {
    m.require_global()?;
    let n = m.dim();
    if eps_grid.len() < n + 2 {
        return Err(Error::FitQuality(format!("{} ε values; need at least {}", eps_grid.len(), n + 2)));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("ε grid must be strictly decreasing".into()));
    }
    if eps_grid[0] >= m.x_center / 4.0 || eps_grid[eps_grid.len() - 1] <= 0.0 {
        return Err(Error::Domain(format!("ε grid must lie in (0, {})", m.x_center / 4.0)));
    }
    let values: Vec<f64> = eps_grid.par_iter().map(|&e| volume_above(m, e)).collect::<Result<_>>()?;
    let core = (n + 1) / 2;
    let with_log = n % 2 == 0 && opts.log_term;
    let fixed = core + usize::from(with_log) + 1;
    let tail = opts
        .tail_terms
        .unwrap_or_else(|| eps_grid.len().saturating_sub(fixed).min((n + 1) / 2));
    let mut exps: Vec<i32> = (0..core).map(|k| -(n as i32) + 2 * k as i32).collect();
    let first_tail = if n % 2 == 0 { 2 } else { 1 };
    let tail_exps: Vec<i32> = (0..tail).map(|k| first_tail + 2 * k as i32).collect();
    let mut cols: Vec<Vec<f64>> = exps.iter().map(|&p| eps_grid.iter().map(|e| e.powi(p)).collect()).collect();
    if with_log {
        cols.push(eps_grid.iter().map(|e| (1.0 / e).ln()).collect());
    }
    cols.push(vec![1.0; eps_grid.len()]);
    for &p in &tail_exps {
        cols.push(eps_grid.iter().map(|e| e.powi(p)).collect());
    }
    exps.extend(&tail_exps);
    let fit = lstsq(&cols, &values, opts.max_condition)?;
    let c = fit.coeffs[..core].to_vec();
    let log_coeff = with_log.then(|| fit.coeffs[core]);
    let v = fit.coeffs[core + usize::from(with_log)];
    let scale = values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    Ok(VolumeExpansion {
        n,
        method: VolumeMethod::Fit,
        c,
        log_coeff: if n % 2 == 0 { Some(log_coeff.unwrap_or(0.0)) } else { None },
        v,
        fit_residual: fit.residual / scale,
        boundary_volume: m.boundary.total_volume,
    })
}

/// `((-1)^{(n+1)/2} π^{(n+2)/2} / Γ((n+2)/2) χ, (-1)^m 2^{2m} m! / (2m)! χ)`
/// with `n = 2m - 1`.
pub fn epstein_volume(n: usize, chi: i64) -> Result<(f64, f64)> {
    if n % 2 == 0 {
        return Err(Error::Scope(format!("hyperbolic volume formulas need odd n, got {n}")));
    }
    let sign = if (n + 1) / 2 % 2 == 0 { 1.0 } else { -1.0 };
    let v_hyp = sign * PI.powf((n as f64 + 2.0) / 2.0) / gamma_half(n as i64 + 2)? * chi as f64;
    let m = ((n + 1) / 2) as u32;
    let v_eps = sign * 4f64.powi(m as i32) * factorial(m) / factorial(2 * m) * chi as f64;
    Ok((v_hyp, v_eps))
}

/// `(1/8π²)∫|W|² + (3/4π²)V`.
pub fn anderson_check(weyl_sq_integral: f64, v: f64) -> f64 {
    weyl_sq_integral / (8.0 * PI * PI) + 3.0 * v / (4.0 * PI * PI)
}

/// `-(15/8π³)V` on conformally flat six-dimensional models.
pub fn gb6_check(m: &PoincareModel, v: f64) -> Result<f64> {
    if m.dim() != 5 {
        return Err(Error::Scope(format!("six-dimensional identity needs n = 5, got {}", m.dim())));
    }
    let w = m.curvature()?.weyl_norm2;
    if w.max_abs_coeff(w.order()) > 1e-10 {
        return Err(Error::Scope("the Weyl-dependent integral is not implemented".into()));
    }
    Ok(gb6_from_volume(v))
}

pub fn gb6_from_volume(v: f64) -> f64 {
    -15.0 * v / (8.0 * PI.powi(3))
}
