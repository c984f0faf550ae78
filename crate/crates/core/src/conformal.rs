//! Fourth-order conformal geometry of radial metrics in total dimension 4:
//! the Paneitz operator, `Q₄`, the boundary operator `P_b`, the boundary
//! curvatures `T` and `𝓛`, and the Gauss–Bonnet–Chern assembly. Also the
//! GJMS product formula on Einstein metrics.
//!
//! All operators act on radial functions, so tangential derivatives on the
//! homogeneous slices vanish and are dropped. `Δ` is the trace of the
//! Hessian, and normal derivatives use the outward unit normal.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{curvature_series, radial_divergence, radial_laplacian, EndKind, Profile, RadialMetric};
use crate::quadrature::integrate;
use crate::series::LogSeries;
use crate::special::{factorial, gamma_half};

/// Coefficient of `ΔR` in `Q₄ = (1/6)(-ΔR + R² - 3|Ric|²)`.
pub const Q4_LAPLACIAN_R_COEFF: f64 = -1.0 / 6.0;

const JET_ORDER: usize = 8;

fn require_dim4(m: &RadialMetric) -> Result<()> {
    if m.dim() == 3 {
        Ok(())
    } else {
        Err(Error::Scope(format!("fourth-order operators need total dimension 4, got {}", m.dim() + 1)))
    }
}

/// `P₄u = Δ²u + δ((2/3)R g - 2 Ric) du` with `δ = -div`, as a jet at `x0`.
pub fn paneitz4_jet(m: &RadialMetric, u: &Profile, x0: f64) -> Result<LogSeries> {
    require_dim4(m)?;
    let (h, f) = m.jets(x0, JET_ORDER)?;
    let c = curvature_series(&h, &f, m.slice.kappa, 3)?;
    let uj = u.jet(x0, JET_ORDER)?;
    let lap = radial_laplacian(&h, &f, 3, &uj)?;
    let bilap = radial_laplacian(&h, &f, 3, &lap)?;
    let grad = uj.derivative().div(&h)?;
    let coef = &c.ric_rad.scale(2.0) - &c.scalar.scale(2.0 / 3.0);
    let flux = radial_divergence(&h, &f, 3, &(&coef * &grad))?;
    Ok(bilap + flux)
}

pub fn paneitz4_apply(m: &RadialMetric, u: &Profile, x0: f64) -> Result<f64> {
    Ok(paneitz4_jet(m, u, x0)?.c(0))
}

/// `Q₄` as a jet at `x0`.
pub fn q4_jet(m: &RadialMetric, x0: f64) -> Result<LogSeries> {
    require_dim4(m)?;
    let (h, f) = m.jets(x0, JET_ORDER)?;
    let c = curvature_series(&h, &f, m.slice.kappa, 3)?;
    let lap_r = radial_laplacian(&h, &f, 3, &c.scalar)?;
    Ok((&(&lap_r.scale(Q4_LAPLACIAN_R_COEFF * 6.0) + &(&c.scalar * &c.scalar)) - &c.ric_norm2.scale(3.0)).scale(1.0 / 6.0))
}

pub fn q4_curvature(m: &RadialMetric, x0: f64) -> Result<f64> {
    Ok(q4_jet(m, x0)?.c(0))
}

/// `|W|²` at `x0`.
pub fn weyl_norm2(m: &RadialMetric, x0: f64) -> Result<f64> {
    Ok(m.curvature_at(x0, 4)?.weyl_norm2.c(0))
}

/// Residuals of the conformal covariance laws at `x0` for `g_w = e^{2w}g`:
/// `P w + Q - Q_w e^{4w}` and, for each `u` in `basket`,
/// `P_w u - e^{-4w} P u`. `g_w` is a fresh [`RadialMetric`] whose
/// curvature is recomputed from its own lapse and warp.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceResidual {
    pub x0: f64,
    pub q_law: f64,
    pub operator_law: f64,
    pub scale: f64,
}

pub fn conformal_covariance_at(m: &RadialMetric, w: &Profile, basket: &[Profile], x0: f64) -> Result<CovarianceResidual> {
    let gw = m.conformal(w.clone());
    let wv = w.value(x0)?;
    let pw = paneitz4_apply(m, w, x0)?;
    let q = q4_curvature(m, x0)?;
    let qw = q4_curvature(&gw, x0)?;
    let rhs = qw * (4.0 * wv).exp();
    let mut scale = 1.0f64.max(q.abs()).max(rhs.abs()).max(pw.abs());
    let q_law = pw + q - rhs;
    let mut operator_law: f64 = 0.0;
    for u in basket {
        let a = paneitz4_apply(&gw, u, x0)?;
        let b = (-4.0 * wv).exp() * paneitz4_apply(m, u, x0)?;
        scale = scale.max(a.abs()).max(b.abs());
        operator_law = operator_law.max((a - b).abs());
    }
    Ok(CovarianceResidual { x0, q_law, operator_law, scale })
}

/// Largest relative residual of [`conformal_covariance_at`] over `grid`.
pub fn check_conformal_covariance(m: &RadialMetric, w: &Profile, basket: &[Profile], grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in grid {
        let r = conformal_covariance_at(m, w, basket, x)?;
        worst = worst.max(r.q_law.abs().max(r.operator_law) / r.scale);
    }
    Ok(worst)
}

/// Third-order boundary curvature at the end `x0` of the domain:
/// `T = (1/12)∂_νR + (1/6)RH - R_{αNβN}L_{αβ} + (1/9)H³ - (1/3)tr L³`.
pub fn boundary_t(m: &RadialMetric, x0: f64) -> Result<f64> {
    require_dim4(m)?;
    let b = m.boundary_geometry(x0, JET_ORDER)?;
    let n = 3.0;
    let hm = b.mean_curvature;
    Ok(b.d_nu_scalar / 12.0 + b.scalar * hm / 6.0 - b.k_rad * hm + hm.powi(3) / 9.0 - n * b.l_diag.powi(3) / 3.0)
}

/// `𝓛 = (1/3)RH - FH + R_{αNβN}L_{αβ} - R_{αγβγ}L_{αβ} + (2/9)H³ - H tr L² + tr L³`
/// with `F = Ric(ν, ν)`.
pub fn boundary_l(m: &RadialMetric, x0: f64) -> Result<f64> {
    require_dim4(m)?;
    let b = m.boundary_geometry(x0, JET_ORDER)?;
    let n = 3.0;
    let hm = b.mean_curvature;
    let l = b.l_diag;
    Ok(b.scalar * hm / 3.0 - b.ric_normal * hm + b.k_rad * hm - (n - 1.0) * b.k_tan * hm + 2.0 * hm.powi(3) / 9.0
        - hm * n * l * l
        + n * l.powi(3))
}

/// `P_b u = -½ ∂_ν Δu - (F - R/3) ∂_ν u` at the end `x0`.
pub fn boundary_pb_apply(m: &RadialMetric, x0: f64, u: &Profile) -> Result<f64> {
    require_dim4(m)?;
    let b = m.boundary_geometry(x0, JET_ORDER)?;
    let (h, f) = m.jets(x0, JET_ORDER)?;
    let uj = u.jet(x0, JET_ORDER)?;
    let lap = radial_laplacian(&h, &f, 3, &uj)?;
    let d_nu = |s: &LogSeries| b.normal_sign * s.c(1) / h.c(0);
    Ok(-0.5 * d_nu(&lap) - (b.ric_normal - b.scalar / 3.0) * d_nu(&uj))
}

/// Residual of `P_b w + T - T_w e^{3w}` at the end `x0`.
pub fn check_boundary_conformal_law(m: &RadialMetric, w: &Profile, x0: f64) -> Result<(f64, f64)> {
    let gw = m.conformal(w.clone());
    let lhs = boundary_pb_apply(m, x0, w)? + boundary_t(m, x0)?;
    let rhs = boundary_t(&gw, x0)? * (3.0 * w.value(x0)?).exp();
    Ok((lhs, rhs))
}

/// Breakdown of the four-dimensional Gauss–Bonnet–Chern formula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussBonnet {
    pub interior: f64,
    pub boundary: f64,
    pub chi: f64,
    pub quadrature_error: f64,
}

/// `χ = (1/8π²)∫(|W|² + Q₄) dv + (1/4π²)∮(𝓛 + T) dσ`.
pub fn gauss_bonnet_4d(m: &RadialMetric) -> Result<GaussBonnet> {
    require_dim4(m)?;
    if m.ends.contains(&EndKind::Open) {
        return Err(Error::Scope("Gauss–Bonnet needs a compact radial metric".into()));
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let density = |x: f64| -> f64 {
        let eval = || -> Result<f64> {
            let w2 = weyl_norm2(m, x)?;
            let q = q4_curvature(m, x)?;
            Ok((w2 + q) * m.volume_density(x)?)
        };
        match eval() {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let (a, b) = m.domain;
    let quad = integrate(density, a, b, 1e-11, 1e-13);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let quad = quad?;
    let interior = quad.value * m.slice.total_volume / (8.0 * PI * PI);
    let mut boundary = 0.0;
    for (x0, kind) in [(a, m.ends[0]), (b, m.ends[1])] {
        if kind == EndKind::Boundary {
            let g = m.boundary_geometry(x0, JET_ORDER)?;
            boundary += (boundary_l(m, x0)? + boundary_t(m, x0)?) * g.slice_volume / (4.0 * PI * PI);
        }
    }
    Ok(GaussBonnet {
        interior,
        boundary,
        chi: interior + boundary,
        quadrature_error: quad.error * m.slice.total_volume / (8.0 * PI * PI),
    })
}

/// `∏_l (-Δ - C_l)` on `H^{n+1}`, `C_l = ((n+1)/2 + l - 1)((n+1)/2 - l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GjmsPolynomial {
    pub n: usize,
    pub roots: Vec<f64>,
    /// Coefficients in `y = -Δ`, ascending powers.
    pub coeffs: Vec<f64>,
}

pub fn gjms_polynomial(n: usize) -> Result<GjmsPolynomial> {
    if n % 2 == 0 {
        return Err(Error::Scope(format!("the GJMS product is used for odd n, got {n}")));
    }
    let k = (n + 1) / 2;
    let roots: Vec<f64> = (1..=k).map(|l| ((k + l - 1) * (k - l)) as f64).collect();
    let mut coeffs = vec![1.0];
    for c in &roots {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (i, a) in coeffs.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= c * a;
        }
        coeffs = next;
    }
    Ok(GjmsPolynomial { n, roots, coeffs })
}

impl GjmsPolynomial {
    /// Order of the operator, `n + 1`.
    pub fn order(&self) -> usize {
        2 * (self.coeffs.len() - 1)
    }

    /// Apply to the jet `u` with the Laplacian of `(h, f)`.
    pub fn apply_jet(&self, h: &LogSeries, f: &LogSeries, u: &LogSeries) -> Result<LogSeries> {
        let mut power = u.clone();
        let mut total = power.scale(self.coeffs[0]);
        for &c in &self.coeffs[1..] {
            power = -radial_laplacian(h, f, self.n, &power)?;
            total = &total + &power.scale(c);
        }
        Ok(total)
    }

    pub fn apply(&self, m: &RadialMetric, u: &Profile, x0: f64) -> Result<f64> {
        let order = self.order() + 2;
        let (h, f) = m.jets(x0, order)?;
        Ok(self.apply_jet(&h, &f, &u.jet(x0, order)?)?.c(0))
    }
}

/// `Q_{n+1} = (-1)^{(n+1)/2} n!` on `H^{n+1}`.
pub fn hyperbolic_q(n: usize) -> f64 {
    let sign = if (n + 1) / 2 % 2 == 0 { 1.0 } else { -1.0 };
    sign * factorial(n as u32)
}

/// `b_m = (-1)^{(m-2)/2} 2^{m-1} (m/2)! Γ((m+1)/2) / (√π (m-1) m!)`.
pub fn bm_constant(m: usize) -> Result<f64> {
    if m % 2 == 1 || m < 2 {
        return Err(Error::Scope(format!("b_m is defined for even m ≥ 2, got {m}")));
    }
    let sign = if (m - 2) / 2 % 2 == 0 { 1.0 } else { -1.0 };
    let num = 2f64.powi(m as i32 - 1) * factorial((m / 2) as u32) * gamma_half(m as i64 + 1)?;
    Ok(sign * num / (PI.sqrt() * (m - 1) as f64 * factorial(m as u32)))
}

/// `(∫u P₄w dv, ∫w P₄u dv)` over `[a, b]`.
pub fn paneitz_pairing(m: &RadialMetric, u: &Profile, w: &Profile, a: f64, b: f64) -> Result<(f64, f64)> {
    let pair = |p: &Profile, q: &Profile| -> Result<f64> {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let r = integrate(
            |x| match (|| -> Result<f64> { Ok(p.value(x)? * paneitz4_apply(m, q, x)? * m.volume_density(x)?) })() {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            a,
            b,
            1e-10,
            1e-13,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(r?.value * m.slice.total_volume)
    };
    Ok((pair(u, w)?, pair(w, u)?))
}
