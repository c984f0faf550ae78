//! Cohomogeneity-one metrics `h(x)² dx² + f(x)² ĝ₀` over a space form,
//! the Poincaré–Einstein model family, and their curvature.
//!
//! Curvature is computed once, from the lapse and warp jets, using the
//! orthonormal-frame eigenvalues of the curvature operator:
//!
//! * mixed planes (radial ∧ tangential): `K_rad = -f_rr / f`
//! * tangential planes: `K_tan = (κ - f_r²) / f²`
//!
//! where `d/dr = h⁻¹ d/dx` is the unit radial derivative.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::LogSeries;
use crate::special::sphere_volume;

/// Constant-curvature slice geometry `(Mⁿ, ĝ₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceForm {
    pub dim: usize,
    pub kappa: f64,
    pub total_volume: f64,
    pub euler_char: Option<i64>,
}

impl SpaceForm {
    /// Space form with its default volume: the round sphere of radius
    /// `κ^{-1/2}` for `κ > 0`, unit volume otherwise.
    pub fn new(dim: usize, kappa: f64) -> Self {
        let total_volume = if kappa > 0.0 {
            sphere_volume(dim) * kappa.powf(-(dim as f64) / 2.0)
        } else {
            1.0
        };
        let euler_char = if kappa > 0.0 {
            Some(if dim % 2 == 0 { 2 } else { 0 })
        } else {
            None
        };
        Self { dim, kappa, total_volume, euler_char }
    }

    pub fn unit_sphere(dim: usize) -> Self {
        Self::new(dim, 1.0)
    }

    pub fn with_volume(mut self, total_volume: f64) -> Self {
        self.total_volume = total_volume;
        self
    }

    /// Rescale the slice metric by `λ²`: curvature `κ/λ²`, volume `λⁿ vol`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        Self {
            dim: self.dim,
            kappa: self.kappa / (lambda * lambda),
            total_volume: self.total_volume * lambda.powi(self.dim as i32),
            euler_char: self.euler_char,
        }
    }

    pub fn scalar_curvature(&self) -> f64 {
        let n = self.dim as f64;
        n * (n - 1.0) * self.kappa
    }

    pub fn ricci_eigenvalue(&self) -> f64 {
        (self.dim as f64 - 1.0) * self.kappa
    }

    pub fn ricci_norm2(&self) -> f64 {
        self.dim as f64 * self.ricci_eigenvalue().powi(2)
    }
}

/// A radial function, queried through its local jets.
pub trait RadialProfile: Send + Sync {
    /// Jet of the function at `x0`, as a series in `ξ = x - x0`.
    fn jet(&self, x0: f64, order: usize) -> Result<LogSeries>;

    fn value(&self, x: f64) -> Result<f64> {
        Ok(self.jet(x, 0)?.c(0))
    }
}

pub type Profile = Arc<dyn RadialProfile>;

impl RadialProfile for LogSeries {
    fn jet(&self, x0: f64, order: usize) -> Result<LogSeries> {
        self.rebase(x0, order)
    }
}

type JetFn = dyn Fn(&LogSeries) -> Result<LogSeries> + Send + Sync;

/// A closed-form profile written in series arithmetic on the coordinate jet.
#[derive(Clone)]
pub struct Analytic {
    name: String,
    f: Arc<JetFn>,
}

impl Analytic {
    pub fn new<F>(name: &str, f: F) -> Self
    where
        F: Fn(&LogSeries) -> Result<LogSeries> + Send + Sync + 'static,
    {
        Self { name: name.to_string(), f: Arc::new(f) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(&format!("{c}"), move |x| Ok(LogSeries::constant(c, x.order())))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn profile(self) -> Profile {
        Arc::new(self)
    }
}

impl fmt::Debug for Analytic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Analytic({})", self.name)
    }
}

impl RadialProfile for Analytic {
    fn jet(&self, x0: f64, order: usize) -> Result<LogSeries> {
        (self.f)(&LogSeries::identity_jet(x0, order))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndKind {
    /// A boundary hypersurface of the manifold.
    Boundary,
    /// The warp closes up smoothly (a single interior point).
    Center,
    /// Not part of the manifold (collars); global integrals are undefined.
    Open,
}

/// `h(x)² dx² + f(x)² ĝ₀` on `domain`.
#[derive(Clone)]
pub struct RadialMetric {
    pub lapse: Profile,
    pub warp: Profile,
    pub slice: SpaceForm,
    pub domain: (f64, f64),
    pub ends: [EndKind; 2],
}

impl fmt::Debug for RadialMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialMetric")
            .field("slice", &self.slice)
            .field("domain", &self.domain)
            .field("ends", &self.ends)
            .finish()
    }
}

/// Curvature of a radial metric as series (global) or local jets.
#[derive(Debug, Clone)]
pub struct CurvatureProfile {
    pub dim: usize,
    pub lapse: LogSeries,
    pub warp: LogSeries,
    pub k_rad: LogSeries,
    pub k_tan: LogSeries,
    pub scalar: LogSeries,
    pub ric_rad: LogSeries,
    pub ric_tan: LogSeries,
    pub ric_norm2: LogSeries,
    pub weyl_norm2: LogSeries,
}

/// Curvature from lapse and warp series in a common local variable.
pub fn curvature_series(h: &LogSeries, f: &LogSeries, kappa: f64, n: usize) -> Result<CurvatureProfile> {
    if n < 2 {
        return Err(Error::Scope("slice dimension must be at least 2".into()));
    }
    let nf = n as f64;
    let h_inv = h.recip().map_err(|_| Error::Geometry("lapse vanishes".into()))?;
    let f_inv = f.recip().map_err(|_| Error::Geometry("warp vanishes".into()))?;
    let f_r = &f.derivative() * &h_inv;
    let k_rad = -(&(&f_r.derivative() * &h_inv) * &f_inv);
    let f_inv2 = &f_inv * &f_inv;
    let k_tan = &(-(&f_r * &f_r)).add_scalar(kappa) * &f_inv2;
    let ric_rad = k_rad.scale(nf);
    let ric_tan = &k_rad + &k_tan.scale(nf - 1.0);
    let scalar = &k_rad.scale(2.0 * nf) + &k_tan.scale(nf * (nf - 1.0));
    let ric_norm2 = &(&ric_rad * &ric_rad) + &(&ric_tan * &ric_tan).scale(nf);
    // Schouten eigenvalues in total dimension n + 1.
    let r_term = scalar.scale(1.0 / (2.0 * nf));
    let p_rad = (&ric_rad - &r_term).scale(1.0 / (nf - 1.0));
    let p_tan = (&ric_tan - &r_term).scale(1.0 / (nf - 1.0));
    let w_mixed = &k_rad - &(&p_rad + &p_tan);
    let w_tan = &k_tan - &p_tan.scale(2.0);
    let weyl_norm2 = (&(&w_mixed * &w_mixed).scale(nf) + &(&w_tan * &w_tan).scale(nf * (nf - 1.0) / 2.0)).scale(4.0);
    Ok(CurvatureProfile {
        dim: n,
        lapse: h.clone(),
        warp: f.clone(),
        k_rad,
        k_tan,
        scalar,
        ric_rad,
        ric_tan,
        ric_norm2,
        weyl_norm2,
    })
}

/// Radial Laplacian `Δu = (h fⁿ)⁻¹ (fⁿ h⁻¹ u')'` (trace of the Hessian).
pub fn radial_laplacian(h: &LogSeries, f: &LogSeries, n: usize, u: &LogSeries) -> Result<LogSeries> {
    let fnp = f.powi(n as i32)?;
    let h_inv = h.recip()?;
    let flux = &(&fnp * &h_inv) * &u.derivative();
    let vol = &fnp * h;
    flux.derivative().div(&vol)
}

/// Radial divergence of `a(x) ∂_r` (unit radial field).
pub fn radial_divergence(h: &LogSeries, f: &LogSeries, n: usize, a: &LogSeries) -> Result<LogSeries> {
    let fnp = f.powi(n as i32)?;
    (&fnp * a).derivative().div(&(&fnp * h))
}

impl RadialMetric {
    pub fn new(lapse: Profile, warp: Profile, slice: SpaceForm, domain: (f64, f64), ends: [EndKind; 2]) -> Self {
        Self { lapse, warp, slice, domain, ends }
    }

    pub fn dim(&self) -> usize {
        self.slice.dim
    }

    pub fn jets(&self, x0: f64, order: usize) -> Result<(LogSeries, LogSeries)> {
        let h = self.lapse.jet(x0, order)?;
        let f = self.warp.jet(x0, order)?;
        if h.c(0) <= 0.0 {
            return Err(Error::Geometry(format!("lapse {} is not positive at x = {x0}", h.c(0))));
        }
        if f.c(0) <= 0.0 {
            return Err(Error::Geometry(format!("warp {} is not positive at x = {x0}", f.c(0))));
        }
        Ok((h, f))
    }

    pub fn curvature_at(&self, x0: f64, order: usize) -> Result<CurvatureProfile> {
        let (h, f) = self.jets(x0, order)?;
        curvature_series(&h, &f, self.slice.kappa, self.dim())
    }

    /// Volume density `h fⁿ` (times the slice volume gives `dV/dx`).
    pub fn volume_density(&self, x: f64) -> Result<f64> {
        let h = self.lapse.value(x)?;
        let f = self.warp.value(x)?;
        Ok(h * f.powi(self.dim() as i32))
    }

    /// Conformal change `e^{2w} g`: lapse and warp both gain `e^{w}`.
    pub fn conformal(&self, w: Profile) -> RadialMetric {
        let factor = |base: Profile, w: Profile| -> Profile {
            Arc::new(Product { a: base, b: Arc::new(ExpOf(w)) })
        };
        RadialMetric {
            lapse: factor(self.lapse.clone(), w.clone()),
            warp: factor(self.warp.clone(), w),
            slice: self.slice,
            domain: self.domain,
            ends: self.ends,
        }
    }

    fn side(&self, x0: f64) -> Result<f64> {
        let (a, b) = self.domain;
        let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if (x0 - a).abs() <= tol {
            Ok(-1.0)
        } else if (x0 - b).abs() <= tol {
            Ok(1.0)
        } else {
            Err(Error::Geometry(format!("x = {x0} is not an end of the domain {:?}", self.domain)))
        }
    }

    /// Boundary geometry of the slice at the domain end `x0`, with the
    /// outward unit normal `ν = ±h⁻¹ ∂_x`.
    pub fn boundary_geometry(&self, x0: f64, order: usize) -> Result<BoundaryGeometry> {
        let sign = self.side(x0)?;
        let curv = self.curvature_at(x0, order.max(3))?;
        let h = &curv.lapse;
        let f = &curv.warp;
        let n = self.dim() as f64;
        let d_nu = |s: &LogSeries| -> f64 { sign * s.derivative().c(0) / h.c(0) };
        let l_diag = d_nu(f) / f.c(0);
        Ok(BoundaryGeometry {
            x0,
            normal_sign: sign,
            l_diag,
            mean_curvature: n * l_diag,
            ric_normal: curv.ric_rad.c(0),
            k_rad: curv.k_rad.c(0),
            k_tan: curv.k_tan.c(0),
            scalar: curv.scalar.c(0),
            d_nu_scalar: d_nu(&curv.scalar),
            slice_volume: self.slice.total_volume * f.c(0).powi(self.dim() as i32),
        })
    }
}

/// Umbilic boundary slice data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryGeometry {
    pub x0: f64,
    pub normal_sign: f64,
    /// Eigenvalue of the second fundamental form `L = λ ĝ`.
    pub l_diag: f64,
    /// `H = tr L`.
    pub mean_curvature: f64,
    /// `Ric(ν, ν) = Σ_α R_{αναν}`.
    pub ric_normal: f64,
    pub k_rad: f64,
    pub k_tan: f64,
    pub scalar: f64,
    pub d_nu_scalar: f64,
    pub slice_volume: f64,
}

pub fn boundary_second_fundamental_form(m: &RadialMetric, x0: f64) -> Result<(f64, f64)> {
    let b = m.boundary_geometry(x0, 4)?;
    Ok((b.mean_curvature, b.l_diag))
}

struct Product {
    a: Profile,
    b: Profile,
}

impl RadialProfile for Product {
    fn jet(&self, x0: f64, order: usize) -> Result<LogSeries> {
        Ok(&self.a.jet(x0, order)? * &self.b.jet(x0, order)?)
    }
}

struct ExpOf(Profile);

impl RadialProfile for ExpOf {
    fn jet(&self, x0: f64, order: usize) -> Result<LogSeries> {
        self.0.jet(x0, order)?.exp()
    }
}

/// Pointwise product of two profiles.
pub fn product(a: Profile, b: Profile) -> Profile {
    Arc::new(Product { a, b })
}

/// `exp` of a profile.
pub fn exp_of(w: Profile) -> Profile {
    Arc::new(ExpOf(w))
}

/// Poincaré–Einstein metric `x⁻²(dx² + φ(x)² ĝ₀)` over a space form.
#[derive(Debug, Clone)]
pub struct PoincareModel {
    pub boundary: SpaceForm,
    pub warp: LogSeries,
    pub x_center: f64,
    pub closes: bool,
}

/// Default collar end for models that do not close up.
pub const DEFAULT_COLLAR_END: f64 = 1.0;

/// Closed-form Einstein filling: `φ = 1 - κx²/4`. For `κ > 0` the warp
/// vanishes at `x = 2/√κ`, where the metric closes smoothly.
pub fn poincare_einstein_model(boundary: SpaceForm) -> PoincareModel {
    poincare_einstein_model_with_order(boundary, boundary.dim as i32 + 6)
}

pub fn poincare_einstein_model_with_order(boundary: SpaceForm, order: i32) -> PoincareModel {
    let warp = LogSeries::from_coeffs(0, &[1.0, 0.0, -boundary.kappa / 4.0], order.max(2));
    let (x_center, closes) = if boundary.kappa > 0.0 {
        (2.0 / boundary.kappa.sqrt(), true)
    } else {
        (DEFAULT_COLLAR_END, false)
    };
    PoincareModel { boundary, warp, x_center, closes }
}

impl PoincareModel {
    pub fn dim(&self) -> usize {
        self.boundary.dim
    }

    pub fn with_collar_end(mut self, x_end: f64) -> Self {
        if !self.closes {
            self.x_center = x_end;
        }
        self
    }

    /// Replace the warp (e.g. a perturbed, non-Einstein profile).
    pub fn with_warp(mut self, warp: LogSeries) -> Self {
        self.warp = warp;
        self
    }

    pub fn require_global(&self) -> Result<()> {
        if self.closes {
            Ok(())
        } else {
            Err(Error::Scope(format!(
                "model over κ = {} is a collar; global quantities are undefined",
                self.boundary.kappa
            )))
        }
    }

    /// Lapse `1/x` and warp `φ/x` as series in `x`.
    pub fn metric_series(&self) -> (LogSeries, LogSeries) {
        let order = self.warp.order();
        (LogSeries::monomial(1.0, -1, 0, order), self.warp.shift(-1))
    }

    /// The model as a radial metric on `(0, x_center)`.
    pub fn radial_metric(&self) -> RadialMetric {
        let lapse = LogSeries::monomial(1.0, -1, 0, self.warp.order());
        let warp = self.warp.shift(-1);
        RadialMetric {
            lapse: Arc::new(lapse),
            warp: Arc::new(warp),
            slice: self.boundary,
            domain: (0.0, self.x_center),
            ends: [EndKind::Open, if self.closes { EndKind::Center } else { EndKind::Open }],
        }
    }

    /// `x^{-(n+1)} φⁿ`, the density of `dV_g / (dx · vol(ĝ₀))`.
    pub fn volume_element_series(&self) -> Result<LogSeries> {
        Ok(self.warp.powi(self.dim() as i32)?.shift(-(self.dim() as i32 + 1)))
    }

    /// `Ric_g + n g` in an orthonormal frame: the radial or tangential
    /// eigenvalue series, whichever has the larger coefficient.
    pub fn ricci_residual(&self) -> Result<LogSeries> {
        let (h, f) = self.metric_series();
        let c = curvature_series(&h, &f, self.boundary.kappa, self.dim())?;
        let n = self.dim() as f64;
        let rad = c.ric_rad.add_scalar(n);
        let tan = c.ric_tan.add_scalar(n);
        let top = rad.order().min(tan.order());
        Ok(if rad.max_abs_coeff(top) >= tan.max_abs_coeff(top) { rad } else { tan })
    }

    pub fn curvature(&self) -> Result<CurvatureProfile> {
        let (h, f) = self.metric_series();
        curvature_series(&h, &f, self.boundary.kappa, self.dim())
    }
}

/// Scalar `c` with `g⁽²⁾ = c ĝ` on a space form, from the Schouten tensor
/// `g⁽²⁾ = -(n-2)⁻¹ (Ric - R/(2(n-1)) ĝ)`.
pub fn fg_g2(boundary: &SpaceForm) -> Result<f64> {
    let n = boundary.dim as f64;
    if boundary.dim < 3 {
        return Err(Error::Scope("g⁽²⁾ is not locally determined for n = 2".into()));
    }
    let ric = boundary.ricci_eigenvalue();
    let r = boundary.scalar_curvature();
    Ok(-(ric - r / (2.0 * (n - 1.0))) / (n - 2.0))
}

/// `Tr g⁽²⁾` with respect to `ĝ`.
pub fn fg_tr_g2(boundary: &SpaceForm) -> Result<f64> {
    Ok(boundary.dim as f64 * fg_g2(boundary)?)
}

/// `Tr g⁽⁴⁾ = ¼ |g⁽²⁾|²` for four-dimensional boundaries.
pub fn fg_tr_g4(boundary: &SpaceForm) -> Result<f64> {
    if boundary.dim != 4 {
        return Err(Error::Scope(format!("Tr g⁽⁴⁾ formula needs n = 4, got {}", boundary.dim)));
    }
    let c = fg_g2(boundary)?;
    Ok(0.25 * 4.0 * c * c)
}

/// Coefficients `v⁽²ᵏ⁾`, `k = 1..=n/2`, of `√(det g_x / det ĝ) = φⁿ`.
pub fn vcoeffs(boundary: &SpaceForm, n: usize) -> Result<Vec<f64>> {
    let model = poincare_einstein_model_with_order(*boundary, 2 * n as i32 + 2);
    let phin = model.warp.powi(n as i32)?;
    Ok((1..=n / 2).map(|k| phin.c(2 * k as i32)).collect())
}

/// `(σ₂, Q₄)` of a four-dimensional space form; `ΔR = 0` there.
pub fn sigma2_q4_relation(boundary: &SpaceForm) -> Result<(f64, f64)> {
    if boundary.dim != 4 {
        return Err(Error::Scope(format!("σ₂/Q₄ relation needs n = 4, got {}", boundary.dim)));
    }
    let r = boundary.scalar_curvature();
    let sigma2 = (r * r - 3.0 * boundary.ricci_norm2()) / 6.0;
    Ok((sigma2, sigma2))
}

/// Flat ball of radius `radius` in `R^{n+1}` as `dx² + x² ĝ_{Sⁿ}`.
pub fn flat_ball(n: usize, radius: f64) -> RadialMetric {
    RadialMetric::new(
        Analytic::constant(1.0).profile(),
        Analytic::new("x", |x| Ok(x.clone())).profile(),
        SpaceForm::unit_sphere(n),
        (0.0, radius),
        [EndKind::Center, EndKind::Boundary],
    )
}

/// Round `S^{n+1}` as `dx² + sin²x ĝ_{Sⁿ}` on `(0, π)`.
pub fn round_sphere(n: usize) -> RadialMetric {
    RadialMetric::new(
        Analytic::constant(1.0).profile(),
        Analytic::new("sin x", |x| Ok(x.sin_cos()?.0)).profile(),
        SpaceForm::unit_sphere(n),
        (0.0, std::f64::consts::PI),
        [EndKind::Center, EndKind::Center],
    )
}

/// Round cylinder `dx² + ĝ_{Sⁿ}` on `[a, b]`.
pub fn round_cylinder(n: usize, a: f64, b: f64) -> RadialMetric {
    RadialMetric::new(
        Analytic::constant(1.0).profile(),
        Analytic::constant(1.0).profile(),
        SpaceForm::unit_sphere(n),
        (a, b),
        [EndKind::Boundary, EndKind::Boundary],
    )
}
