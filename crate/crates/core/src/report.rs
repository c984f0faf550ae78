//! Scenarios, the check catalog, and report emitters.

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::Comparison;
use crate::conformal::{
    bm_constant, check_boundary_conformal_law, check_conformal_covariance, gauss_bonnet_4d, gjms_polynomial,
    paneitz4_apply, Q4_LAPLACIAN_R_COEFF,
};
use crate::error::{Error, Result};
use crate::fit::log_grid;
use crate::geometry::{
    flat_ball, poincare_einstein_model, round_sphere, Analytic, PoincareModel, Profile, RadialMetric, SpaceForm,
};
use crate::scattering::{
    a_primes, a_primes_fd, anomaly_variation_check, conformal_scaling_check, q_from_scattering, scattering_derivative,
    v_via_scattering, volume_via_scattering_even, ScatteringDerivative,
};
use crate::series::LogSeries;
use crate::special::sphere_volume;
use crate::vequation::{
    check_laplacian_power, check_q_vanishing, check_scalar_expansion, check_q_integral, compactify, solve_v,
    t_curvature_check, VSolution,
};
use crate::volume::{
    default_eps_grid, epstein_volume, exact_volume_density, volume_above, volume_expansion_fit_with, volume_expansion_series, FitOptions, VolumeExpansion,
};

/// Environment variable scaling every tolerance.
pub const TOL_SCALE_ENV: &str = "RENORMVOL_TOL_SCALE";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Methods {
    pub series: bool,
    pub fit: bool,
    pub scattering: bool,
    pub bvp: bool,
}

impl Default for Methods {
    fn default() -> Self {
        Self { series: true, fit: true, scattering: true, bvp: true }
    }
}

/// `"default"` or a positive number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundaryVolume {
    Value(f64),
    Keyword(String),
}

impl Default for BoundaryVolume {
    fn default() -> Self {
        Self::Keyword("default".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub kappa: i32,
    #[serde(default)]
    pub boundary_volume: BoundaryVolume,
    #[serde(default)]
    pub euler_char: Option<i64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub methods: Methods,
    /// Relative perturbation applied to `B₀` before the closure checks.
    #[serde(default)]
    pub b0_perturbation: f64,
    /// Include the logarithmic term in the even-`n` ε-fit.
    #[serde(default = "yes")]
    pub fit_log_term: bool,
    /// Coefficient of `x⁴` added to the warp.
    #[serde(default)]
    pub warp_perturbation: f64,
}

fn yes() -> bool {
    true
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config { field: field.into(), message: message.into() }
}

impl Scenario {
    pub fn new(name: &str, n: usize, kappa: i32) -> Self {
        Self {
            name: name.into(),
            n,
            kappa,
            boundary_volume: BoundaryVolume::default(),
            euler_char: None,
            tolerances: BTreeMap::new(),
            methods: Methods::default(),
            b0_perturbation: 0.0,
            fit_log_term: true,
            warp_perturbation: 0.0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text).map_err(|e| {
            let field = e.span().map(|r| text[r].trim().to_string()).unwrap_or_else(|| "<document>".into());
            config_err(&field, e.message())
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(config_err("n", format!("must be at least 2, got {}", self.n)));
        }
        if ![-1, 0, 1].contains(&self.kappa) {
            return Err(config_err("kappa", format!("must be -1, 0 or 1, got {}", self.kappa)));
        }
        self.volume()?;
        for (k, v) in &self.tolerances {
            if !CHECKS.iter().any(|c| c.id == k) {
                return Err(config_err(&format!("tolerances.{k}"), "unknown check id"));
            }
            if !(*v >= 0.0) {
                return Err(config_err(&format!("tolerances.{k}"), format!("must be nonnegative, got {v}")));
            }
        }
        if !self.b0_perturbation.is_finite() || !self.warp_perturbation.is_finite() {
            return Err(config_err("b0_perturbation", "perturbations must be finite"));
        }
        Ok(())
    }

    /// Boundary volume, `None` for the default.
    pub fn volume(&self) -> Result<Option<f64>> {
        match &self.boundary_volume {
            BoundaryVolume::Keyword(k) if k == "default" => Ok(None),
            BoundaryVolume::Keyword(k) => Err(config_err("boundary_volume", format!("expected a number or \"default\", got {k:?}"))),
            BoundaryVolume::Value(v) if *v > 0.0 && v.is_finite() => Ok(Some(*v)),
            BoundaryVolume::Value(v) => Err(config_err("boundary_volume", format!("must be positive, got {v}"))),
        }
    }

    pub fn boundary(&self) -> Result<SpaceForm> {
        let sf = SpaceForm::new(self.n, self.kappa as f64);
        Ok(match self.volume()? {
            Some(v) => sf.with_volume(v),
            None => sf,
        })
    }

    pub fn model(&self) -> Result<PoincareModel> {
        let m = poincare_einstein_model(self.boundary()?);
        if self.warp_perturbation == 0.0 {
            return Ok(m);
        }
        let order = m.warp.order().max(4);
        let mut c: Vec<f64> = (0..=order).map(|k| m.warp.c(k)).collect();
        c[4] += self.warp_perturbation;
        Ok(m.with_warp(LogSeries::from_coeffs(0, &c, order)))
    }

    pub fn chi(&self) -> i64 {
        self.euler_char.unwrap_or(1)
    }

    fn tolerance(&self, check: &CheckDef, scale: f64) -> f64 {
        self.tolerances.get(check.id).copied().unwrap_or(check.tolerance) * scale
    }
}

/// Hyperbolic models `H³ … H⁷` and two collars.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let mut v: Vec<Scenario> = (2..=6).map(|n| Scenario::new(&format!("h{}", n + 1), n, 1)).collect();
    v.push(Scenario::new("flat_collar3", 3, 0));
    v.push(Scenario::new("hyperbolic_collar4", 4, -1));
    v
}

pub fn builtin(name: &str) -> Result<Scenario> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Usage(format!("unknown scenario {name:?}")))
}

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub check_id: String,
    #[serde(with = "nan_as_null")]
    pub lhs: f64,
    #[serde(with = "nan_as_null")]
    pub rhs: f64,
    #[serde(with = "nan_as_null")]
    pub abs_err: f64,
    #[serde(with = "nan_as_null")]
    pub rel_err: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub runtime_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl CheckResult {
    fn from_comparison(id: &str, c: Comparison, tolerance: f64, runtime_ms: u64) -> Self {
        let rel_err = c.rel_err();
        Self {
            scenario: None,
            check_id: id.into(),
            lhs: c.lhs,
            rhs: c.rhs,
            abs_err: c.abs_err(),
            rel_err,
            tolerance,
            passed: rel_err <= tolerance,
            runtime_ms,
            message: None,
        }
    }

    fn from_error(id: &str, e: &Error, tolerance: f64, runtime_ms: u64) -> Self {
        Self {
            scenario: None,
            check_id: id.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            abs_err: f64::NAN,
            rel_err: f64::NAN,
            tolerance,
            passed: false,
            runtime_ms,
            message: Some(e.to_string()),
        }
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Which scenarios a check applies to.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Applies {
    Any,
    Global,
    GlobalOdd,
    Dim(usize),
    GlobalEven,
    GlobalDims(&'static [usize]),
}

#[derive(Debug, Clone, Copy)]
pub struct CheckDef {
    pub id: &'static str,
    pub identity: &'static str,
    pub tolerance: f64,
    applies: Applies,
    needs: Option<Method>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Method {
    Series,
    Fit,
    Bvp,
    Scattering,
}

const fn def(id: &'static str, identity: &'static str, tolerance: f64, applies: Applies, needs: Option<Method>) -> CheckDef {
    CheckDef { id, identity, tolerance, applies, needs }
}

use Applies::*;

/// Every check, in report order.
pub const CHECKS: &[CheckDef] = &[
    def("einstein_residual", "Ric + n g = 0", 1e-10, Any, None),
    def("collar_volume", "Vol(ε < x < 1) = ∫ x^{-n-1} φⁿ exactly", 1e-10, Any, Some(Method::Series)),
    def("volume_fit", "V from the ε-fit = V from the series", 1e-6, Global, Some(Method::Fit)),
    def("log_coeff_fit", "L from the ε-fit = L from the series", 1e-6, GlobalEven, Some(Method::Fit)),
    def("volume_closed_form", "V = (-1)^((n+1)/2) π^((n+2)/2) χ / Γ((n+2)/2)", 1e-6, GlobalOdd, Some(Method::Series)),
    def("q_integral_volume", "(1/k_n) ∫Q_n = V", 1e-6, GlobalOdd, Some(Method::Bvp)),
    def("gjms_v_identity", "P v + Q = 0", 1e-5, GlobalOdd, Some(Method::Bvp)),
    def("q4_vanishing", "Q₄(e^{2v} g) = 0", 1e-6, Dim(3), Some(Method::Bvp)),
    def("t_curvature", "T(e^{2v} g) = 3 B₀", 1e-6, Dim(3), Some(Method::Bvp)),
    def("compactified_euler", "Gauss-Bonnet for e^{2v} g gives χ", 1e-4, Dim(3), Some(Method::Bvp)),
    def("anderson_euler", "(1/8π²)∫|W|² + (3/4π²)V = χ", 1e-6, Dim(3), Some(Method::Series)),
    def("six_dim_euler", "-(15/8π³)V = χ", 1e-4, Dim(5), Some(Method::Series)),
    def("scalar_leading_odd", "R(e^{2v} g) = -2n²(n-1)B₀ x^{n-2} + even", 1e-4, GlobalOdd, Some(Method::Bvp)),
    def("scalar_lower_odd", "odd coefficients of R below x^{n-2} vanish", 1e-6, GlobalOdd, Some(Method::Bvp)),
    def("laplacian_power_coefficient", "x-coefficient of Δ^{(n-3)/2}R = -2n·n!·B₀", 1e-4, GlobalOdd, Some(Method::Bvp)),
    def("b4_coefficient", "b₄ = ΔR coefficient of Q₄", 1e-15, Dim(3), None),
    def("paneitz_product", "P₄ = (-Δ)(-Δ - 2) on H⁴", 1e-6, Dim(3), None),
    def("conformal_covariance", "Q and P₄ transformation laws", 1e-5, Dim(3), None),
    def("covariance_trivial_factor", "w = 0 leaves Q and P₄ unchanged", 0.0, Dim(3), None),
    def("boundary_conformal_law", "e^{3w}(T + 𝓛)_w = T + 𝓛 + P_b w", 1e-6, Dim(3), None),
    def("gauss_bonnet_flat_ball", "χ(flat ball) = 1", 1e-6, Dim(3), None),
    def("gauss_bonnet_sphere", "χ(S⁴) = 2", 1e-6, Dim(3), None),
    def("scattering_volume", "-∫𝒮 = V", 1e-5, GlobalOdd, Some(Method::Scattering)),
    def("scattering_volume_even", "V = -∫𝒮 + curvature term", 1e-5, GlobalDims(&[2, 4]), Some(Method::Scattering)),
    def("curvature_term", "-(1/(32·36))∫R² = -(π²/3) vol/vol(S⁴)", 1e-8, GlobalDims(&[4]), None),
    def("a2_prime", "a₂'(n) = -¼ Tr g⁽²⁾", 1e-5, GlobalDims(&[4]), Some(Method::Scattering)),
    def("a4_prime", "a₄'(n) = (3/32)(Tr g⁽²⁾)²", 1e-5, GlobalDims(&[4]), Some(Method::Scattering)),
    def("scattering_q", "S(n)1 = c_{n/2} Q_n", 1e-6, GlobalDims(&[2, 4]), Some(Method::Scattering)),
    def("scattering_scaling", "S_w(s)1 = e^{(n-2s)w} S(s)1", 1e-4, GlobalEven, Some(Method::Scattering)),
    def("scattering_limit_scaling", "e^{nw} S_w(n)1 = S(n)1", 1e-4, GlobalEven, Some(Method::Scattering)),
    def("anomaly_variation", "d/dα ∫𝒮 = -2c_{n/2} ∫w Q_n", 1e-4, GlobalEven, Some(Method::Scattering)),
    def("v_scattering_match", "v = -d/ds 𝒫(s)1 at s = n", 1e-5, GlobalEven, Some(Method::Bvp)),
];

pub fn check_def(id: &str) -> Option<&'static CheckDef> {
    CHECKS.iter().find(|c| c.id == id)
}

impl CheckDef {
    fn applies_to(&self, s: &Scenario) -> bool {
        let global = s.kappa == 1;
        let base = match self.applies {
            Any => true,
            Global => global,
            GlobalOdd => global && s.n % 2 == 1,
            GlobalEven => global && s.n % 2 == 0,
            Dim(d) => global && s.n == d,
            GlobalDims(ds) => global && ds.contains(&s.n),
        };
        let special = match self.id {
            "collar_volume" => s.kappa != 1,
            "volume_closed_form" | "compactified_euler" | "anderson_euler" | "six_dim_euler" => s.volume().ok().flatten().is_none(),
            _ => true,
        };
        let method = match self.needs {
            None => true,
            Some(Method::Series) => s.methods.series,
            Some(Method::Fit) => s.methods.series && s.methods.fit,
            Some(Method::Bvp) => s.methods.bvp,
            Some(Method::Scattering) => s.methods.scattering,
        };
        base && special && method
    }
}

/// Shared, lazily computed quantities of one scenario.
struct Context<'a> {
    scenario: &'a Scenario,
    model: PoincareModel,
    series: OnceCell<Result<VolumeExpansion>>,
    vsol: OnceCell<Result<VSolution>>,
    compact: OnceCell<Result<RadialMetric>>,
    sderiv: OnceCell<Result<ScatteringDerivative>>,
}

fn cached<'c, T: Clone>(cell: &'c OnceCell<Result<T>>, f: impl FnOnce() -> Result<T>) -> Result<&'c T> {
    cell.get_or_init(f).as_ref().map_err(Clone::clone)
}

impl<'a> Context<'a> {
    fn series(&self) -> Result<&VolumeExpansion> {
        cached(&self.series, || volume_expansion_series(&self.model))
    }

    fn vsol(&self) -> Result<&VSolution> {
        cached(&self.vsol, || solve_v(&self.model))
    }

    fn b0(&self) -> Result<f64> {
        Ok(self.vsol()?.b0 * (1.0 + self.scenario.b0_perturbation))
    }

    fn compact(&self) -> Result<&RadialMetric> {
        cached(&self.compact, || compactify(self.vsol()?))
    }

    fn sderiv(&self) -> Result<&ScatteringDerivative> {
        cached(&self.sderiv, || scattering_derivative(&self.model))
    }

    fn vol(&self) -> f64 {
        self.model.boundary.total_volume
    }

    fn run(&self, id: &str) -> Result<Comparison> {
        let n = self.scenario.n;
        let chi = self.scenario.chi() as f64;
        match id {
            "einstein_residual" => {
                let r = self.model.ricci_residual()?;
                Ok(Comparison::new(r.max_abs_coeff(r.order()), 0.0))
            }
            "collar_volume" => {
                let eps = 0.1;
                let big_f = exact_volume_density(&self.model)?.antiderivative();
                let exact = self.vol() * (big_f.eval(self.model.x_center)? - big_f.eval(eps)?);
                Ok(Comparison::new(volume_above(&self.model, eps)?, exact))
            }
            "volume_fit" | "log_coeff_fit" => {
                let opts = FitOptions { log_term: self.scenario.fit_log_term, ..FitOptions::default() };
                let fit = volume_expansion_fit_with(&self.model, &default_eps_grid(&self.model), opts)?;
                let series = self.series()?;
                Ok(if id == "volume_fit" {
                    Comparison::new(fit.v, series.v)
                } else {
                    Comparison::new(fit.log_coeff.unwrap_or(0.0), series.log_coeff.unwrap_or(0.0))
                })
            }
            "volume_closed_form" => Ok(Comparison::new(self.series()?.v, epstein_volume(n, self.scenario.chi())?.0)),
            "q_integral_volume" => check_q_integral(self.vsol()?, self.b0()?, self.series()?),
            "gjms_v_identity" => {
                let grid = log_grid(0.05, 0.9 * self.model.x_center, 10);
                Ok(Comparison::new(self.vsol()?.gjms_residual(&grid)?, 0.0))
            }
            "q4_vanishing" => {
                let grid = log_grid(0.05, 0.9 * self.model.x_center, 10);
                Ok(Comparison::new(check_q_vanishing(self.compact()?, &grid)?, 0.0))
            }
            "t_curvature" => {
                let t = t_curvature_check(self.compact()?, self.b0()?)?;
                Ok(Comparison::new(t.from_scalar, t.expected))
            }
            "compactified_euler" => Ok(Comparison::new(gauss_bonnet_4d(self.compact()?)?.chi, chi)),
            "anderson_euler" => {
                let w = self.model.curvature()?.weyl_norm2;
                if w.max_abs_coeff(w.order()) > 1e-10 {
                    return Err(Error::Scope("the Weyl integral is only implemented for conformally flat models".into()));
                }
                Ok(Comparison::new(crate::volume::anderson_check(0.0, self.series()?.v), chi))
            }
            "six_dim_euler" => Ok(Comparison::new(crate::volume::gb6_check(&self.model, self.series()?.v)?, chi)),
            "scalar_leading_odd" => Ok(check_scalar_expansion(self.compact()?, self.b0()?)?.leading),
            "scalar_lower_odd" => {
                let se = check_scalar_expansion(self.compact()?, self.b0()?)?;
                Ok(Comparison::new(se.lower_odd, 0.0))
            }
            "laplacian_power_coefficient" => check_laplacian_power(self.compact()?, self.b0()?),
            "b4_coefficient" => Ok(Comparison::new(bm_constant(4)?, Q4_LAPLACIAN_R_COEFF)),
            "paneitz_product" => {
                let m = self.model.radial_metric();
                let p = gjms_polynomial(3)?;
                let mut worst = Comparison::new(0.0, 0.0);
                for u in test_basket() {
                    for x in [0.2, 0.7, 1.3, 1.8] {
                        let c = Comparison::new(paneitz4_apply(&m, &u, x)?, p.apply(&m, &u, x)?);
                        if !(c.rel_err() <= worst.rel_err()) {
                            worst = c;
                        }
                    }
                }
                Ok(worst)
            }
            "conformal_covariance" => {
                let m = self.model.radial_metric();
                let grid = [0.25, 0.8, 1.5];
                let mut worst: f64 = 0.0;
                for w in conformal_factors() {
                    worst = worst.max(check_conformal_covariance(&m, &w, &test_basket(), &grid)?);
                }
                Ok(Comparison::new(worst, 0.0))
            }
            "covariance_trivial_factor" => {
                let m = self.model.radial_metric();
                let zero = Analytic::constant(0.0).profile();
                Ok(Comparison::new(check_conformal_covariance(&m, &zero, &test_basket(), &[0.25, 0.8, 1.5])?, 0.0))
            }
            "boundary_conformal_law" => {
                let ball = flat_ball(3, 1.0);
                let mut worst = Comparison::new(0.0, 0.0);
                for w in conformal_factors() {
                    let (lhs, rhs) = check_boundary_conformal_law(&ball, &w, 1.0)?;
                    let c = Comparison::new(lhs, rhs);
                    if !(c.rel_err() <= worst.rel_err()) {
                        worst = c;
                    }
                }
                Ok(worst)
            }
            "gauss_bonnet_flat_ball" => Ok(Comparison::new(gauss_bonnet_4d(&flat_ball(3, 1.0))?.chi, 1.0)),
            "gauss_bonnet_sphere" => Ok(Comparison::new(gauss_bonnet_4d(&round_sphere(3))?.chi, 2.0)),
            "scattering_volume" => Ok(Comparison::new(-self.sderiv()?.value * self.vol(), self.series()?.v)),
            "scattering_volume_even" => {
                let r = volume_via_scattering_even(&self.model)?;
                Ok(Comparison::new(r.v_scatter, self.series()?.v))
            }
            "curvature_term" => {
                let r = self.model.boundary.scalar_curvature();
                let lhs = -r * r * self.vol() / (32.0 * 36.0);
                Ok(Comparison::new(lhs, -PI * PI / 3.0 * self.vol() / sphere_volume(4)))
            }
            "a2_prime" | "a4_prime" => {
                let fd = a_primes_fd(&self.model)?;
                let (a2, a4) = a_primes(&self.model.boundary, n)?;
                Ok(if id == "a2_prime" { Comparison::new(fd[0], a2) } else { Comparison::new(fd[1], a4) })
            }
            "scattering_q" => {
                let kappa = self.model.boundary.kappa;
                let q = if n == 2 { kappa } else { 6.0 * kappa * kappa };
                Ok(Comparison::new(q_from_scattering(&self.model)?, q))
            }
            "scattering_scaling" => Ok(conformal_scaling_check(&self.model, 0.3, n as f64 - 0.4)?.0),
            "scattering_limit_scaling" => Ok(conformal_scaling_check(&self.model, 0.3, n as f64 - 0.4)?.1),
            "anomaly_variation" => anomaly_variation_check(&self.model, 1.0),
            "v_scattering_match" => {
                let xs = log_grid(0.05, 0.75 * self.model.x_center, 8);
                let sv = v_via_scattering(&self.model, &xs)?;
                let sol = self.vsol()?;
                let mut worst: f64 = 0.0;
                for (x, v) in xs.iter().zip(&sv.values) {
                    worst = worst.max((v - sol.v(*x)?).abs());
                }
                Ok(Comparison::new(worst, 0.0))
            }
            other => Err(Error::Usage(format!("unknown check {other:?}"))),
        }
    }
}

/// Test functions for operator identities.
pub fn test_basket() -> Vec<Profile> {
    vec![
        Analytic::new("x²", |x| Ok(x * x)).profile(),
        Analytic::new("cos x", |x| Ok(x.sin_cos()?.1)).profile(),
        Analytic::new("e^{-x}", |x| (-x).exp()).profile(),
    ]
}

/// Radial conformal factors.
pub fn conformal_factors() -> Vec<Profile> {
    vec![
        Analytic::constant(0.35).profile(),
        Analytic::new("x²e^{-x}", |x| Ok(&(x * x) * &(-x).exp()?)).profile(),
        Analytic::new("0.3 sin x", |x| Ok(x.sin_cos()?.0.scale(0.3))).profile(),
        Analytic::new("0.2 x³", |x| Ok(x.powi(3)?.scale(0.2))).profile(),
        Analytic::new("0.5/(1+x²)", |x| Ok((x * x).add_scalar(1.0).recip()?.scale(0.5))).profile(),
        Analytic::new("0.1 x", |x| Ok(x.scale(0.1))).profile(),
    ]
}

fn tol_scale() -> Result<f64> {
    match std::env::var(TOL_SCALE_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|s| *s > 0.0 && s.is_finite())
            .ok_or_else(|| config_err(TOL_SCALE_ENV, format!("expected a positive number, got {v:?}"))),
        Err(_) => Ok(1.0),
    }
}

/// Run every applicable check; solver failures become failed results.
pub fn run_scenario(s: &Scenario) -> Result<Vec<CheckResult>> {
    s.validate()?;
    let scale = tol_scale()?;
    let ctx = Context {
        scenario: s,
        model: s.model()?,
        series: OnceCell::new(),
        vsol: OnceCell::new(),
        compact: OnceCell::new(),
        sderiv: OnceCell::new(),
    };
    Ok(CHECKS
        .iter()
        .filter(|c| c.applies_to(s))
        .map(|c| {
            let tol = s.tolerance(c, scale);
            let start = Instant::now();
            let out = ctx.run(c.id);
            let ms = start.elapsed().as_millis() as u64;
            let mut r = match out {
                Ok(cmp) => CheckResult::from_comparison(c.id, cmp, tol, ms),
                Err(e) => CheckResult::from_error(c.id, &e, tol, ms),
            };
            r.scenario = Some(s.name.clone());
            r
        })
        .collect())
}

/// Run scenarios concurrently; output order follows the input.
pub fn run_scenarios(ss: &[Scenario]) -> Result<Vec<(String, Vec<CheckResult>)>> {
    ss.par_iter().map(|s| Ok((s.name.clone(), run_scenario(s)?))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err(Error::Usage(format!("unknown format {s:?}"))),
        }
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        "NaN".into()
    }
}

pub fn emit_report(results: &[CheckResult], format: Format) -> Result<String> {
    if results.is_empty() {
        return Err(Error::Usage("no results to report".into()));
    }
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(results).map_err(|e| Error::Usage(e.to_string()))? + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Usage(e.to_string());
            w.write_record(["scenario", "check_id", "lhs", "rhs", "abs_err", "rel_err", "tolerance", "passed", "runtime_ms"]).map_err(io)?;
            for r in results {
                w.write_record([
                    r.scenario.clone().unwrap_or_default(),
                    r.check_id.clone(),
                    num(r.lhs),
                    num(r.rhs),
                    num(r.abs_err),
                    num(r.rel_err),
                    num(r.tolerance),
                    r.passed.to_string(),
                    r.runtime_ms.to_string(),
                ])
                .map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Usage(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Usage(e.to_string()))?
        }
        Format::Markdown => {
            let mut out = String::from(
                "| scenario | check_id | identity | lhs | rhs | rel_err | tolerance | passed | runtime_ms |\n|---|---|---|---|---|---|---|---|---|\n",
            );
            for r in results {
                let identity = check_def(&r.check_id).map_or("", |c| c.identity);
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                    r.scenario.as_deref().unwrap_or(""),
                    r.check_id,
                    identity.replace('|', "\\|"),
                    num(r.lhs),
                    num(r.rhs),
                    num(r.rel_err),
                    num(r.tolerance),
                    if r.passed { "yes" } else { "**no**" },
                    r.runtime_ms
                );
            }
            out
        }
    })
}

pub fn parse_results(json: &str) -> Result<Vec<CheckResult>> {
    serde_json::from_str(json).map_err(|e| config_err("results", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<CheckResult> {
        vec![
            CheckResult::from_comparison("volume_fit", Comparison::new(1.0 + 1e-9, 1.0), 1e-6, 3),
            CheckResult::from_comparison("q_integral_volume", Comparison::new(13.159472534785811, 13.15947253478581), 1e-6, 40),
            CheckResult::from_error("scattering_volume", &Error::Solver("x".into()), 1e-5, 1),
        ]
    }

    #[test]
    fn json_roundtrip_and_formats() {
        let r = &sample()[..2];
        let j = emit_report(r, Format::Json).unwrap();
        assert_eq!(parse_results(&j).unwrap(), r);
        let all = sample();
        let csv = emit_report(&all, Format::Csv).unwrap();
        assert_eq!(csv.lines().count(), all.len() + 1);
        let md = emit_report(&all, Format::Markdown).unwrap();
        assert!(md.starts_with("| scenario | check_id | identity |"));
        assert!(md.contains("(1/k_n) ∫Q_n = V"));
        assert!(emit_report(&[], Format::Csv).is_err());
        assert!("yaml".parse::<Format>().is_err());
        let failed = parse_results(&emit_report(&all, Format::Json).unwrap()).unwrap();
        assert!(failed[2].lhs.is_nan() && !failed[2].passed);
    }

    #[test]
    fn config_parsing() {
        let s = Scenario::from_toml("name = \"a\"\nn = 3\nkappa = 1\n[tolerances]\nvolume_fit = 1e-8\n").unwrap();
        assert_eq!(s.methods, Methods::default());
        assert!(s.fit_log_term);
        assert_eq!(s.volume().unwrap(), None);
        let s = Scenario::from_toml("name = \"a\"\nn = 3\nkappa = 1\nboundary_volume = 2.5\n").unwrap();
        assert_eq!(s.volume().unwrap(), Some(2.5));
        let field = |t: &str| match Scenario::from_toml(t) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field("name = \"a\"\nn = 1\nkappa = 1\n"), "n");
        assert_eq!(field("name = \"a\"\nn = 3\nkappa = 2\n"), "kappa");
        assert_eq!(field("name = \"a\"\nn = 3\nkappa = 1\nboundary_volume = -1.0\n"), "boundary_volume");
        assert_eq!(field("name = \"a\"\nn = 3\nkappa = 1\n[tolerances]\nbogus = 1.0\n"), "tolerances.bogus");
        assert!(matches!(Scenario::from_toml("name = \"a\"\nn = 3\nkappa = 1\ncolour = 1\n"), Err(Error::Config { .. })));
    }

    #[test]
    fn catalog_is_consistent() {
        let mut ids: Vec<&str> = CHECKS.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), CHECKS.len());
        assert!(builtin("h4").is_ok() && builtin("h9").is_err());
    }

    #[test]
    fn collar_scenarios() {
        let r = run_scenario(&builtin("flat_collar3").unwrap()).unwrap();
        let ids: Vec<&str> = r.iter().map(|c| c.check_id.as_str()).collect();
        assert_eq!(ids, ["einstein_residual", "collar_volume"]);
        assert!(r.iter().all(|c| c.passed), "{r:?}");
        let r = run_scenario(&builtin("hyperbolic_collar4").unwrap()).unwrap();
        assert!(r.iter().all(|c| c.passed), "{r:?}");
    }

    #[test]
    fn unreachable_tolerance_fails_every_inexact_check() {
        let mut s = builtin("h3").unwrap();
        for c in CHECKS {
            s.tolerances.insert(c.id.into(), 1e-30);
        }
        let r = run_scenario(&s).unwrap();
        assert!(!r.is_empty());
        assert!(r.iter().filter(|c| c.abs_err > 0.0).count() >= 8);
        assert!(r.iter().all(|c| !c.passed || c.abs_err == 0.0), "{r:?}");
    }
}
