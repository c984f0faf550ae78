//! Radial reductions of `(-Δ_g - λ) u = -σ` on the models
//! `g = x⁻²(dx² + φ(x)² ĝ₀)`.
//!
//! In `t = log x` the Laplacian of a radial function is
//! `Δu = u_tt - n c(t) u_t` with `c = 1 - xφ'/φ`, so every problem here is
//!
//! ```text
//! u_tt - n c(t) u_t + λ u = σ
//! ```
//!
//! Three local solvers cover `(0, x_center)`:
//!
//! * [`center_series`]: the regular solution as a power series in
//!   `τ = t_center - t`, where `φ` has a simple zero;
//! * [`solve_from_center`]: a Taylor-series integrator in `t` with dense
//!   output, started from the center series;
//! * [`boundary_frobenius`]: Frobenius/log expansions at `x = 0`.

use crate::error::{Error, Result};
use crate::series::LogSeries;

/// Resonance threshold for the indicial polynomial.
const RESONANCE_EPS: f64 = 1e-10;

/// Exact polynomial coefficients of a warp given as a series.
pub fn warp_polynomial(warp: &LogSeries) -> Result<Vec<f64>> {
    if warp.min_degree() < 0 || warp.log_depth() > 0 {
        return Err(Error::Domain("warp must be a polynomial in x".into()));
    }
    let mut p = warp.power_coeffs();
    while p.len() > 1 && p[p.len() - 1] == 0.0 {
        p.pop();
    }
    Ok(p)
}

fn poly_series(poly: &[f64], order: i32) -> LogSeries {
    let mut c = poly.to_vec();
    c.truncate((order.max(0) + 1) as usize);
    LogSeries::from_coeffs(0, &c, order)
}

/// `e = xφ'/φ` as a power series at `x = 0`.
pub fn log_derivative_series(phi: &[f64], order: i32) -> Result<LogSeries> {
    let p = poly_series(phi, order);
    p.derivative().shift(1).truncate(order).div(&p)
}

/// `Φ(τ) = φ(x0 e^{±τ})` as a Taylor series in `τ`.
fn warp_in_log_coordinate(phi: &[f64], x0: f64, sign: f64, order: usize) -> Result<LogSeries> {
    let jet = poly_series(phi, phi.len() as i32).rebase(x0, order)?;
    let mut inner = vec![0.0; order + 1];
    let mut fact = 1.0;
    for (k, c) in inner.iter_mut().enumerate().skip(1) {
        fact *= k as f64;
        *c = x0 * sign.powi(k as i32) / fact;
    }
    jet.compose(&LogSeries::from_coeffs(0, &inner, order as i32))
}

/// Indicial roots `n/2 ± √(n²/4 - λ)` at `x = 0`.
pub fn indicial_roots(n: usize, lambda: f64) -> Result<(f64, f64)> {
    let half = n as f64 / 2.0;
    let disc = half * half - lambda;
    if disc < 0.0 {
        return Err(Error::Domain(format!("complex indicial roots for λ = {lambda}")));
    }
    Ok((half + disc.sqrt(), half - disc.sqrt()))
}

/// `u = x^α Σ_K x^K p_K(log x)`.
#[derive(Debug, Clone)]
pub struct FrobeniusSeries {
    pub alpha: f64,
    pub series: LogSeries,
    /// Degrees `K` where the indicial polynomial vanished.
    pub resonances: Vec<i32>,
}

impl FrobeniusSeries {
    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(x.powf(self.alpha) * self.series.eval(x)?)
    }

    /// Taylor jet in `ξ = x - x0`.
    pub fn x_jet(&self, x0: f64, order: usize) -> Result<LogSeries> {
        let s = self.series.rebase(x0, order)?;
        if self.alpha == 0.0 {
            return Ok(s);
        }
        let xa = LogSeries::identity_jet(x0, order).pow(self.alpha)?;
        Ok(&s * &xa)
    }
}

/// Inputs of [`boundary_frobenius`].
#[derive(Debug, Clone)]
pub struct FrobeniusProblem<'a> {
    pub n: usize,
    pub lambda: f64,
    pub alpha: f64,
    /// `xφ'/φ` at `x = 0`.
    pub e: &'a LogSeries,
    /// Coefficients of `σ` against `x^{α+K} (log x)^j`.
    pub source: Option<&'a LogSeries>,
    /// Values of the free constant term at resonant degrees.
    pub free: &'a [(i32, f64)],
    pub order: i32,
}

fn poly_derivative(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c).collect()
}

fn poly_integral(p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend(p.iter().enumerate().map(|(j, c)| c / (j + 1) as f64));
    out
}

fn poly_axpy(acc: &mut Vec<f64>, a: f64, p: &[f64]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (x, y) in acc.iter_mut().zip(p) {
        *x += a * y;
    }
}

/// Solve `(a + ∂) q = r` on polynomials, `a ≠ 0`.
fn solve_first_order(a: f64, r: &[f64]) -> Vec<f64> {
    let mut q = Vec::new();
    let mut term = r.to_vec();
    let mut coef = 1.0 / a;
    while term.iter().any(|&c| c != 0.0) {
        poly_axpy(&mut q, coef, &term);
        term = poly_derivative(&term);
        coef *= -1.0 / a;
    }
    if q.is_empty() {
        q.push(0.0);
    }
    q
}

/// Recursive solution of the radial equation at `x = 0` by the ansatz
/// `x^α Σ x^K p_K(t)`, with
/// `[(β+∂)(β-n+∂) + λ] p_K + n Σ_m e_m (β-m+∂) p_{K-m} = σ_K`, `β = α + K`.
pub fn boundary_frobenius(pb: &FrobeniusProblem<'_>) -> Result<FrobeniusSeries> {
    let n = pb.n as f64;
    let a00 = pb.alpha * (pb.alpha - n) + pb.lambda;
    if a00.abs() > 1e-8 * (1.0 + pb.lambda.abs()) && pb.source.is_none() {
        return Err(Error::Domain(format!("α = {} is not an indicial root", pb.alpha)));
    }
    if pb.order > pb.e.order() {
        return Err(Error::Domain(format!("xφ'/φ known only through order {}", pb.e.order())));
    }
    let mut p: Vec<Vec<f64>> = Vec::with_capacity(pb.order as usize + 1);
    let mut resonances = Vec::new();
    for k in 0..=pb.order {
        let beta = pb.alpha + k as f64;
        let mut r = vec![0.0];
        if let Some(src) = pb.source {
            if k <= src.order() {
                let row: Vec<f64> = (0..=src.log_depth()).map(|j| src.coeff(k, j)).collect();
                poly_axpy(&mut r, 1.0, &row);
            }
        }
        for m in 1..=k {
            let em = pb.e.c(m);
            if em == 0.0 {
                continue;
            }
            let prev = &p[(k - m) as usize];
            poly_axpy(&mut r, -n * em * (beta - m as f64), prev);
            poly_axpy(&mut r, -n * em, &poly_derivative(prev));
        }
        let a0 = beta * (beta - n) + pb.lambda;
        let a1 = 2.0 * beta - n;
        let free = pb.free.iter().find(|(kk, _)| *kk == k).map(|&(_, v)| v);
        let pk = if a0.abs() <= RESONANCE_EPS {
            resonances.push(k);
            // (a1 + ∂) ∂ p = r
            let q = if a1.abs() <= RESONANCE_EPS { poly_integral(&r) } else { solve_first_order(a1, &r) };
            let mut pk = poly_integral(&q);
            pk[0] = free.unwrap_or(0.0);
            pk
        } else {
            if free.is_some() {
                return Err(Error::Domain(format!("degree {k} is not resonant; its coefficient is determined")));
            }
            // Neumann series for (a0 + a1 ∂ + ∂²)⁻¹
            let mut pk = Vec::new();
            let mut term = r.clone();
            let mut coef = 1.0 / a0;
            let mut guard = 0;
            while term.iter().any(|&c| c != 0.0) {
                poly_axpy(&mut pk, coef, &term);
                let d1 = poly_derivative(&term);
                let d2 = poly_derivative(&d1);
                let mut next = Vec::new();
                poly_axpy(&mut next, a1, &d1);
                poly_axpy(&mut next, 1.0, &d2);
                term = next;
                coef *= -1.0 / a0;
                guard += 1;
                if guard > 64 {
                    return Err(Error::Solver("log polynomial recursion did not terminate".into()));
                }
            }
            if pk.is_empty() {
                pk.push(0.0);
            }
            pk
        };
        p.push(pk);
    }
    let depth = p.iter().map(|q| q.len().saturating_sub(1)).max().unwrap_or(0);
    let mut rows = p;
    for q in rows.iter_mut() {
        while q.len() > 1 && q[q.len() - 1] == 0.0 {
            q.pop();
        }
    }
    let depth = depth.min(rows.iter().map(|q| q.len() - 1).max().unwrap_or(0));
    Ok(FrobeniusSeries { alpha: pb.alpha, series: LogSeries::new(0, pb.order, depth, rows), resonances })
}

/// Radial problem `u_tt - n c u_t + λu = σ` on a model with warp `φ`.
#[derive(Debug, Clone)]
pub struct RadialOde {
    pub n: usize,
    pub lambda: f64,
    pub sigma: f64,
    pub phi: Vec<f64>,
    pub x_center: f64,
}

/// Regular solution at the center, `u = Σ u_k τᵏ` with `u_0 = u0`,
/// `τ = log(x_center / x)`.
pub fn center_series(ode: &RadialOde, u0: f64, order: usize) -> Result<Vec<f64>> {
    let big = order + 2;
    let phit = warp_in_log_coordinate(&ode.phi, ode.x_center, -1.0, big)?;
    let scale = ode.phi.iter().map(|c| c.abs()).fold(0.0, f64::max);
    if phit.c(0).abs() > 1e-12 * scale {
        return Err(Error::Geometry(format!(
            "warp does not vanish at x = {} (φ = {})",
            ode.x_center,
            phit.c(0)
        )));
    }
    // Φ(τ) = τ Ψ(τ)
    let coeffs = phit.power_coeffs();
    let psi = LogSeries::from_coeffs(0, &coeffs[1..], big as i32 - 1);
    if psi.c(0) == 0.0 {
        return Err(Error::Geometry("warp has a multiple zero at the center".into()));
    }
    let tau = LogSeries::monomial(1.0, 1, 0, big as i32 - 1);
    let d = (&tau * &psi.derivative().div(&psi)?).add_scalar(1.0) + tau;
    let n = ode.n as f64;
    let mut u = vec![0.0; order + 1];
    u[0] = u0;
    for k in 2..=order {
        let mut num = -ode.lambda * u[k - 2];
        if k == 2 {
            num += ode.sigma;
        }
        for j in 1..k {
            num -= n * d.c(j as i32) * (k - j) as f64 * u[k - j];
        }
        u[k] = num / ((k * (k - 1)) as f64 + n * k as f64);
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Taylor order per step.
    pub order: usize,
    /// Step in `t = log x`.
    pub step: f64,
    /// Order of the center series.
    pub center_order: usize,
    /// Hand-off from the center series at `τ = tau_start`.
    pub tau_start: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { order: 24, step: 0.1, center_order: 56, tau_start: 1.0 }
    }
}

#[derive(Debug, Clone)]
struct Node {
    t: f64,
    coeffs: Vec<f64>,
}

/// Dense solution on `[x_min, x_center)`.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub ode: RadialOde,
    pub options: IntegratorOptions,
    t_center: f64,
    center: Vec<f64>,
    nodes: Vec<Node>,
    t_end: f64,
}

fn eval_poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn eval_poly_derivative(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, a)| acc * x + k as f64 * a)
}

/// Taylor coefficients of `c(t0 + τ)` where `c = 1 - xφ'/φ`.
fn c_jet(phi: &[f64], t0: f64, order: usize) -> Result<LogSeries> {
    let big = warp_in_log_coordinate(phi, t0.exp(), 1.0, order + 1)?;
    Ok(-(big.derivative().div(&big)?).add_scalar(-1.0))
}

fn taylor_coeffs(ode: &RadialOde, t0: f64, u: f64, du: f64, order: usize) -> Result<Vec<f64>> {
    let c = c_jet(&ode.phi, t0, order)?;
    let n = ode.n as f64;
    let mut a = vec![0.0; order + 1];
    a[0] = u;
    a[1] = du;
    for k in 0..order - 1 {
        let mut num = -ode.lambda * a[k];
        if k == 0 {
            num += ode.sigma;
        }
        for j in 0..=k {
            num += n * c.c(j as i32) * (k - j + 1) as f64 * a[k - j + 1];
        }
        a[k + 2] = num / ((k + 1) * (k + 2)) as f64;
    }
    Ok(a)
}

/// Integrate the regular solution with center value `u0` down to `x_min`.
pub fn solve_from_center(ode: &RadialOde, u0: f64, x_min: f64, opts: IntegratorOptions) -> Result<RadialSolution> {
    if !(x_min > 0.0 && x_min < ode.x_center) {
        return Err(Error::Domain(format!("x_min = {x_min} outside (0, {})", ode.x_center)));
    }
    if opts.order < 4 || opts.step <= 0.0 {
        return Err(Error::Domain("integrator needs order ≥ 4 and a positive step".into()));
    }
    let center = center_series(ode, u0, opts.center_order)?;
    let t_center = ode.x_center.ln();
    let t_end = x_min.ln();
    let mut t = t_center - opts.tau_start;
    let mut u = eval_poly(&center, opts.tau_start);
    let mut du = -eval_poly_derivative(&center, opts.tau_start);
    let mut nodes = Vec::new();
    while t > t_end {
        let coeffs = taylor_coeffs(ode, t, u, du, opts.order)?;
        let h = opts.step.min(t - t_end);
        u = eval_poly(&coeffs, -h);
        du = eval_poly_derivative(&coeffs, -h);
        if !u.is_finite() || !du.is_finite() {
            return Err(Error::Solver(format!("solution blew up near t = {t}")));
        }
        nodes.push(Node { t, coeffs });
        t -= h;
        if (t - t_end).abs() < 1e-14 {
            t = t_end;
        }
    }
    nodes.push(Node { t: t_end, coeffs: taylor_coeffs(ode, t_end, u, du, opts.order)? });
    Ok(RadialSolution { ode: ode.clone(), options: opts, t_center, center, nodes, t_end })
}

/// Solve at steps `h` and `h/2`; returns the fine solution and the largest
/// discrepancy between the two on `probe`.
pub fn solve_two_resolutions(
    ode: &RadialOde,
    u0: f64,
    x_min: f64,
    opts: IntegratorOptions,
    probe: &[f64],
) -> Result<(RadialSolution, f64)> {
    let coarse = solve_from_center(ode, u0, x_min, opts)?;
    let fine = solve_from_center(ode, u0, x_min, IntegratorOptions { step: opts.step / 2.0, ..opts })?;
    let mut diff: f64 = 0.0;
    for &x in probe {
        diff = diff.max((coarse.value(x)? - fine.value(x)?).abs());
    }
    Ok((fine, diff))
}

impl RadialSolution {
    pub fn x_min(&self) -> f64 {
        self.t_end.exp()
    }

    pub fn x_center(&self) -> f64 {
        self.ode.x_center
    }

    /// Taylor coefficients in `δ = t' - t` at `t`.
    pub fn t_jet(&self, t: f64, order: usize) -> Result<Vec<f64>> {
        let tau = self.t_center - t;
        if tau < 0.0 {
            return Err(Error::Domain(format!("x = {} beyond the center", t.exp())));
        }
        if tau <= self.options.tau_start {
            let s = LogSeries::from_coeffs(0, &self.center, self.center.len() as i32 - 1).shift_origin(tau, order)?;
            return Ok((0..=order).map(|k| if k % 2 == 0 { s.c(k as i32) } else { -s.c(k as i32) }).collect());
        }
        let node = self.node_for(t)?;
        let s = LogSeries::from_coeffs(0, &node.coeffs, node.coeffs.len() as i32 - 1).shift_origin(t - node.t, order)?;
        Ok((0..=order).map(|k| s.c(k as i32)).collect())
    }

    fn node_for(&self, t: f64) -> Result<&Node> {
        if t < self.t_end - 1e-12 {
            return Err(Error::Domain(format!("x = {} below the integration range", t.exp())));
        }
        // nodes are in decreasing t
        let i = self.nodes.partition_point(|nd| nd.t > t);
        let i = if i < self.nodes.len() && (self.nodes[i].t - t).abs() < 1e-14 {
            i
        } else {
            i.saturating_sub(1)
        };
        Ok(&self.nodes[i])
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("x = {x}")));
        }
        let t = x.ln();
        let tau = self.t_center - t;
        if (0.0..=self.options.tau_start).contains(&tau) {
            return Ok(eval_poly(&self.center, tau));
        }
        if tau < 0.0 {
            return Err(Error::Domain(format!("x = {x} beyond the center")));
        }
        let node = self.node_for(t)?;
        Ok(eval_poly(&node.coeffs, t - node.t))
    }

    /// `x du/dx`.
    pub fn t_derivative(&self, x: f64) -> Result<f64> {
        Ok(self.t_jet(x.ln(), 1)?[1])
    }

    /// Taylor jet in `ξ = x - x0`.
    pub fn x_jet(&self, x0: f64, order: usize) -> Result<LogSeries> {
        let tj = self.t_jet(x0.ln(), order)?;
        let tjet = LogSeries::from_coeffs(0, &tj, order as i32);
        if order == 0 {
            return Ok(tjet);
        }
        let mut inner = vec![0.0; order + 1];
        for (k, c) in inner.iter_mut().enumerate().skip(1) {
            *c = if k % 2 == 1 { 1.0 } else { -1.0 } / (k as f64 * x0.powi(k as i32));
        }
        tjet.compose(&LogSeries::from_coeffs(0, &inner, order as i32))
    }
}
