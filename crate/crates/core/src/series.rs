//! Truncated log-power series `Σ a[k][j] x^k (log x)^j`.
//!
//! A [`LogSeries`] knows its coefficients for degrees `min_degree ..= order`
//! and log powers `0 ..= log_depth`. Everything above `order` is unknown
//! (an implicit `O(x^{order+1})`), and every operation propagates the
//! smallest valid order of its inputs instead of inventing coefficients.
//!
//! The same type doubles as a local Taylor jet: a jet of `f` at `x0` is the
//! series of `ξ ↦ f(x0 + ξ)`, built by feeding [`LogSeries::identity_jet`]
//! through the arithmetic below.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LogSeries {
    min_degree: i32,
    order: i32,
    log_depth: usize,
    /// Row-major: `coeffs[(k - min_degree) * (log_depth + 1) + j]`.
    coeffs: Vec<f64>,
    radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl LogSeries {
    /// Build from rows `rows[k - min_degree][j]`. Rows past `order` are
    /// rejected; missing rows/columns are zero.
    pub fn new(min_degree: i32, order: i32, log_depth: usize, rows: Vec<Vec<f64>>) -> Self {
        let mut s = Self::zeros(min_degree, order, log_depth);
        for (i, row) in rows.into_iter().enumerate() {
            let k = min_degree + i as i32;
            assert!(k <= order, "coefficient at degree {k} beyond order {order}");
            for (j, c) in row.into_iter().enumerate() {
                assert!(j <= log_depth, "log power {j} beyond log_depth {log_depth}");
                s.set(k, j, c);
            }
        }
        s
    }

    /// Plain power series `Σ c[i] x^{min_degree + i}` known through `order`.
    pub fn from_coeffs(min_degree: i32, coeffs: &[f64], order: i32) -> Self {
        let mut s = Self::zeros(min_degree, order, 0);
        for (i, &c) in coeffs.iter().enumerate() {
            let k = min_degree + i as i32;
            if k <= order {
                s.set(k, 0, c);
            } else {
                assert!(c == 0.0, "nonzero coefficient at degree {k} beyond order {order}");
            }
        }
        s
    }

    pub(crate) fn zeros(min_degree: i32, order: i32, log_depth: usize) -> Self {
        let order = order.max(min_degree - 1);
        let rows = (order - min_degree + 1) as usize;
        Self {
            min_degree,
            order,
            log_depth,
            coeffs: vec![0.0; rows * (log_depth + 1)],
            radius: None,
        }
    }

    pub fn zero(order: i32) -> Self {
        Self::zeros(0, order, 0)
    }

    pub fn constant(c: f64, order: i32) -> Self {
        Self::from_coeffs(0, &[c], order)
    }

    pub fn monomial(c: f64, k: i32, j: usize, order: i32) -> Self {
        let mut s = Self::zeros(k.min(0), order, j);
        if k <= order {
            s.set(k, j, c);
        }
        s
    }

    /// `log x`, exact to every order.
    pub fn log_x(order: i32) -> Self {
        Self::monomial(1.0, 0, 1, order)
    }

    /// The jet of the coordinate itself at `x0`: `x0 + ξ`.
    pub fn identity_jet(x0: f64, order: usize) -> Self {
        let c = [x0, 1.0];
        Self::from_coeffs(0, &c[..(order + 1).min(2)], order as i32)
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = Some(radius);
        self
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn min_degree(&self) -> i32 {
        self.min_degree
    }

    /// Highest degree with a known coefficient.
    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn log_depth(&self) -> usize {
        self.log_depth
    }

    fn idx(&self, k: i32, j: usize) -> usize {
        (k - self.min_degree) as usize * (self.log_depth + 1) + j
    }

    fn set(&mut self, k: i32, j: usize, c: f64) {
        let i = self.idx(k, j);
        self.coeffs[i] = c;
    }

    fn add_at(&mut self, k: i32, j: usize, c: f64) {
        let i = self.idx(k, j);
        self.coeffs[i] += c;
    }

    /// Coefficient of `x^k (log x)^j`; zero when absent.
    pub fn coeff(&self, k: i32, j: usize) -> f64 {
        if k < self.min_degree || k > self.order || j > self.log_depth {
            0.0
        } else {
            self.coeffs[self.idx(k, j)]
        }
    }

    /// Plain coefficient of `x^k` (log power zero).
    pub fn c(&self, k: i32) -> f64 {
        self.coeff(k, 0)
    }

    /// Coefficients `[a_{k,0}]` for `k = 0 ..= order`, for power-series use.
    pub fn power_coeffs(&self) -> Vec<f64> {
        (0..=self.order).map(|k| self.c(k)).collect()
    }

    fn row_nonzero(&self, k: i32) -> bool {
        (0..=self.log_depth).any(|j| self.coeff(k, j) != 0.0)
    }

    /// Lowest degree carrying a nonzero coefficient, if any.
    pub fn leading_degree(&self) -> Option<i32> {
        (self.min_degree..=self.order).find(|&k| self.row_nonzero(k))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Drop log columns that are identically zero.
    fn compact_logs(mut self) -> Self {
        let mut depth = self.log_depth;
        while depth > 0 && (self.min_degree..=self.order).all(|k| self.coeff(k, depth) == 0.0) {
            depth -= 1;
        }
        if depth != self.log_depth {
            let mut out = Self::zeros(self.min_degree, self.order, depth);
            for k in self.min_degree..=self.order {
                for j in 0..=depth {
                    out.set(k, j, self.coeff(k, j));
                }
            }
            out.radius = self.radius;
            self = out;
        }
        self
    }

    /// Same function, storage starting at `min_degree` (must not drop nonzero terms).
    fn reframe(&self, min_degree: i32, order: i32, log_depth: usize) -> Self {
        let mut out = Self::zeros(min_degree, order, log_depth);
        for k in self.min_degree.max(min_degree)..=self.order.min(order) {
            for j in 0..=self.log_depth.min(log_depth) {
                out.set(k, j, self.coeff(k, j));
            }
        }
        out.radius = self.radius;
        out
    }

    /// Restrict to degrees `<= order` (never raises the order).
    pub fn truncate(&self, order: i32) -> Self {
        self.reframe(self.min_degree, order.min(self.order), self.log_depth)
    }

    /// Multiply by a scalar.
    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|a| *a *= c);
        out
    }

    /// Multiply by `x^shift`.
    pub fn shift(&self, shift: i32) -> Self {
        let mut out = self.clone();
        out.min_degree += shift;
        out.order += shift;
        out
    }

    pub fn add_scalar(&self, c: f64) -> Self {
        self + &Self::constant(c, self.order.max(0))
    }

    fn binary_add(&self, other: &Self, sign: f64) -> Self {
        let min = self.min_degree.min(other.min_degree);
        let order = self.order.min(other.order);
        let depth = self.log_depth.max(other.log_depth);
        let mut out = Self::zeros(min, order, depth);
        for k in min..=order {
            for j in 0..=depth {
                out.set(k, j, self.coeff(k, j) + sign * other.coeff(k, j));
            }
        }
        out.radius = merge_radius(self.radius, other.radius);
        out
    }

    fn product(&self, other: &Self) -> Self {
        let a_lead = self.leading_degree();
        let b_lead = other.leading_degree();
        // Known order: the truncation error of each factor times the other's leading term.
        let a_min = a_lead.unwrap_or(self.order + 1).min(self.order + 1);
        let b_min = b_lead.unwrap_or(other.order + 1).min(other.order + 1);
        let order = (self.order + b_min).min(other.order + a_min);
        let min = self.min_degree + other.min_degree;
        let depth = self.log_depth + other.log_depth;
        let mut out = Self::zeros(min, order.max(min - 1), depth);
        for ka in self.min_degree..=self.order {
            if !self.row_nonzero(ka) {
                continue;
            }
            for kb in other.min_degree..=other.order {
                let k = ka + kb;
                if k > order {
                    break;
                }
                for ja in 0..=self.log_depth {
                    let a = self.coeff(ka, ja);
                    if a == 0.0 {
                        continue;
                    }
                    for jb in 0..=other.log_depth {
                        let b = other.coeff(kb, jb);
                        if b != 0.0 {
                            out.add_at(k, ja + jb, a * b);
                        }
                    }
                }
            }
        }
        out.radius = merge_radius(self.radius, other.radius);
        out.compact_logs()
    }

    /// Normalized view `x^m (c_0 + c_1 x + ...)` of a log-free series:
    /// returns `(m, [c_0, c_1, ...])` with `c_0 != 0`, known through `order - m`.
    fn normalized(&self) -> Option<(i32, Vec<f64>)> {
        let m = self.leading_degree()?;
        Some((m, (m..=self.order).map(|k| self.c(k)).collect()))
    }

    fn require_log_free(&self, what: &str) -> Result<()> {
        if (self.min_degree..=self.order).any(|k| (1..=self.log_depth).any(|j| self.coeff(k, j) != 0.0)) {
            return Err(Error::Domain(format!("{what} requires a series without log terms")));
        }
        Ok(())
    }

    /// `1 / self` for a log-free series with a nonzero leading coefficient.
    pub fn recip(&self) -> Result<Self> {
        self.require_log_free("division")?;
        let (m, b) = self.normalized().ok_or(Error::SingularDivision)?;
        let len = b.len();
        let mut c = vec![0.0; len];
        c[0] = 1.0 / b[0];
        for k in 1..len {
            let s: f64 = (1..=k).map(|i| b[i] * c[k - i]).sum();
            c[k] = -s / b[0];
        }
        let rel_order = len as i32 - 1;
        let mut out = Self::from_coeffs(-m, &c, -m + rel_order);
        out.radius = self.radius;
        Ok(out)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    /// `self^p`. Non-integer `p` needs a log-free series with a positive
    /// leading coefficient and an integral leading exponent `m p`.
    pub fn pow(&self, p: f64) -> Result<Self> {
        let is_int = p.fract() == 0.0;
        if is_int && p >= 0.0 && self.log_depth > 0 {
            return Ok(self.powi(p as i32)?);
        }
        self.require_log_free("pow")?;
        let Some((m, a)) = self.normalized() else {
            if p > 0.0 {
                return Ok(Self::zeros(0, (self.order + 1).max(0) - 1, 0));
            }
            return Err(Error::SingularDivision);
        };
        if !is_int && a[0] <= 0.0 {
            return Err(Error::Domain(format!(
                "non-integer power {p} of a series with nonpositive leading coefficient {}",
                a[0]
            )));
        }
        let mp = m as f64 * p;
        if mp.fract() != 0.0 {
            return Err(Error::Domain(format!("x^{m} raised to {p} is not an integral power")));
        }
        let len = a.len();
        let mut b = vec![0.0; len];
        b[0] = a[0].powf(p);
        for k in 1..len {
            let s: f64 = (1..=k)
                .map(|j| ((p + 1.0) * j as f64 - k as f64) * a[j] * b[k - j])
                .sum();
            b[k] = s / (k as f64 * a[0]);
        }
        let mp = mp as i32;
        let mut out = Self::from_coeffs(mp, &b, mp + len as i32 - 1);
        out.radius = self.radius;
        Ok(out)
    }

    /// Integer power by repeated squaring; works with log terms for `p >= 0`.
    pub fn powi(&self, p: i32) -> Result<Self> {
        if p < 0 {
            return self.recip()?.powi(-p);
        }
        let rel = self.order - self.leading_degree().unwrap_or(self.min_degree);
        let mut result = Self::constant(1.0, rel.max(0));
        let mut base = self.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    fn require_regular(&self, what: &str) -> Result<()> {
        self.require_log_free(what)?;
        if (self.min_degree..0).any(|k| self.c(k) != 0.0) {
            return Err(Error::Domain(format!("{what} of a series with negative powers")));
        }
        Ok(())
    }

    fn regular_coeffs(&self) -> Vec<f64> {
        (0..=self.order).map(|k| self.c(k)).collect()
    }

    pub fn exp(&self) -> Result<Self> {
        self.require_regular("exp")?;
        let a = self.regular_coeffs();
        let len = a.len();
        let mut b = vec![0.0; len];
        if len == 0 {
            return Ok(Self::zero(self.order));
        }
        b[0] = a[0].exp();
        for k in 1..len {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Ok(Self::from_coeffs(0, &b, self.order).with_radius_opt(self.radius))
    }

    /// Natural log; a leading `x^m` contributes `m log x`.
    pub fn ln(&self) -> Result<Self> {
        self.require_log_free("ln")?;
        let (m, a) = self.normalized().ok_or_else(|| Error::Domain("ln of zero".into()))?;
        if a[0] <= 0.0 {
            return Err(Error::Domain(format!("ln with leading coefficient {}", a[0])));
        }
        let len = a.len();
        let mut b = vec![0.0; len];
        b[0] = a[0].ln();
        for k in 1..len {
            let s: f64 = (1..k).map(|j| j as f64 * b[j] * a[k - j]).sum();
            b[k] = (a[k] - s / k as f64) / a[0];
        }
        let mut out = Self::from_coeffs(0, &b, len as i32 - 1);
        if m != 0 {
            out = &out + &Self::log_x(out.order).scale(m as f64);
        }
        Ok(out.with_radius_opt(self.radius))
    }

    /// `(sin self, cos self)`.
    pub fn sin_cos(&self) -> Result<(Self, Self)> {
        self.require_regular("sin/cos")?;
        let a = self.regular_coeffs();
        let len = a.len();
        let mut s = vec![0.0; len];
        let mut c = vec![0.0; len];
        if len > 0 {
            s[0] = a[0].sin();
            c[0] = a[0].cos();
        }
        for k in 1..len {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                ss += j as f64 * a[j] * c[k - j];
                cc += j as f64 * a[j] * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = -cc / k as f64;
        }
        Ok((
            Self::from_coeffs(0, &s, self.order).with_radius_opt(self.radius),
            Self::from_coeffs(0, &c, self.order).with_radius_opt(self.radius),
        ))
    }

    fn with_radius_opt(mut self, r: Option<f64>) -> Self {
        self.radius = r;
        self
    }

    /// Formal `d/dx`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zeros(self.min_degree - 1, self.order - 1, self.log_depth);
        for k in self.min_degree..=self.order {
            for j in 0..=self.log_depth {
                let a = self.coeff(k, j);
                if a == 0.0 {
                    continue;
                }
                if k != 0 {
                    out.add_at(k - 1, j, a * k as f64);
                }
                if j > 0 {
                    out.add_at(k - 1, j - 1, a * j as f64);
                }
            }
        }
        out.radius = self.radius;
        out.compact_logs()
    }

    /// Term-by-term antiderivative with zero integration constant.
    /// `x^{-1} (log x)^j` integrates to `(log x)^{j+1}/(j+1)`.
    pub fn antiderivative(&self) -> Self {
        let has_inverse = (0..=self.log_depth).any(|j| self.coeff(-1, j) != 0.0);
        let depth = self.log_depth + usize::from(has_inverse);
        let min = (self.min_degree + 1).min(0);
        let mut out = Self::zeros(min, self.order + 1, depth);
        for k in self.min_degree..=self.order {
            for j in 0..=self.log_depth {
                let a = self.coeff(k, j);
                if a == 0.0 {
                    continue;
                }
                if k == -1 {
                    out.add_at(0, j + 1, a / (j + 1) as f64);
                    continue;
                }
                // ∫ x^k L^j = x^{k+1} Σ_i (-1)^i j!/(j-i)! L^{j-i} / (k+1)^{i+1}
                let kp = (k + 1) as f64;
                let mut falling = 1.0;
                let mut denom = kp;
                for i in 0..=j {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    out.add_at(k + 1, j - i, a * sign * falling / denom);
                    falling *= (j - i) as f64;
                    denom *= kp;
                }
            }
        }
        out.radius = self.radius;
        out.compact_logs()
    }

    /// Evaluate the truncation at `x`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if let Some(r) = self.radius {
            if x.abs() > r {
                return Err(Error::Domain(format!("x = {x} outside radius of validity {r}")));
            }
        }
        let has_logs = (1..=self.log_depth).any(|j| (self.min_degree..=self.order).any(|k| self.coeff(k, j) != 0.0));
        if has_logs && x <= 0.0 {
            return Err(Error::Domain(format!("log terms at x = {x}")));
        }
        if x == 0.0 {
            if (self.min_degree..0).any(|k| self.row_nonzero(k)) {
                return Err(Error::Domain("negative powers at x = 0".into()));
            }
            return Ok(self.coeff(0, 0));
        }
        let lx = if has_logs { x.ln() } else { 0.0 };
        let mut total = 0.0;
        let mut lpow = 1.0;
        for j in 0..=self.log_depth {
            let mut acc = 0.0;
            for k in (self.min_degree..=self.order).rev() {
                acc = acc * x + self.coeff(k, j);
            }
            total += acc * x.powi(self.min_degree) * lpow;
            lpow *= lx;
        }
        Ok(total)
    }

    /// Compose with an inner series that has no constant term:
    /// `self(inner(ξ))`, for a log-free `self` with nonnegative degrees.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.require_regular("compose")?;
        inner.require_regular("compose (inner)")?;
        let lead = inner
            .leading_degree()
            .ok_or_else(|| Error::Domain("compose with a zero inner series".into()))?;
        if lead < 1 {
            return Err(Error::Domain("compose needs an inner series vanishing at 0".into()));
        }
        let cap = lead * (self.order + 1) - 1;
        let mut acc = Self::constant(self.c(self.order), cap);
        for k in (0..self.order).rev() {
            acc = (&acc * inner).add_scalar(self.c(k));
        }
        Ok(acc.truncate(cap))
    }

    /// Re-expand the truncation around `x0`: the jet of `x ↦ self.eval(x)`
    /// at `x0`, to `order` in `ξ = x - x0`.
    pub fn rebase(&self, x0: f64, order: usize) -> Result<Self> {
        let jet = Self::identity_jet(x0, order);
        if x0 == 0.0 {
            self.require_regular("rebase at 0")?;
            let mut out = Self::zero(order as i32);
            for k in 0..=self.order.min(order as i32) {
                out.set(k, 0, self.c(k));
            }
            return Ok(out);
        }
        let log = if self.log_depth > 0 { Some(jet.ln()?) } else { None };
        let mut total = Self::zero(order as i32);
        for k in self.min_degree..=self.order {
            if !self.row_nonzero(k) {
                continue;
            }
            let xk = jet.powi(k)?;
            let mut lj = Self::constant(1.0, order as i32);
            for j in 0..=self.log_depth {
                let a = self.coeff(k, j);
                if a != 0.0 {
                    total = &total + &(&xk * &lj).scale(a);
                }
                if j < self.log_depth {
                    lj = &lj * log.as_ref().expect("log jet");
                }
            }
        }
        Ok(total.truncate(order as i32))
    }

    /// Polynomial shift of a jet: coefficients of `ξ ↦ self(δ + ξ)`.
    pub fn shift_origin(&self, delta: f64, order: usize) -> Result<Self> {
        self.require_regular("shift_origin")?;
        let a = self.regular_coeffs();
        let n = a.len();
        let mut out = vec![0.0; order + 1];
        // Horner in (δ + ξ), keeping `order + 1` terms.
        for k in (0..n).rev() {
            let mut next = vec![0.0; order + 1];
            for m in 0..=order {
                next[m] += out[m] * delta;
                if m + 1 <= order {
                    next[m + 1] += out[m];
                }
            }
            next[0] += a[k];
            out = next;
        }
        let known = (self.order).min(order as i32);
        Ok(Self::from_coeffs(0, &out[..=known.max(-1) as usize], known))
    }

    /// Largest coefficient magnitude over degrees `<= up_to`.
    pub fn max_abs_coeff(&self, up_to: i32) -> f64 {
        let mut m: f64 = 0.0;
        for k in self.min_degree..=self.order.min(up_to) {
            for j in 0..=self.log_depth {
                m = m.max(self.coeff(k, j).abs());
            }
        }
        m
    }
}

fn merge_radius(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Arithmetic dispatch used by the CLI and tests.
pub fn series_arith(a: &LogSeries, b: &LogSeries, op: ArithOp) -> Result<LogSeries> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.div(b)?,
    })
}

impl Add for &LogSeries {
    type Output = LogSeries;
    fn add(self, rhs: &LogSeries) -> LogSeries {
        self.binary_add(rhs, 1.0)
    }
}

impl Sub for &LogSeries {
    type Output = LogSeries;
    fn sub(self, rhs: &LogSeries) -> LogSeries {
        self.binary_add(rhs, -1.0)
    }
}

impl Mul for &LogSeries {
    type Output = LogSeries;
    fn mul(self, rhs: &LogSeries) -> LogSeries {
        self.product(rhs)
    }
}

impl Neg for &LogSeries {
    type Output = LogSeries;
    fn neg(self) -> LogSeries {
        self.scale(-1.0)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for LogSeries {
            type Output = LogSeries;
            fn $f(self, rhs: LogSeries) -> LogSeries { (&self).$f(&rhs) }
        }
        impl $tr<&LogSeries> for LogSeries {
            type Output = LogSeries;
            fn $f(self, rhs: &LogSeries) -> LogSeries { (&self).$f(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for LogSeries {
    type Output = LogSeries;
    fn neg(self) -> LogSeries {
        self.scale(-1.0)
    }
}

impl fmt::Display for LogSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in self.min_degree..=self.order {
            for j in 0..=self.log_depth {
                let a = self.coeff(k, j);
                if a == 0.0 {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({a})")?;
                if k != 0 {
                    write!(f, "*x^{k}")?;
                }
                if j > 0 {
                    write!(f, "*log(x)^{j}")?;
                }
            }
        }
        if !first {
            write!(f, " + ")?;
        }
        write!(f, "O(x^{})", self.order + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    /// Binomial coefficients for `(1 + t)^m`, the oracle for the
    /// `(1 - x²/4)^m` warp powers.
    fn binomial(m: u32, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
    }

    fn quarter_warp(order: i32) -> LogSeries {
        LogSeries::from_coeffs(0, &[1.0, 0.0, -0.25], order)
    }

    #[test]
    fn product_of_conjugates() {
        let a = LogSeries::from_coeffs(0, &[1.0, 1.0], 8);
        let b = LogSeries::from_coeffs(0, &[1.0, -1.0], 8);
        let p = &a * &b;
        assert_eq!(p.c(0), 1.0);
        assert_eq!(p.c(1), 0.0);
        assert_eq!(p.c(2), -1.0);
        assert!((3..=8).all(|k| p.c(k) == 0.0));
    }

    #[test]
    fn geometric_series() {
        let one = LogSeries::constant(1.0, 10);
        let d = LogSeries::from_coeffs(0, &[1.0, -1.0], 10);
        let q = one.div(&d).unwrap();
        assert_eq!(q.order(), 10);
        for k in 0..=10 {
            assert!(close(q.c(k), 1.0, 1e-15));
        }
    }

    #[test]
    fn cube_of_warp_matches_binomial() {
        let c = quarter_warp(12).powi(3).unwrap();
        for k in 0..=3u32 {
            let expect = binomial(3, k) * (-0.25f64).powi(k as i32);
            assert!(close(c.c(2 * k as i32), expect, 1e-15));
        }
        assert!(close(c.c(2), -0.75, 1e-15));
        assert!(close(c.c(4), 3.0 / 16.0, 1e-15));
        assert!(close(c.c(6), -1.0 / 64.0, 1e-15));
        assert!(close(c.eval(1.0).unwrap(), 0.421875, 1e-15));
    }

    #[test]
    fn real_powers() {
        let a = LogSeries::from_coeffs(0, &[1.0, 2.0], 6);
        let r = a.pow(0.5).unwrap();
        assert!(close(r.c(0), 1.0, 1e-15));
        assert!(close(r.c(1), 1.0, 1e-15));
        assert!(close(r.c(2), -0.5, 1e-15));
        assert!(close(r.c(3), 0.5, 1e-15));

        let f = quarter_warp(12).pow(4.0).unwrap();
        let expect = [1.0, -1.0, 3.0 / 8.0, -1.0 / 16.0, 1.0 / 256.0];
        for (i, e) in expect.iter().enumerate() {
            assert!(close(f.c(2 * i as i32), *e, 1e-14), "k={i}");
            assert!(close(f.coeff(2 * i as i32, 0), *e, 1e-14));
        }
        assert!(close(f.coeff(4, 0), 3.0 / 8.0, 1e-15));

        let z = a.pow(0.0).unwrap();
        assert_eq!(z.c(0), 1.0);
        assert!((1..=z.order()).all(|k| z.c(k) == 0.0));
    }

    #[test]
    fn pow_domain_error() {
        let a = LogSeries::from_coeffs(0, &[-1.0, 1.0], 4);
        assert!(matches!(a.pow(0.5), Err(Error::Domain(_))));
        assert!(a.pow(3.0).is_ok());
    }

    #[test]
    fn singular_division() {
        let a = LogSeries::constant(1.0, 4);
        let z = LogSeries::zero(4);
        assert_eq!(a.div(&z), Err(Error::SingularDivision));
    }

    #[test]
    fn antiderivative_cases() {
        let inv = LogSeries::monomial(1.0, -1, 0, 4);
        let l = inv.antiderivative();
        assert_eq!(l.coeff(0, 1), 1.0);
        assert_eq!(l.log_depth(), 1);

        // x^-4 (1 - x²/4)^3: the hyperbolic 4-space volume density.
        let mu = quarter_warp(9).powi(3).unwrap().shift(-4);
        let anti = mu.antiderivative();
        assert!(close(anti.c(-3), -1.0 / 3.0, 1e-15));
        assert!(close(anti.c(-1), 0.75, 1e-15));
        assert!(close(anti.c(1), 3.0 / 16.0, 1e-15));
        assert!(close(anti.c(3), -1.0 / 192.0, 1e-15));
        assert_eq!(anti.c(0), 0.0);

        assert!(LogSeries::zero(5).antiderivative().is_zero());
    }

    #[test]
    fn antiderivative_of_log_terms() {
        // ∫ x log x = x²/2 log x - x²/4
        let s = LogSeries::monomial(1.0, 1, 1, 6);
        let a = s.antiderivative();
        assert!(close(a.coeff(2, 1), 0.5, 1e-15));
        assert!(close(a.coeff(2, 0), -0.25, 1e-15));
        let back = a.derivative();
        assert!(close(back.coeff(1, 1), 1.0, 1e-15));
        assert!(back.coeff(1, 0).abs() < 1e-15);
    }

    #[test]
    fn evaluation() {
        let s = LogSeries::from_coeffs(0, &[1.0, 0.0, 1.0], 4);
        assert_eq!(s.eval(0.5).unwrap(), 1.25);
        assert_eq!(LogSeries::log_x(3).eval(1.0).unwrap(), 0.0);
        assert!(LogSeries::log_x(3).eval(0.0).is_err());
        assert!(LogSeries::log_x(3).eval(-1.0).is_err());
        let r = s.clone().with_radius(0.4);
        assert!(r.eval(0.5).is_err());
    }

    #[test]
    fn coefficient_access() {
        let s = LogSeries::from_coeffs(0, &[1.0, 0.0, -1.0], 4);
        assert_eq!(s.coeff(2, 0), -1.0);
        assert_eq!(LogSeries::log_x(2).coeff(0, 1), 1.0);
        assert_eq!(s.coeff(7, 0), 0.0);
    }

    #[test]
    fn mixed_order_takes_minimum() {
        let a = LogSeries::from_coeffs(0, &[1.0, 1.0], 3);
        let b = LogSeries::from_coeffs(0, &[1.0, 1.0], 7);
        assert_eq!((&a + &b).order(), 3);
        assert_eq!((&a * &b).order(), 3);
        let c = LogSeries::from_coeffs(-2, &[1.0], 5);
        // x^-2 times something known to x^3 is known to x^1
        assert_eq!((&c * &a).order(), 1);
    }

    #[test]
    fn exp_log_sin_cos() {
        let x = LogSeries::identity_jet(0.0, 8);
        let e = x.exp().unwrap();
        let mut fact = 1.0;
        for k in 0..=8 {
            if k > 0 {
                fact *= k as f64;
            }
            assert!(close(e.c(k), 1.0 / fact, 1e-15));
        }
        let l = e.ln().unwrap();
        assert!(close(l.c(1), 1.0, 1e-14));
        assert!((2..=8).all(|k| l.c(k).abs() < 1e-14));
        let (s, c) = LogSeries::identity_jet(0.3, 6).sin_cos().unwrap();
        assert!(close(s.c(0), 0.3f64.sin(), 1e-15));
        assert!(close(s.c(1), 0.3f64.cos(), 1e-15));
        assert!(close(c.c(2), -0.3f64.cos() / 2.0, 1e-15));
        let lx = LogSeries::from_coeffs(2, &[3.0], 6).ln().unwrap();
        assert!(close(lx.coeff(0, 0), 3f64.ln(), 1e-15));
        assert_eq!(lx.coeff(0, 1), 2.0);
    }

    #[test]
    fn compose_and_rebase() {
        // exp(x) ∘ (2ξ) = exp(2ξ)
        let e = LogSeries::identity_jet(0.0, 6).exp().unwrap();
        let two = LogSeries::from_coeffs(1, &[2.0], 6);
        let c = e.compose(&two).unwrap();
        assert!(close(c.c(3), 8.0 / 6.0, 1e-14));
        // 1/x rebased at 2: 1/2 - ξ/4 + ξ²/8
        let inv = LogSeries::monomial(1.0, -1, 0, 3);
        let r = inv.rebase(2.0, 3).unwrap();
        assert!(close(r.c(0), 0.5, 1e-15));
        assert!(close(r.c(1), -0.25, 1e-15));
        assert!(close(r.c(2), 0.125, 1e-15));
        // log x at 1: ξ - ξ²/2
        let l = LogSeries::log_x(3).rebase(1.0, 3).unwrap();
        assert!(close(l.c(1), 1.0, 1e-15));
        assert!(close(l.c(2), -0.5, 1e-15));
    }

    #[test]
    fn origin_shift() {
        let p = LogSeries::from_coeffs(0, &[1.0, 2.0, 3.0], 2);
        let q = p.shift_origin(1.0, 2).unwrap();
        assert!(close(q.c(0), 6.0, 1e-15));
        assert!(close(q.c(1), 8.0, 1e-15));
        assert!(close(q.c(2), 3.0, 1e-15));
    }
}
