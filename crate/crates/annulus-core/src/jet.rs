//! Truncated Taylor expansions (jets) in one and two variables.
//!
//! Coefficients are stored in scaled form, `c_j = f⁽ʲ⁾(t₀)/j!` resp.
//! `c_ij = ∂ₓ^i ∂_y^j f / (i! j!)`, so multiplication is a plain Cauchy
//! product and coefficients stay well-scaled up to the orders used here
//! (the cofactor recursion needs at most order 8).
//!
//! Order-0 evaluation is bit-identical to the pointwise evaluator: addition,
//! multiplication and the elementary functions touch the constant term with
//! the same floating-point operations, division computes `c₀ = a₀/b₀`
//! directly (long division), and integer powers walk the exponent bits in
//! the same order as the scalar path.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::EvalError;
use crate::math;
use crate::plane::Pt;

/// Univariate jet: value and scaled derivatives at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    t0: f64,
    /// `c[j] = f⁽ʲ⁾(t0)/j!`, length `order + 1`.
    c: Vec<f64>,
}

/// Bivariate jet: value and scaled partial derivatives at `z0`, all total
/// orders up to `order`; `(order+1)(order+2)/2` coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    z0: Pt,
    order: usize,
    /// Triangular layout: degree block `d` starts at `d(d+1)/2`, entry `j`
    /// within the block holds the coefficient of `x^(d-j) y^j`.
    c: Vec<f64>,
}

#[inline]
fn tri_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

#[inline]
fn tri_idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

// Scaled Taylor coefficients of the elementary functions at u0; shared by
// both jet types through polynomial composition.

fn taylor_exp(u0: f64, order: usize) -> Vec<f64> {
    let mut g = vec![0.0; order + 1];
    g[0] = math::exp(u0);
    for k in 1..=order {
        g[k] = g[k - 1] / k as f64;
    }
    g
}

fn taylor_sin(u0: f64, order: usize) -> Vec<f64> {
    let (s, c) = (math::sin(u0), math::cos(u0));
    let cycle = [s, c, -s, -c];
    let mut g = vec![0.0; order + 1];
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        g[k] = cycle[k % 4] / fact;
    }
    g
}

fn taylor_cos(u0: f64, order: usize) -> Vec<f64> {
    let (s, c) = (math::sin(u0), math::cos(u0));
    let cycle = [c, -s, -c, s];
    let mut g = vec![0.0; order + 1];
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        g[k] = cycle[k % 4] / fact;
    }
    g
}

fn taylor_ln(u0: f64, order: usize) -> Result<Vec<f64>, EvalError> {
    if u0 <= 0.0 {
        return Err(EvalError::LogNonPositive(u0));
    }
    let mut g = vec![0.0; order + 1];
    g[0] = math::ln(u0);
    if order >= 1 {
        g[1] = 1.0 / u0;
        for k in 1..order {
            g[k + 1] = -g[k] * k as f64 / ((k + 1) as f64 * u0);
        }
    }
    Ok(g)
}

fn taylor_sqrt(u0: f64, order: usize) -> Result<Vec<f64>, EvalError> {
    if u0 < 0.0 {
        return Err(EvalError::SqrtNegative(u0));
    }
    if u0 == 0.0 && order >= 1 {
        return Err(EvalError::SqrtZeroJet);
    }
    let mut g = vec![0.0; order + 1];
    g[0] = math::sqrt(u0);
    for k in 0..order {
        g[k + 1] = g[k] * (0.5 - k as f64) / ((k + 1) as f64 * u0);
    }
    Ok(g)
}

impl Jet1 {
    pub fn constant(value: f64, t0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Jet1 { t0, c }
    }

    pub fn variable(t0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = t0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet1 { t0, c }
    }

    pub fn from_coefficients(t0: f64, coefficients: Vec<f64>) -> Self {
        assert!(!coefficients.is_empty());
        Jet1 { t0, c: coefficients }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn point(&self) -> f64 {
        self.t0
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Scaled coefficient `f⁽ʲ⁾/j!`.
    pub fn coefficient(&self, j: usize) -> f64 {
        self.c.get(j).copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// Unscaled derivative `f⁽ʲ⁾(t0)`.
    pub fn derivative(&self, j: usize) -> f64 {
        let mut fact = 1.0;
        for m in 1..=j {
            fact *= m as f64;
        }
        self.coefficient(j) * fact
    }

    pub fn truncate(mut self, order: usize) -> Self {
        self.c.truncate(order + 1);
        self
    }

    fn min_order(&self, other: &Jet1) -> usize {
        self.order().min(other.order())
    }

    pub fn add(&self, other: &Jet1) -> Jet1 {
        debug_assert_eq!(self.t0, other.t0);
        let n = self.min_order(other);
        let c = (0..=n).map(|j| self.c[j] + other.c[j]).collect();
        Jet1 { t0: self.t0, c }
    }

    pub fn sub(&self, other: &Jet1) -> Jet1 {
        debug_assert_eq!(self.t0, other.t0);
        let n = self.min_order(other);
        let c = (0..=n).map(|j| self.c[j] - other.c[j]).collect();
        Jet1 { t0: self.t0, c }
    }

    pub fn neg(&self) -> Jet1 {
        Jet1 { t0: self.t0, c: self.c.iter().map(|v| -v).collect() }
    }

    pub fn scale(&self, k: f64) -> Jet1 {
        Jet1 { t0: self.t0, c: self.c.iter().map(|v| k * v).collect() }
    }

    pub fn add_scalar(&self, k: f64) -> Jet1 {
        let mut r = self.clone();
        r.c[0] += k;
        r
    }

    pub fn mul(&self, other: &Jet1) -> Jet1 {
        debug_assert_eq!(self.t0, other.t0);
        let n = self.min_order(other);
        let mut c = vec![0.0; n + 1];
        for i in 0..=n {
            for j in 0..=n - i {
                c[i + j] += self.c[i] * other.c[j];
            }
        }
        Jet1 { t0: self.t0, c }
    }

    /// Long division; exact `a₀/b₀` in the constant term.
    pub fn div(&self, other: &Jet1) -> Result<Jet1, EvalError> {
        debug_assert_eq!(self.t0, other.t0);
        if other.c[0] == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        let n = self.min_order(other);
        let mut q = vec![0.0; n + 1];
        for d in 0..=n {
            let mut acc = self.c[d];
            for m in 0..d {
                acc -= q[m] * other.c[d - m];
            }
            q[d] = acc / other.c[0];
        }
        Ok(Jet1 { t0: self.t0, c: q })
    }

    pub fn powi(&self, k: i32) -> Result<Jet1, EvalError> {
        if k < 0 {
            if self.c[0] == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            let one = Jet1::constant(1.0, self.t0, self.order());
            return one.div(&self.powi(-k)?);
        }
        let mut acc = Jet1::constant(1.0, self.t0, self.order());
        let mut base = self.clone();
        let mut n = k as u32;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        Ok(acc)
    }

    fn compose(&self, outer: &[f64]) -> Jet1 {
        let n = self.order();
        let mut w = self.clone();
        w.c[0] = 0.0;
        let mut r = Jet1::constant(outer[n], self.t0, n);
        for k in (0..n).rev() {
            r = r.mul(&w);
            r.c[0] += outer[k];
        }
        r
    }

    pub fn sin(&self) -> Jet1 {
        self.compose(&taylor_sin(self.c[0], self.order()))
    }

    pub fn cos(&self) -> Jet1 {
        self.compose(&taylor_cos(self.c[0], self.order()))
    }

    pub fn exp(&self) -> Jet1 {
        self.compose(&taylor_exp(self.c[0], self.order()))
    }

    pub fn ln(&self) -> Result<Jet1, EvalError> {
        Ok(self.compose(&taylor_ln(self.c[0], self.order())?))
    }

    pub fn sqrt(&self) -> Result<Jet1, EvalError> {
        Ok(self.compose(&taylor_sqrt(self.c[0], self.order())?))
    }

    /// Pointwise only; locally constant elsewhere, undefined jump at 0.
    pub fn sign(&self) -> Result<Jet1, EvalError> {
        if self.order() >= 1 && self.c[0] == 0.0 {
            return Err(EvalError::SignAtZero);
        }
        Ok(Jet1::constant(math::sign(self.c[0]), self.t0, self.order()))
    }

    /// Series derivative: drops one order.
    pub fn differentiate(&self) -> Jet1 {
        let n = self.order();
        assert!(n >= 1, "differentiating an order-0 jet");
        let c = (1..=n).map(|j| j as f64 * self.c[j]).collect();
        Jet1 { t0: self.t0, c }
    }

    /// Treat the coefficients as a genuine polynomial in `(t − t0)` and
    /// re-expand it around `t`: returns the jet of that polynomial at `t`.
    /// Exact (up to roundoff) when the jet holds a polynomial of degree
    /// ≤ `self.order()`, which is how the axis-limit series are built.
    pub fn polynomial_jet_at(&self, t: f64, order: usize) -> Jet1 {
        let dt = t - self.t0;
        let n = self.order();
        let mut out = vec![0.0; order + 1];
        // out[j] = Σ_{i≥j} c_i · C(i, j) · dt^{i−j}
        for j in 0..=order.min(n) {
            let mut binom = 1.0; // C(i, j) built incrementally over i
            let mut acc = 0.0;
            let mut dt_pow = 1.0;
            for i in j..=n {
                if i > j {
                    binom = binom * i as f64 / (i - j) as f64;
                    dt_pow *= dt;
                }
                acc += self.c[i] * binom * dt_pow;
            }
            out[j] = acc;
        }
        Jet1 { t0: t, c: out }
    }

    /// Divide by `(t − t0)^m`; the discarded low coefficients must already be
    /// (numerically) zero, which callers validate.
    pub fn shift_down(&self, m: usize) -> Jet1 {
        let n = self.order();
        assert!(m <= n);
        Jet1 { t0: self.t0, c: self.c[m..=n].to_vec() }
    }

    /// Multiply by `(t − t0)`; keeps the order, dropping the top coefficient.
    pub fn shift_up(&self) -> Jet1 {
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        for j in 1..=n {
            c[j] = self.c[j - 1];
        }
        Jet1 { t0: self.t0, c }
    }
}

impl Jet2 {
    pub fn constant(value: f64, z0: Pt, order: usize) -> Self {
        let mut c = vec![0.0; tri_len(order)];
        c[0] = value;
        Jet2 { z0, order, c }
    }

    pub fn variable_x(z0: Pt, order: usize) -> Self {
        let mut j = Jet2::constant(z0[0], z0, order);
        if order >= 1 {
            j.c[tri_idx(1, 0)] = 1.0;
        }
        j
    }

    pub fn variable_y(z0: Pt, order: usize) -> Self {
        let mut j = Jet2::constant(z0[1], z0, order);
        if order >= 1 {
            j.c[tri_idx(0, 1)] = 1.0;
        }
        j
    }

    /// Build a two-variable jet from a one-variable jet in `x` alone
    /// (all mixed and `y` coefficients zero).
    pub fn from_jet1_x(j: &Jet1, y0: f64, order: usize) -> Self {
        let mut out = Jet2::constant(0.0, [j.point(), y0], order);
        for i in 0..=order.min(j.order()) {
            out.c[tri_idx(i, 0)] = j.coefficient(i);
        }
        out
    }

    /// Build a two-variable jet from a one-variable jet in `y` alone.
    pub fn from_jet1_y(j: &Jet1, x0: f64, order: usize) -> Self {
        let mut out = Jet2::constant(0.0, [x0, j.point()], order);
        for jj in 0..=order.min(j.order()) {
            out.c[tri_idx(0, jj)] = j.coefficient(jj);
        }
        out
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn point(&self) -> Pt {
        self.z0
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Scaled coefficient of `x^i y^j`.
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        if i + j > self.order {
            0.0
        } else {
            self.c[tri_idx(i, j)]
        }
    }

    /// Unscaled partial derivative `∂ₓ^i ∂_y^j f(z0)`.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        let mut fact = 1.0;
        for m in 1..=i {
            fact *= m as f64;
        }
        for m in 1..=j {
            fact *= m as f64;
        }
        self.coefficient(i, j) * fact
    }

    pub fn truncate(mut self, order: usize) -> Self {
        if order < self.order {
            self.c.truncate(tri_len(order));
            self.order = order;
        }
        self
    }

    fn zip(&self, other: &Jet2, f: impl Fn(f64, f64) -> f64) -> Jet2 {
        debug_assert_eq!(self.z0, other.z0);
        let order = self.order.min(other.order);
        let len = tri_len(order);
        let c = (0..len).map(|k| f(self.c[k], other.c[k])).collect();
        Jet2 { z0: self.z0, order, c }
    }

    pub fn add(&self, other: &Jet2) -> Jet2 {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet2) -> Jet2 {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Jet2 {
        Jet2 { z0: self.z0, order: self.order, c: self.c.iter().map(|v| -v).collect() }
    }

    pub fn scale(&self, k: f64) -> Jet2 {
        Jet2 { z0: self.z0, order: self.order, c: self.c.iter().map(|v| k * v).collect() }
    }

    pub fn add_scalar(&self, k: f64) -> Jet2 {
        let mut r = self.clone();
        r.c[0] += k;
        r
    }

    pub fn mul(&self, other: &Jet2) -> Jet2 {
        debug_assert_eq!(self.z0, other.z0);
        let order = self.order.min(other.order);
        let mut c = vec![0.0; tri_len(order)];
        for da in 0..=order {
            for ja in 0..=da {
                let a = self.c[da * (da + 1) / 2 + ja];
                if a == 0.0 {
                    continue;
                }
                for db in 0..=order - da {
                    let base = (da + db) * (da + db + 1) / 2 + ja;
                    for jb in 0..=db {
                        c[base + jb] += a * other.c[db * (db + 1) / 2 + jb];
                    }
                }
            }
        }
        Jet2 { z0: self.z0, order, c }
    }

    /// Long division ordered by total degree; exact `a₀/b₀` constant term.
    pub fn div(&self, other: &Jet2) -> Result<Jet2, EvalError> {
        debug_assert_eq!(self.z0, other.z0);
        if other.c[0] == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        let order = self.order.min(other.order);
        let mut q = vec![0.0; tri_len(order)];
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                let mut acc = self.c[tri_idx(i, j)];
                // all β = (p, m) ≤ (i, j) componentwise except (i, j) itself
                for p in 0..=i {
                    for m in 0..=j {
                        if p == i && m == j {
                            continue;
                        }
                        let b = other.coefficient(i - p, j - m);
                        if b != 0.0 {
                            acc -= q[tri_idx(p, m)] * b;
                        }
                    }
                }
                q[tri_idx(i, j)] = acc / other.c[0];
            }
        }
        Ok(Jet2 { z0: self.z0, order, c: q })
    }

    pub fn powi(&self, k: i32) -> Result<Jet2, EvalError> {
        if k < 0 {
            if self.c[0] == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            let one = Jet2::constant(1.0, self.z0, self.order);
            return one.div(&self.powi(-k)?);
        }
        let mut acc = Jet2::constant(1.0, self.z0, self.order);
        let mut base = self.clone();
        let mut n = k as u32;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        Ok(acc)
    }

    fn compose(&self, outer: &[f64]) -> Jet2 {
        let n = self.order;
        let mut w = self.clone();
        w.c[0] = 0.0;
        let mut r = Jet2::constant(outer[n], self.z0, n);
        for k in (0..n).rev() {
            r = r.mul(&w);
            r.c[0] += outer[k];
        }
        r
    }

    pub fn sin(&self) -> Jet2 {
        self.compose(&taylor_sin(self.c[0], self.order))
    }

    pub fn cos(&self) -> Jet2 {
        self.compose(&taylor_cos(self.c[0], self.order))
    }

    pub fn exp(&self) -> Jet2 {
        self.compose(&taylor_exp(self.c[0], self.order))
    }

    pub fn ln(&self) -> Result<Jet2, EvalError> {
        Ok(self.compose(&taylor_ln(self.c[0], self.order)?))
    }

    pub fn sqrt(&self) -> Result<Jet2, EvalError> {
        Ok(self.compose(&taylor_sqrt(self.c[0], self.order)?))
    }

    pub fn sign(&self) -> Result<Jet2, EvalError> {
        if self.order >= 1 && self.c[0] == 0.0 {
            return Err(EvalError::SignAtZero);
        }
        Ok(Jet2::constant(math::sign(self.c[0]), self.z0, self.order))
    }

    /// Jet of `∂f/∂x`, one order lower.
    pub fn dx(&self) -> Jet2 {
        assert!(self.order >= 1, "differentiating an order-0 jet");
        let order = self.order - 1;
        let mut c = vec![0.0; tri_len(order)];
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                c[tri_idx(i, j)] = (i + 1) as f64 * self.c[tri_idx(i + 1, j)];
            }
        }
        Jet2 { z0: self.z0, order, c }
    }

    /// Jet of `∂f/∂y`, one order lower.
    pub fn dy(&self) -> Jet2 {
        assert!(self.order >= 1, "differentiating an order-0 jet");
        let order = self.order - 1;
        let mut c = vec![0.0; tri_len(order)];
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                c[tri_idx(i, j)] = (j + 1) as f64 * self.c[tri_idx(i, j + 1)];
            }
        }
        Jet2 { z0: self.z0, order, c }
    }
}
