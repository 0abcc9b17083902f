//! The cofactor sequence `μ₁ = μ, μₙ = μₙ₋₁μ + ∂_W μₙ₋₁` evaluated with
//! jets, the closed-form cofactors of the system families, the numerically
//! integrated C-factor with `∂_W m = μm`, and the scalar combinations `ζ`,
//! `ζ_λ` behind the one-dimensional convexity conditions.
//!
//! The jet recursion is the authoritative value; every printed closed form
//! is treated as a regression target against it.

use alloc::format;
use alloc::vec::Vec;

use crate::expr::{Arity, EvalError, ExprAst};
use crate::flow::{self, FlowError, IntegratorConfig};
use crate::jet::Jet2;
use crate::plane::Pt;
use crate::systems::separable::EPS_AXIS;
use crate::systems::{
    Field, JacobianTriple, NormalizerPair, SeparableSystem, SystemError, EPS_STATIONARY,
};

/// Values `μ₁(z)..μₙ(z)` of the cofactor sequence at one point.
#[derive(Debug, Clone)]
pub struct CofactorSeq {
    pub point: Pt,
    /// `values[j]` is `μ_{j+1}(z)`.
    pub values: Vec<f64>,
}

/// Evaluate the recursion at `z` up to order `n`. Consumes the cofactor jet
/// to order `n − 1` and the normalizer jets to order `n − 2`; each
/// application of `∂_W` costs one jet order, so the requested orders are
/// exactly sufficient.
pub fn cofactor_sequence(
    pair: &NormalizerPair,
    z: Pt,
    n: usize,
) -> Result<CofactorSeq, SystemError> {
    assert!(n >= 1, "cofactor order must be at least 1");
    let mu = pair.mu_jet(z, n - 1)?;
    let w = if n >= 2 { Some(pair.w().jets(z, n - 2)?) } else { None };
    let mut values = Vec::with_capacity(n);
    values.push(mu.value());
    let mut current = mu.clone();
    for j in 2..=n {
        let target = n - j;
        let [w1, w2] = w.as_ref().expect("n >= 2");
        let dw = w1
            .clone()
            .truncate(target)
            .mul(&current.dx().truncate(target))
            .add(&w2.clone().truncate(target).mul(&current.dy().truncate(target)));
        current = current.truncate(target).mul(&mu.clone().truncate(target)).add(&dw);
        values.push(current.value());
    }
    Ok(CofactorSeq { point: z, values })
}

/// Iterated flow derivatives `[μ, ∂_W μ, ..., ∂_W^(n−1) μ]` at `z`.
pub fn mu_flow_derivatives(
    pair: &NormalizerPair,
    z: Pt,
    n: usize,
) -> Result<Vec<f64>, SystemError> {
    assert!(n >= 1);
    let mu = pair.mu_jet(z, n - 1)?;
    let w = if n >= 2 { Some(pair.w().jets(z, n - 2)?) } else { None };
    Ok(flow_derivatives(&mu, w.as_ref(), n))
}

fn flow_derivatives(start: &Jet2, w: Option<&[Jet2; 2]>, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    out.push(start.value());
    let mut current = start.clone();
    for j in 2..=n {
        let target = n - j;
        let [w1, w2] = w.expect("n >= 2");
        current = w1
            .clone()
            .truncate(target)
            .mul(&current.dx().truncate(target))
            .add(&w2.clone().truncate(target).mul(&current.dy().truncate(target)));
        out.push(current.value());
    }
    out
}

/// Flow-derivative inputs for the explicit polynomials: `μ` and
/// `∂_W μ .. ∂_W⁴ μ` at a common point.
#[derive(Debug, Clone, Copy, Default)]
pub struct MuDerivs {
    pub mu: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl MuDerivs {
    pub fn from_slice(v: &[f64]) -> Self {
        MuDerivs {
            mu: v.first().copied().unwrap_or(0.0),
            d1: v.get(1).copied().unwrap_or(0.0),
            d2: v.get(2).copied().unwrap_or(0.0),
            d3: v.get(3).copied().unwrap_or(0.0),
            d4: v.get(4).copied().unwrap_or(0.0),
        }
    }
}

/// The expanded polynomials for `μ₁..μₙ`, `n ≤ 5`:
/// `μ₂ = μ² + μ'`, `μ₃ = μ³ + 3μμ' + μ''`,
/// `μ₄ = μ⁴ + 6μ²μ' + 4μμ'' + 3μ'² + μ'''`,
/// `μ₅ = μ⁵ + 10μ³μ' + 10μ²μ'' + 15μμ'² + 5μμ''' + 10μ'μ'' + μ⁽⁴⁾`.
pub fn cofactor_polynomials(d: &MuDerivs, n: usize) -> Result<Vec<f64>, SystemError> {
    if n == 0 || n > 5 {
        return Err(SystemError::BadParameter(format!(
            "explicit cofactor polynomials cover orders 1..=5, got {n}"
        )));
    }
    let MuDerivs { mu, d1, d2, d3, d4 } = *d;
    let all = [
        mu,
        mu * mu + d1,
        crate::math::powi(mu, 3) + 3.0 * mu * d1 + d2,
        crate::math::powi(mu, 4) + 6.0 * mu * mu * d1 + 4.0 * mu * d2 + 3.0 * d1 * d1 + d3,
        crate::math::powi(mu, 5)
            + 10.0 * crate::math::powi(mu, 3) * d1
            + 10.0 * mu * mu * d2
            + 15.0 * mu * d1 * d1
            + 5.0 * mu * d3
            + 10.0 * d1 * d2
            + d4,
    ];
    Ok(all[..n].to_vec())
}

/// Cofactor of the universal normalizer of `H`:
/// `((H_yy − H_xx)H_x² − 4H_xy H_x H_y + (H_xx − H_yy)H_y²)/|∇H|⁴`.
pub fn hamiltonian_cofactor(h: &ExprAst, z: Pt) -> Result<f64, SystemError> {
    let j = h.jet2(z, 2)?;
    let (hx, hy) = (j.partial(1, 0), j.partial(0, 1));
    let (hxx, hxy, hyy) = (j.partial(2, 0), j.partial(1, 1), j.partial(0, 2));
    let grad2 = hx * hx + hy * hy;
    if grad2 <= EPS_STATIONARY * EPS_STATIONARY {
        return Err(SystemError::StationaryPoint(z));
    }
    Ok(((hyy - hxx) * hx * hx - 4.0 * hxy * hx * hy + (hxx - hyy) * hy * hy) / (grad2 * grad2))
}

/// Closed form of `μ₂` for the separable normalizer: the quartic-in-`G'`
/// expression when `F = y²/2`, otherwise `(Γ' + Φ' − 2)² + Γ''Γ + Φ''Φ`.
/// Near the `x`-axis the potential case routes through the series form of
/// `Γ` (the direct formula is a 0/0 there).
pub fn mu_s2_closed(sys: &SeparableSystem, z: Pt) -> Result<f64, SystemError> {
    if sys.is_conservative_potential() && z[0].abs() >= EPS_AXIS {
        let g = sys.g_ast().jet1(z[0], 3)?;
        let (g0, g1, g2, g3) = (g.value(), g.derivative(1), g.derivative(2), g.derivative(3));
        let g1_4 = crate::math::powi(g1, 4);
        if g1_4 == 0.0 {
            return Err(SystemError::Eval(EvalError::DivisionByZero));
        }
        return Ok(
            (g1_4 - 8.0 * g0 * g1 * g1 * g2 + 12.0 * g0 * g0 * g2 * g2
                - 4.0 * g0 * g0 * g1 * g3)
                / g1_4,
        );
    }
    let gamma = sys.gamma_jet(z[0], 2)?;
    let phi = sys.phi_jet(z[1], 2)?;
    let s = gamma.derivative(1) + phi.derivative(1) - 2.0;
    Ok(s * s + gamma.value() * gamma.derivative(2) + phi.value() * phi.derivative(2))
}

/// The printed rational displays for the cofactors of a reparametrized
/// linear center, assembled from the homogeneous parts of `ξ` through the
/// Euler identity `∂_W^(k) ξ = Σ nᵏ ξₙ` for `W = (x, y)`. Returns `μ₁..μₙ`.
pub fn xi_cofactor_asts(parts: &[(u32, ExprAst)], n: usize) -> Result<Vec<ExprAst>, SystemError> {
    if n == 0 || n > 5 {
        return Err(SystemError::BadParameter(format!(
            "xi cofactor displays cover orders 1..=5, got {n}"
        )));
    }
    let mut xi_d: Vec<ExprAst> = Vec::with_capacity(6);
    for k in 0..=5usize {
        let mut acc = ExprAst::constant(0.0, Arity::Two);
        for (deg, part) in parts {
            let factor = crate::math::powi(f64::from(*deg), k as i32);
            acc = acc.add(ExprAst::constant(factor, Arity::Two).mul(part.clone()));
        }
        xi_d.push(acc);
    }
    let xi = &xi_d[0];
    let c = |v: f64| ExprAst::constant(v, Arity::Two);
    let mut out = Vec::with_capacity(n);
    out.push(xi_d[1].clone().div(xi.clone()).neg());
    if n >= 2 {
        let num =
            c(2.0).mul(xi_d[1].clone().pow(2)).sub(xi_d[2].clone().mul(xi.clone()));
        out.push(num.div(xi.clone().pow(2)));
    }
    if n >= 3 {
        let num = c(-6.0)
            .mul(xi_d[1].clone().pow(3))
            .add(c(6.0).mul(xi.clone()).mul(xi_d[1].clone()).mul(xi_d[2].clone()))
            .sub(xi.clone().pow(2).mul(xi_d[3].clone()));
        out.push(num.div(xi.clone().pow(3)));
    }
    if n >= 4 {
        let num = c(24.0)
            .mul(xi_d[1].clone().pow(4))
            .sub(c(36.0).mul(xi.clone()).mul(xi_d[1].clone().pow(2)).mul(xi_d[2].clone()))
            .add(c(8.0).mul(xi.clone().pow(2)).mul(xi_d[1].clone()).mul(xi_d[3].clone()))
            .add(c(6.0).mul(xi.clone().pow(2)).mul(xi_d[2].clone().pow(2)))
            .sub(xi.clone().pow(3).mul(xi_d[4].clone()));
        out.push(num.div(xi.clone().pow(4)));
    }
    if n >= 5 {
        let num = c(-120.0)
            .mul(xi_d[1].clone().pow(5))
            .add(c(240.0).mul(xi_d[1].clone().pow(3)).mul(xi_d[2].clone()).mul(xi.clone()))
            .sub(
                c(60.0)
                    .mul(xi_d[1].clone().pow(2))
                    .mul(xi_d[3].clone())
                    .mul(xi.clone().pow(2)),
            )
            .sub(
                c(90.0)
                    .mul(xi_d[1].clone())
                    .mul(xi_d[2].clone().pow(2))
                    .mul(xi.clone().pow(2)),
            )
            .add(c(10.0).mul(xi_d[1].clone()).mul(xi_d[4].clone()).mul(xi.clone().pow(3)))
            .add(c(20.0).mul(xi_d[2].clone()).mul(xi_d[3].clone()).mul(xi.clone().pow(3)))
            .sub(xi_d[5].clone().mul(xi.clone().pow(4)));
        out.push(num.div(xi.clone().pow(5)));
    }
    Ok(out)
}

/// `ζ(t) = 2LL''² − L'²L'' − LL'L'''` from one order-3 jet; condition (C)
/// asks for `ζ ≥ 0`.
pub fn zeta(l: &ExprAst, t: f64) -> Result<f64, SystemError> {
    let j = l.jet1(t, 3)?;
    let (l0, l1, l2, l3) = (j.value(), j.derivative(1), j.derivative(2), j.derivative(3));
    Ok(2.0 * l0 * l2 * l2 - l1 * l1 * l2 - l0 * l1 * l3)
}

/// Margin of condition (C_λ): `ζ_λ(t) − λL'⁴` with
/// `ζ_λ = 2L²L''² + LL'²L'' − L²L'L'''`; nonnegative iff (C_λ) holds at `t`.
pub fn zeta_lambda(l: &ExprAst, t: f64, lambda: f64) -> Result<f64, SystemError> {
    let j = l.jet1(t, 3)?;
    let (l0, l1, l2, l3) = (j.value(), j.derivative(1), j.derivative(2), j.derivative(3));
    let zl = 2.0 * l0 * l0 * l2 * l2 + l0 * l1 * l1 * l2 - l0 * l0 * l1 * l3;
    Ok(zl - lambda * crate::math::powi(l1, 4))
}

/// Cofactor from an inverse integrating factor: `μ = −∂_{W_δ} ln(δρ)`.
pub fn integrating_factor_cofactor(
    triple: &JacobianTriple,
    rho: &ExprAst,
    z: Pt,
) -> Result<f64, SystemError> {
    let delta = triple.delta.eval2(z)?;
    if delta <= 0.0 {
        return Err(SystemError::NotPositive { what: "delta", at: z, value: delta });
    }
    let rho_v = rho.eval2(z)?;
    if rho_v <= 0.0 {
        return Err(SystemError::NotPositive { what: "rho", at: z, value: rho_v });
    }
    let w = triple.w_delta.at(z)?;
    let dj = triple.delta.jet2(z, 1)?;
    let rj = rho.jet2(z, 1)?;
    let d_term = (w[0] * dj.partial(1, 0) + w[1] * dj.partial(0, 1)) / delta;
    let r_term = (w[0] * rj.partial(1, 0) + w[1] * rj.partial(0, 1)) / rho_v;
    Ok(-(d_term + r_term))
}

/// Flow derivatives of a closed-form C-factor divided by itself:
/// `[∂_W m/m, ..., ∂_W⁽ⁿ⁾ m/m](z)` — the integrand family of the C-factor
/// form of the derivative formula.
pub fn c_factor_log_derivatives(
    m: &ExprAst,
    w: &Field,
    z: Pt,
    n: usize,
) -> Result<Vec<f64>, SystemError> {
    assert!(n >= 1);
    let mj = m.jet2(z, n)?;
    let m0 = mj.value();
    if m0 == 0.0 {
        return Err(SystemError::Eval(EvalError::DivisionByZero));
    }
    let w_jets = w.jets(z, n - 1)?;
    let ds = flow_derivatives(&mj, Some(&w_jets), n + 1);
    Ok(ds[1..].iter().map(|d| d / m0).collect())
}

/// Numerical C-factor along a `W`-orbit: integrates `dm/ds = μm` from the
/// anchor (where `m = 1`) over the parameter interval `s`; by construction
/// `∂_W m = μm`. Returns the orbit endpoint and `m` there.
pub fn c_factor_flow(
    pair: &NormalizerPair,
    anchor: Pt,
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<(Pt, f64), FlowError> {
    let rate = |z: Pt| Ok(pair.mu(z)?);
    flow::integrate_with_growth(pair.w(), &rate, anchor, s, cfg)
}

/// Numerical C-factor at a target point of the `W`-orbit through `anchor`:
/// integrates `dm/ds = μm` forward until the orbit's closest approach lands
/// within tolerance of `target`.
pub fn c_factor_at(
    pair: &NormalizerPair,
    anchor: Pt,
    target: Pt,
    cfg: &IntegratorConfig,
) -> Result<f64, FlowError> {
    let rate = |z: Pt| Ok(pair.mu(z)?);
    flow::growth_to_target(pair.w(), &rate, anchor, target, cfg)
}
