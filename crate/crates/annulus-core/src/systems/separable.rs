//! Hamiltonian systems with separable variables `H = G(x) + F(y)`.
//!
//! The system is `x' = F'(y), y' = −G'(x)` and the preferred normalizer is
//! `W_s = (Γ(x), Φ(y))` with `Γ = 2G/G'`, `Φ = 2F/F'` and cofactor
//! `μ_s = Γ' + Φ' − 2`. Both ratios are removable 0/0 forms on the axes;
//! they are evaluated there from the factorization `G = x^{2k}·A(x)`,
//! `G' = x^{2k−1}·B(x)` as the Taylor series `Γ = 2x·A/B`, which also sidesteps
//! the catastrophic cancellation of potentials like `exp(...) − G(0)` close
//! to the axis.

use alloc::sync::Arc;

use crate::expr::{Arity, EvalError, ExprAst, Var};
use crate::jet::{Jet1, Jet2};
use crate::plane::Pt;

use super::{CofactorFn, Field, NormalizerKind, NormalizerPair, Region, SystemError, VectorField};

/// Half-width of the band around an axis where the series branch is used.
pub const EPS_AXIS: f64 = 0.05;
/// Order of the axis series; truncation error is far below roundoff for
/// every potential whose nearest singularity is beyond ~0.6.
const SERIES_ORDER: usize = 16;

/// Declared leading behavior of a potential: `L(t) = coefficient·t^order + o(t^order)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leading {
    pub order: usize,
    pub coefficient: f64,
}

/// One potential together with its axis-stable ratio `2L/L'`.
#[derive(Debug, Clone)]
struct Potential {
    ast: ExprAst,
    lead: Leading,
    deriv: ExprAst,
    /// `2L/L'` as an expression, valid away from the axis.
    ratio: ExprAst,
    /// Taylor series of `2L/L'` at 0.
    ratio_series: Jet1,
    /// Taylor series of `A(t) = L/t^order` at 0 (for the square-root map).
    a_series: Jet1,
}

impl Potential {
    fn build(ast: &ExprAst, lead: Leading) -> Result<Self, SystemError> {
        if lead.order == 0 || lead.order % 2 != 0 {
            return Err(SystemError::LeadingOrder {
                declared: lead.order,
                reason: "leading order must be a positive even integer",
            });
        }
        // canonical shift: the potential vanishes at 0
        let l0 = ast.eval1(0.0)?;
        let shifted = if l0 == 0.0 {
            ast.clone()
        } else {
            ast.clone().sub(ExprAst::constant(l0, Arity::One))
        };
        let jet = shifted.jet1(0.0, lead.order + SERIES_ORDER)?;
        let scale = lead.coefficient.abs().max(1.0);
        for j in 0..lead.order {
            if jet.coefficient(j).abs() > 1e-9 * scale {
                return Err(SystemError::LeadingCoefficient {
                    declared: lead.coefficient,
                    found: jet.coefficient(j),
                });
            }
        }
        let found = jet.coefficient(lead.order);
        if (found - lead.coefficient).abs() > 1e-6 * scale {
            return Err(SystemError::LeadingCoefficient { declared: lead.coefficient, found });
        }
        // A = L/t^2k, B = L'/t^(2k-1); Γ = 2 t A/B with B(0) = 2k·b ≠ 0
        let a_series = jet.shift_down(lead.order);
        let b_series = Jet1::from_coefficients(
            0.0,
            a_series
                .coefficients()
                .iter()
                .enumerate()
                .map(|(m, c)| (lead.order + m) as f64 * c)
                .collect(),
        );
        let ratio_series = a_series.div(&b_series)?.scale(2.0).shift_up();
        let deriv = shifted.derivative(Var::X);
        let ratio = ExprAst::constant(2.0, Arity::One).mul(shifted.clone()).div(deriv.clone());
        Ok(Potential { ast: shifted, lead, deriv, ratio, ratio_series, a_series })
    }

    /// Jet of the ratio `2L/L'` at `t`, switching to the series inside the
    /// axis band.
    fn ratio_jet(&self, t: f64, order: usize) -> Result<Jet1, EvalError> {
        if t.abs() < EPS_AXIS {
            Ok(self.ratio_series.polynomial_jet_at(t, order))
        } else {
            self.ratio.jet1(t, order)
        }
    }

    /// `P(t) = sign(t)·sqrt(2L)`; requires quadratic leading order.
    fn sqrt_map(&self, t: f64) -> Result<f64, EvalError> {
        if t.abs() < EPS_AXIS {
            // P = t·sqrt(2A(t))
            let a = self.a_series.polynomial_jet_at(t, 0).value();
            Ok(t * crate::math::sqrt(2.0 * a))
        } else {
            let l = self.ast.eval1(t)?;
            if l < 0.0 {
                return Err(EvalError::SqrtNegative(l));
            }
            Ok(crate::math::sign(t) * crate::math::sqrt(2.0 * l))
        }
    }

    /// `P'(t) = sign(t)·L'/sqrt(2L)`, smooth through 0 for quadratic leading
    /// order: near the axis `P' = (tA' + 2A)/sqrt(2A)`.
    fn sqrt_map_deriv(&self, t: f64) -> Result<f64, EvalError> {
        if t.abs() < EPS_AXIS {
            let a = self.a_series.polynomial_jet_at(t, 1);
            let (av, ap) = (a.value(), a.derivative(1));
            Ok((t * ap + 2.0 * av) / crate::math::sqrt(2.0 * av))
        } else {
            let l = self.ast.eval1(t)?;
            if l <= 0.0 {
                return Err(EvalError::SqrtNegative(l));
            }
            Ok(crate::math::sign(t) * self.deriv.eval1(t)? / crate::math::sqrt(2.0 * l))
        }
    }
}

/// A separable-variables Hamiltonian system with its derived fields.
#[derive(Debug, Clone)]
pub struct SeparableSystem {
    g: Potential,
    f: Potential,
    v: VectorField,
    region: Region,
}

/// Build the system `x' = F'(y), y' = −G'(x)` after canonically shifting both
/// potentials to vanish at 0. The declared leading data is validated against
/// the actual expansions, and the slope conditions `tG'(t) > 0`, `tF'(t) > 0`
/// are sampled on the punctured region projections.
pub fn build_separable(
    f: &ExprAst,
    g: &ExprAst,
    f_lead: Leading,
    g_lead: Leading,
    region: Region,
) -> Result<Arc<SeparableSystem>, SystemError> {
    let g = Potential::build(g, g_lead)?;
    let f = Potential::build(f, f_lead)?;
    let (px, py) = region.projections();
    slope_check(&g, px)?;
    slope_check(&f, py)?;
    let v = VectorField::new(f.deriv.lift(Var::Y), g.deriv.lift(Var::X).neg());
    Ok(Arc::new(SeparableSystem { g, f, v, region }))
}

/// Sample `t·L'(t) > 0` on the punctured interval and reject interior zeros
/// of `L'`. Zeros of even multiplicity (the cubic's `G' = x(1−x)²`) produce
/// no sign change, so interior local minima of `|L'|` are polished by golden
/// section and compared against the sample scale.
fn slope_check(p: &Potential, interval: (f64, f64)) -> Result<(), SystemError> {
    const N: usize = 256;
    for side in [interval.0, interval.1] {
        if side == 0.0 {
            continue;
        }
        let mut ts = [0.0; N];
        let mut vs = [0.0; N];
        let mut scale = 0.0f64;
        for i in 1..=N {
            let t = side * i as f64 / N as f64;
            let lp = p.deriv.eval1(t)?;
            if t * lp < 0.0 || (t * lp == 0.0 && t.abs() > 1e-9) {
                return Err(SystemError::PotentialSlope { at: t });
            }
            ts[i - 1] = t;
            vs[i - 1] = lp.abs();
            scale = scale.max(lp.abs());
        }
        for i in 1..N - 1 {
            if vs[i] < vs[i - 1] && vs[i] < vs[i + 1] {
                let t = golden_min(&p.deriv, ts[i - 1], ts[i + 1])?;
                let lp = p.deriv.eval1(t)?;
                if lp.abs() <= 1e-10 * scale {
                    return Err(SystemError::PotentialSlope { at: t });
                }
            }
        }
    }
    Ok(())
}

fn golden_min(deriv: &ExprAst, mut lo: f64, mut hi: f64) -> Result<f64, EvalError> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    for _ in 0..60 {
        let m1 = hi - PHI * (hi - lo);
        let m2 = lo + PHI * (hi - lo);
        if deriv.eval1(m1)?.abs() < deriv.eval1(m2)?.abs() {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl SeparableSystem {
    pub fn v(&self) -> &VectorField {
        &self.v
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Shifted potential `G` (vanishes at 0).
    pub fn g_ast(&self) -> &ExprAst {
        &self.g.ast
    }

    pub fn f_ast(&self) -> &ExprAst {
        &self.f.ast
    }

    pub fn g_lead(&self) -> Leading {
        self.g.lead
    }

    pub fn f_lead(&self) -> Leading {
        self.f.lead
    }

    /// Hamiltonian `H(x, y) = G(x) + F(y)` of the system.
    pub fn hamiltonian(&self) -> ExprAst {
        self.g.ast.lift(Var::X).add(self.f.ast.lift(Var::Y))
    }

    /// Whether the quadratic-leading-order hypothesis holds for both
    /// potentials (the square-root map and the companion system exist).
    pub fn is_second_order(&self) -> bool {
        self.g.lead.order == 2 && self.f.lead.order == 2
    }

    /// Whether `F(y) = y²/2`, the second-order conservative ODE case.
    pub fn is_conservative_potential(&self) -> bool {
        if self.f.lead != (Leading { order: 2, coefficient: 0.5 }) {
            return false;
        }
        for t in [0.31, 0.77, 1.23] {
            match self.f.ast.eval1(t) {
                Ok(v) if (v - t * t / 2.0).abs() <= 1e-12 => {}
                _ => return false,
            }
        }
        true
    }

    pub fn gamma_jet(&self, x: f64, order: usize) -> Result<Jet1, EvalError> {
        self.g.ratio_jet(x, order)
    }

    pub fn phi_jet(&self, y: f64, order: usize) -> Result<Jet1, EvalError> {
        self.f.ratio_jet(y, order)
    }

    /// Normalizer `W_s(z) = (Γ(x), Φ(y))`.
    pub fn w_at(&self, z: Pt) -> Result<Pt, EvalError> {
        Ok([self.g.ratio_jet(z[0], 0)?.value(), self.f.ratio_jet(z[1], 0)?.value()])
    }

    pub fn w_jets(&self, z: Pt, order: usize) -> Result<[Jet2; 2], EvalError> {
        let gx = self.g.ratio_jet(z[0], order)?;
        let fy = self.f.ratio_jet(z[1], order)?;
        Ok([Jet2::from_jet1_x(&gx, z[1], order), Jet2::from_jet1_y(&fy, z[0], order)])
    }

    /// Cofactor `μ_s(z) = Γ'(x) + Φ'(y) − 2`.
    pub fn mu_at(&self, z: Pt) -> Result<f64, EvalError> {
        let gp = self.g.ratio_jet(z[0], 1)?.derivative(1);
        let fp = self.f.ratio_jet(z[1], 1)?.derivative(1);
        Ok(gp + fp - 2.0)
    }

    pub fn mu_jet(&self, z: Pt, order: usize) -> Result<Jet2, EvalError> {
        let gp = self.g.ratio_jet(z[0], order + 1)?.differentiate();
        let fp = self.f.ratio_jet(z[1], order + 1)?.differentiate();
        let a = Jet2::from_jet1_x(&gp, z[1], order);
        let b = Jet2::from_jet1_y(&fp, z[0], order);
        Ok(a.add(&b).add_scalar(-2.0))
    }

    /// The square-root map `Ψ(z) = (sign(x)√(2G), sign(y)√(2F))`, which
    /// linearizes the normalizer and the companion system.
    pub fn psi_at(&self, z: Pt) -> Result<Pt, SystemError> {
        if !self.is_second_order() {
            return Err(SystemError::RequiresSecondOrder);
        }
        Ok([self.g.sqrt_map(z[0])?, self.f.sqrt_map(z[1])?])
    }

    /// The commuting companion system `x' = Q(y)/P'(x), y' = −P(x)/Q'(y)`;
    /// its cycles are isochronous of period 2π.
    pub fn companion_at(&self, z: Pt) -> Result<Pt, SystemError> {
        if !self.is_second_order() {
            return Err(SystemError::RequiresSecondOrder);
        }
        let p = self.g.sqrt_map(z[0])?;
        let pp = self.g.sqrt_map_deriv(z[0])?;
        let q = self.f.sqrt_map(z[1])?;
        let qp = self.f.sqrt_map_deriv(z[1])?;
        if pp == 0.0 || qp == 0.0 {
            return Err(SystemError::Eval(EvalError::DivisionByZero));
        }
        Ok([q / pp, -p / qp])
    }

    /// Pair the system with its `W_s` normalizer.
    pub fn pair(self: &Arc<Self>) -> NormalizerPair {
        NormalizerPair::new(
            NormalizerKind::SeparableWs,
            Field::Ast(self.v.clone()),
            Field::SeparableW(self.clone()),
            CofactorFn::Separable(self.clone()),
        )
    }

    /// Pair the system with the universal normalizer of its Hamiltonian.
    pub fn universal_pair(self: &Arc<Self>) -> NormalizerPair {
        super::universal_pair(&self.hamiltonian())
    }
}
