//! Vector fields, normalizer pairs and the system families they come from.
//!
//! A `NormalizerPair` bundles a system `V` with a transversal field `W`
//! satisfying `[V, W] = μV` and a provider for the cofactor `μ`. The pair is
//! what the quadrature and analysis layers consume; where the cofactor has a
//! closed form it is carried along and cross-checked against the general
//! bracket quotient `([V,W]·V)/|V|²`.

mod catalog;
pub mod separable;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{Arity, EvalError, ExprAst, Var};
use crate::jet::Jet2;
use crate::plane::{self, Pt};

pub use catalog::{catalog, build_system, BuiltSystem, CatalogEntry, SystemModel};
pub use separable::{Leading, SeparableSystem};

/// Points with |V| at or below this are treated as stationary.
pub const EPS_STATIONARY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SystemError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("stationary point at ({x}, {y})", x = .0[0], y = .0[1])]
    StationaryPoint(Pt),
    #[error("{what} must be positive, got {value} at ({x}, {y})", x = at[0], y = at[1])]
    NotPositive { what: &'static str, at: Pt, value: f64 },
    #[error("fields are not transversal at ({x}, {y}): wedge = {wedge}", x = at[0], y = at[1])]
    NotTransversal { at: Pt, wedge: f64 },
    #[error("[V, W] is not parallel to V at ({x}, {y}): residual = {residual}", x = at[0], y = at[1])]
    NotNormalizer { at: Pt, residual: f64 },
    #[error("declared leading order {declared} is invalid: {reason}")]
    LeadingOrder { declared: usize, reason: &'static str },
    #[error("declared leading coefficient {declared} does not match the expansion ({found})")]
    LeadingCoefficient { declared: f64, found: f64 },
    #[error("potential slope condition t·L'(t) > 0 fails at t = {at}; restrict the region")]
    PotentialSlope { at: f64 },
    #[error("operation requires a non-degenerate separable system (quadratic leading orders)")]
    RequiresSecondOrder,
    #[error("unknown catalog system `{0}`")]
    UnknownSystem(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

/// A rectangular or disk-shaped region of the plane used for probe sampling,
/// certificate grids and orbit containment checks.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Rect { x: (f64, f64), y: (f64, f64) },
    Disk { center: Pt, radius: f64 },
}

impl Region {
    pub fn contains(&self, z: Pt) -> bool {
        match self {
            Region::Rect { x, y } => z[0] >= x.0 && z[0] <= x.1 && z[1] >= y.0 && z[1] <= y.1,
            Region::Disk { center, radius } => plane::dist(z, *center) <= *radius,
        }
    }

    /// Axis-aligned bounding intervals (the `N_O^x × N_O^y` projections).
    pub fn projections(&self) -> ((f64, f64), (f64, f64)) {
        match self {
            Region::Rect { x, y } => (*x, *y),
            Region::Disk { center, radius } => (
                (center[0] - radius, center[0] + radius),
                (center[1] - radius, center[1] + radius),
            ),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Pt {
        match self {
            Region::Rect { x, y } => {
                [rng.gen_range(x.0..=x.1), rng.gen_range(y.0..=y.1)]
            }
            Region::Disk { center, radius } => loop {
                let p = [
                    rng.gen_range(-radius..=*radius),
                    rng.gen_range(-radius..=*radius),
                ];
                if plane::norm(p) <= *radius {
                    return [center[0] + p[0], center[1] + p[1]];
                }
            },
        }
    }
}

/// Deterministic probe points for invariant checks: `count` samples drawn
/// from the region with a fixed-seed generator.
pub fn probe_points(region: &Region, count: usize, seed: u64) -> Vec<Pt> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| region.sample(&mut rng)).collect()
}

/// A planar vector field given by two expression components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub v1: ExprAst,
    pub v2: ExprAst,
}

impl VectorField {
    pub fn new(v1: ExprAst, v2: ExprAst) -> Self {
        assert!(matches!(v1.arity(), Arity::Two) && matches!(v2.arity(), Arity::Two));
        VectorField { v1, v2 }
    }

    pub fn at(&self, z: Pt) -> Result<Pt, EvalError> {
        Ok([self.v1.eval2(z)?, self.v2.eval2(z)?])
    }

    pub fn jets(&self, z: Pt, order: usize) -> Result<[Jet2; 2], EvalError> {
        Ok([self.v1.jet2(z, order)?, self.v2.jet2(z, order)?])
    }
}

/// Pointwise evaluation interface used by the flow integrator.
pub trait PointField {
    fn at(&self, z: Pt) -> Result<Pt, EvalError>;
}

impl PointField for VectorField {
    fn at(&self, z: Pt) -> Result<Pt, EvalError> {
        VectorField::at(self, z)
    }
}

impl<F: Fn(Pt) -> Result<Pt, EvalError>> PointField for F {
    fn at(&self, z: Pt) -> Result<Pt, EvalError> {
        self(z)
    }
}

/// A field that is also jet-evaluable: either a pair of expression ASTs or
/// the separable normalizer `(Γ(x), Φ(y))`, whose components need the
/// axis-limit series.
#[derive(Debug, Clone)]
pub enum Field {
    Ast(VectorField),
    SeparableW(Arc<SeparableSystem>),
}

impl Field {
    pub fn at(&self, z: Pt) -> Result<Pt, EvalError> {
        match self {
            Field::Ast(f) => f.at(z),
            Field::SeparableW(s) => s.w_at(z),
        }
    }

    pub fn jets(&self, z: Pt, order: usize) -> Result<[Jet2; 2], EvalError> {
        match self {
            Field::Ast(f) => f.jets(z, order),
            Field::SeparableW(s) => s.w_jets(z, order),
        }
    }
}

impl PointField for Field {
    fn at(&self, z: Pt) -> Result<Pt, EvalError> {
        Field::at(self, z)
    }
}

/// How a pair was constructed; fixes which conventions apply downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizerKind {
    SeparableWs,
    UniversalH,
    Commuting,
    Reparam,
    JacobianWdelta,
    Custom,
}

/// Cofactor provider attached to a pair.
#[derive(Debug, Clone)]
pub enum CofactorFn {
    /// Commuting pair, μ ≡ 0.
    Zero,
    /// Closed-form expression.
    Ast(ExprAst),
    /// `Γ'(x) + Φ'(y) − 2` through the axis-stable series.
    Separable(Arc<SeparableSystem>),
    /// Computed from the bracket quotient `([V,W]·V)/|V|²` with jets.
    General,
}

/// A system `V` bundled with a transversal normalizer `W` and its cofactor.
#[derive(Debug, Clone)]
pub struct NormalizerPair {
    kind: NormalizerKind,
    v: Field,
    w: Field,
    mu: CofactorFn,
    /// Closed-form C-factor `m` with `[mV, W] = 0`, when one is known.
    c_factor: Option<ExprAst>,
}

impl NormalizerPair {
    pub fn new(kind: NormalizerKind, v: Field, w: Field, mu: CofactorFn) -> Self {
        NormalizerPair { kind, v, w, mu, c_factor: None }
    }

    pub fn with_c_factor(mut self, m: ExprAst) -> Self {
        self.c_factor = Some(m);
        self
    }

    pub fn kind(&self) -> NormalizerKind {
        self.kind
    }

    pub fn v(&self) -> &Field {
        &self.v
    }

    pub fn w(&self) -> &Field {
        &self.w
    }

    pub fn c_factor(&self) -> Option<&ExprAst> {
        self.c_factor.as_ref()
    }

    /// Cofactor value at `z`.
    pub fn mu(&self, z: Pt) -> Result<f64, SystemError> {
        match &self.mu {
            CofactorFn::Zero => Ok(0.0),
            CofactorFn::Ast(ast) => Ok(ast.eval2(z)?),
            CofactorFn::Separable(s) => Ok(s.mu_at(z)?),
            CofactorFn::General => n_cofactor(&self.v, &self.w, z),
        }
    }

    /// Jet of the cofactor at `z`, as needed by the recursion.
    pub fn mu_jet(&self, z: Pt, order: usize) -> Result<Jet2, SystemError> {
        match &self.mu {
            CofactorFn::Zero => Ok(Jet2::constant(0.0, z, order)),
            CofactorFn::Ast(ast) => Ok(ast.jet2(z, order)?),
            CofactorFn::Separable(s) => Ok(s.mu_jet(z, order)?),
            CofactorFn::General => general_cofactor_jet(&self.v, &self.w, z, order),
        }
    }

    /// Check transversality and the normalizer identity `[V,W] = μV` at each
    /// probe point, with residual tolerance `tol` relative to `1 + |[V,W]|`.
    pub fn validate(&self, points: &[Pt], tol: f64) -> Result<(), SystemError> {
        for &z in points {
            let vv = self.v.at(z)?;
            let wv = self.w.at(z)?;
            let wedge = plane::wedge(vv, wv);
            let scale = plane::norm(vv) * plane::norm(wv);
            if wedge.abs() <= 1e-12 * (1.0 + scale) {
                return Err(SystemError::NotTransversal { at: z, wedge });
            }
            let b = lie_bracket(&self.v, &self.w, z)?;
            let mu = self.mu(z)?;
            let residual =
                plane::norm([b[0] - mu * vv[0], b[1] - mu * vv[1]]);
            if residual > tol * (1.0 + plane::norm(b)) {
                return Err(SystemError::NotNormalizer { at: z, residual });
            }
        }
        Ok(())
    }
}

/// Lie bracket `[V, W] = ∂_V W − ∂_W V` evaluated at `z`:
/// `J_W(z)·V(z) − J_V(z)·W(z)`.
pub fn lie_bracket(v: &Field, w: &Field, z: Pt) -> Result<Pt, SystemError> {
    let [v1, v2] = v.jets(z, 1)?;
    let [w1, w2] = w.jets(z, 1)?;
    let (vv, wv) = ([v1.value(), v2.value()], [w1.value(), w2.value()]);
    let b1 = w1.partial(1, 0) * vv[0] + w1.partial(0, 1) * vv[1]
        - v1.partial(1, 0) * wv[0]
        - v1.partial(0, 1) * wv[1];
    let b2 = w2.partial(1, 0) * vv[0] + w2.partial(0, 1) * vv[1]
        - v2.partial(1, 0) * wv[0]
        - v2.partial(0, 1) * wv[1];
    Ok([b1, b2])
}

/// The N-cofactor `μ = ([V,W]·V)/|V|²`.
pub fn n_cofactor(v: &Field, w: &Field, z: Pt) -> Result<f64, SystemError> {
    let vv = v.at(z)?;
    let n2 = plane::norm2(vv);
    if n2 <= EPS_STATIONARY * EPS_STATIONARY {
        return Err(SystemError::StationaryPoint(z));
    }
    let b = lie_bracket(v, w, z)?;
    Ok(plane::dot(b, vv) / n2)
}

/// Wedge `V₁W₂ − V₂W₁`; zero means the fields are not transversal at `z`.
pub fn transversality(v: &Field, w: &Field, z: Pt) -> Result<f64, SystemError> {
    Ok(plane::wedge(v.at(z)?, w.at(z)?))
}

/// Jet of the bracket quotient at `z`; consumes jets of `V` and `W` one
/// order higher than requested.
fn general_cofactor_jet(v: &Field, w: &Field, z: Pt, order: usize) -> Result<Jet2, SystemError> {
    let [v1, v2] = v.jets(z, order + 1)?;
    let [w1, w2] = w.jets(z, order + 1)?;
    let n2 = v1.value() * v1.value() + v2.value() * v2.value();
    if n2 <= EPS_STATIONARY * EPS_STATIONARY {
        return Err(SystemError::StationaryPoint(z));
    }
    let b1 = w1
        .dx()
        .mul(&v1)
        .add(&w1.dy().mul(&v2))
        .sub(&v1.dx().mul(&w1))
        .sub(&v1.dy().mul(&w2));
    let b2 = w2
        .dx()
        .mul(&v1)
        .add(&w2.dy().mul(&v2))
        .sub(&v2.dx().mul(&w1))
        .sub(&v2.dy().mul(&w2));
    let num = b1.mul(&v1).add(&b2.mul(&v2));
    let den = v1.mul(&v1).add(&v2.mul(&v2));
    Ok(num.div(&den.truncate(num.order()))?)
}

/// Hamiltonian vector field `(H_y, −H_x)` by symbolic differentiation.
pub fn build_hamiltonian(h: &ExprAst) -> VectorField {
    VectorField::new(h.derivative(Var::Y), h.derivative(Var::X).neg())
}

/// The normalizer `∇H/|∇H|²`; along it `H` itself advances at unit rate, so
/// the induced cycle parameter is the energy.
pub fn build_universal_normalizer(h: &ExprAst) -> VectorField {
    let hx = h.derivative(Var::X);
    let hy = h.derivative(Var::Y);
    let grad2 = hx.clone().pow(2).add(hy.clone().pow(2));
    VectorField::new(hx.div(grad2.clone()), hy.div(grad2))
}

/// Closed-form cofactor of the universal normalizer:
/// `((H_yy − H_xx)H_x² − 4H_xy H_x H_y + (H_xx − H_yy)H_y²)/|∇H|⁴`.
pub fn universal_cofactor_ast(h: &ExprAst) -> ExprAst {
    let hx = h.derivative(Var::X);
    let hy = h.derivative(Var::Y);
    let hxx = hx.derivative(Var::X);
    let hxy = hx.derivative(Var::Y);
    let hyy = hy.derivative(Var::Y);
    let term1 = hyy.clone().sub(hxx.clone()).mul(hx.clone().pow(2));
    let term2 = ExprAst::constant(4.0, Arity::Two)
        .mul(hxy)
        .mul(hx.clone())
        .mul(hy.clone());
    let term3 = hxx.sub(hyy).mul(hy.clone().pow(2));
    let grad4 = hx.pow(2).add(hy.pow(2)).pow(2);
    term1.sub(term2).add(term3).div(grad4)
}

/// Pair a Hamiltonian system with its universal normalizer and the
/// closed-form cofactor.
pub fn universal_pair(h: &ExprAst) -> NormalizerPair {
    NormalizerPair::new(
        NormalizerKind::UniversalH,
        Field::Ast(build_hamiltonian(h)),
        Field::Ast(build_universal_normalizer(h)),
        CofactorFn::Ast(universal_cofactor_ast(h)),
    )
}

/// Reparametrized linear center `(yξ, −xξ)` with normalizer `W = (x, y)`,
/// cofactor `μ = −∂_W ξ/ξ` and C-factor `m = 1/ξ`. Requires `ξ > 0` at the
/// fixed-seed probe points of `region`.
pub fn build_reparam_center(xi: &ExprAst, region: &Region) -> Result<NormalizerPair, SystemError> {
    assert!(matches!(xi.arity(), Arity::Two));
    for z in probe_points(region, 32, PROBE_SEED) {
        let val = xi.eval2(z)?;
        if val <= 0.0 {
            return Err(SystemError::NotPositive { what: "xi", at: z, value: val });
        }
    }
    let x = ExprAst::var_x(Arity::Two);
    let y = ExprAst::var_y(Arity::Two);
    let v = VectorField::new(y.clone().mul(xi.clone()), x.clone().mul(xi.clone()).neg());
    let w = VectorField::new(x.clone(), y.clone());
    // ∂_W ξ = x ξ_x + y ξ_y (the Euler operator for W = (x, y))
    let xi_w = x.mul(xi.derivative(Var::X)).add(y.mul(xi.derivative(Var::Y)));
    let mu = xi_w.div(xi.clone()).neg();
    let m = ExprAst::constant(1.0, Arity::Two).div(xi.clone());
    Ok(NormalizerPair::new(NormalizerKind::Reparam, Field::Ast(v), Field::Ast(w), CofactorFn::Ast(mu))
        .with_c_factor(m))
}

/// The three fields attached to a jacobian map `Ψ = (P, Q)`: the Hamiltonian
/// field of `2H = |Ψ|²`, its division by `δ = det J_Ψ`, and the commuting
/// normalizer; the C-factor is `m = 1/δ`.
#[derive(Debug, Clone)]
pub struct JacobianTriple {
    pub p: ExprAst,
    pub q: ExprAst,
    pub delta: ExprAst,
    pub v_psi: VectorField,
    pub v_delta: VectorField,
    pub w_delta: VectorField,
}

/// Requires `δ > 0` at the fixed-seed probe points of `region`.
pub fn build_jacobian_triple(
    p: &ExprAst,
    q: &ExprAst,
    region: &Region,
) -> Result<JacobianTriple, SystemError> {
    let px = p.derivative(Var::X);
    let py = p.derivative(Var::Y);
    let qx = q.derivative(Var::X);
    let qy = q.derivative(Var::Y);
    let delta = px.clone().mul(qy.clone()).sub(py.clone().mul(qx.clone()));
    for z in probe_points(region, 32, PROBE_SEED) {
        let val = delta.eval2(z)?;
        if val <= 0.0 {
            return Err(SystemError::NotPositive { what: "delta", at: z, value: val });
        }
    }
    let v1 = p.clone().mul(py.clone()).add(q.clone().mul(qy.clone()));
    let v2 = p.clone().mul(px.clone()).add(q.clone().mul(qx.clone())).neg();
    let v_psi = VectorField::new(v1.clone(), v2.clone());
    let v_delta = VectorField::new(v1.div(delta.clone()), v2.div(delta.clone()));
    let w1 = p.clone().mul(qy).sub(q.clone().mul(py)).div(delta.clone());
    let w2 = q.clone().mul(px).sub(p.clone().mul(qx)).div(delta.clone());
    let w_delta = VectorField::new(w1, w2);
    Ok(JacobianTriple { p: p.clone(), q: q.clone(), delta, v_psi, v_delta, w_delta })
}

impl JacobianTriple {
    /// Normalizer pair `(V_Ψ, W_δ)` with cofactor `−∂_{W_δ}(ln δ)`.
    pub fn pair(&self) -> NormalizerPair {
        let dx = self.delta.derivative(Var::X);
        let dy = self.delta.derivative(Var::Y);
        let mu = self
            .w_delta
            .v1
            .clone()
            .mul(dx)
            .add(self.w_delta.v2.clone().mul(dy))
            .div(self.delta.clone())
            .neg();
        let m = ExprAst::constant(1.0, Arity::Two).div(self.delta.clone());
        NormalizerPair::new(
            NormalizerKind::JacobianWdelta,
            Field::Ast(self.v_psi.clone()),
            Field::Ast(self.w_delta.clone()),
            CofactorFn::Ast(mu),
        )
        .with_c_factor(m)
    }
}

pub(crate) const PROBE_SEED: u64 = 0x5eed_a55;
