//! Built-in systems with known oracles.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;

use crate::expr::{Arity, ExprAst};
use crate::plane::Pt;

use super::separable::{build_separable, Leading, SeparableSystem};
use super::{
    build_reparam_center, CofactorFn, Field, NormalizerKind, NormalizerPair, Region, SystemError,
    VectorField,
};

/// Descriptor of one catalog entry, for listings.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// Parameter names with their default values.
    pub params: &'static [(&'static str, f64)],
    pub summary: &'static str,
    /// What is known in closed form about this system, for cross-checking.
    pub oracle: &'static str,
}

const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "harmonic",
        params: &[],
        summary: "linear center x' = y, y' = -x",
        oracle: "isochronous: T = 2*pi on every cycle, all derivatives vanish",
    },
    CatalogEntry {
        name: "duffing",
        params: &[],
        summary: "H = (x^2 + x^4 + y^2)/2, i.e. x' = y, y' = -x - 2x^3",
        oracle: "mu_s(1,0) = -5/9, mu_H(1,0) = -2/3, mu_2(1,0) = 7/27; T decreasing along W_s",
    },
    CatalogEntry {
        name: "cubic",
        params: &[],
        summary: "x' = y, y' = -x + 2x^2 - x^3; central region 0 < H < 1/12",
        oracle: "mu_s singular where x = 1: outer cycles hit the integrand blow-up cap",
    },
    CatalogEntry {
        name: "homog",
        params: &[("k", 2.0)],
        summary: "x' = y^(2k-1), y' = -x^(2k-1)",
        oracle: "W_s = (x/k, y/k), mu_s = 2(1-k)/k constant; scaling T(lz) = l^(2-2k) T(z)",
    },
    CatalogEntry {
        name: "sinsq",
        params: &[],
        summary: "x' = 2 sin y cos y, y' = -2 sin x cos x (G = F = sin^2)",
        oracle: "Gamma = tan x; Gamma''*Gamma = 2 tan^2 x (1 + tan^2 x) >= 0: T is W_s-convex",
    },
    CatalogEntry {
        name: "expcos",
        params: &[],
        summary: "x' = y, y' = -3 sin^3 x * exp(cos^3 x - 3 cos x); degenerate center",
        oracle: "T -> inf at the center and at the boundary: exactly one critical orbit (min)",
    },
    CatalogEntry {
        name: "radial-quartic",
        params: &[],
        summary: "linear center reparametrized by xi = r^2 - r^4 on r < 1",
        oracle: "orbits are circles with T(r) = 2*pi/(r^2 - r^4); critical orbit at r = 1/sqrt(2)",
    },
    CatalogEntry {
        name: "rational-potential",
        params: &[("a", 1.0), ("b", 1.0), ("c", 1.0)],
        summary: "G = P/(1+P) with P = a x^4 + b x^6 + c x^8, F = y^2/2",
        oracle: "one critical orbit when the two coefficient inequalities hold",
    },
    CatalogEntry {
        name: "cor11-j",
        params: &[("a", 1.0), ("b", 1.0), ("c", 1.0)],
        summary: "potential family j: L = 1/(a + b t^4 + c t^8); certificate checks only",
        oracle: "zeta >= 0 on samples iff 5b^2 <= 56ac (with a, b, c > 0)",
    },
    CatalogEntry {
        name: "cor11-jj",
        params: &[("a", 1.0), ("b", 1.0), ("c", 1.0), ("k", 1.0)],
        summary: "G = a t^4k/(1 + b t^2k + c t^6k), F = y^2/2",
        oracle: "zeta >= 0 on samples under 2b^3 k <= 108 a^2 c k + 18 a^2 c + b^3",
    },
];

pub fn catalog() -> &'static [CatalogEntry] {
    ENTRIES
}

/// How a built system is realized.
#[derive(Debug, Clone)]
pub enum SystemModel {
    Separable(Arc<SeparableSystem>),
    Reparam { xi: ExprAst },
    Hamiltonian { h: ExprAst },
    Jacobian(super::JacobianTriple),
    Custom { v: VectorField, w: Option<VectorField> },
    /// A bare potential for the condition-(C) certificate families; it does
    /// not induce a center, so flow-based commands reject it.
    Potential { l: ExprAst },
}

/// A catalog (or config) system ready for analysis.
#[derive(Debug, Clone)]
pub struct BuiltSystem {
    pub name: String,
    pub model: SystemModel,
    pub region: Region,
    pub anchor: Pt,
    pub default_s_range: (f64, f64),
}

impl BuiltSystem {
    /// The flow field `V`.
    pub fn vector_field(&self) -> Result<Field, SystemError> {
        match &self.model {
            SystemModel::Separable(s) => Ok(Field::Ast(s.v().clone())),
            SystemModel::Reparam { xi } => {
                let x = ExprAst::var_x(Arity::Two);
                let y = ExprAst::var_y(Arity::Two);
                Ok(Field::Ast(VectorField::new(
                    y.mul(xi.clone()),
                    x.mul(xi.clone()).neg(),
                )))
            }
            SystemModel::Hamiltonian { h } => Ok(Field::Ast(super::build_hamiltonian(h))),
            SystemModel::Jacobian(t) => Ok(Field::Ast(t.v_psi.clone())),
            SystemModel::Custom { v, .. } => Ok(Field::Ast(v.clone())),
            SystemModel::Potential { .. } => Err(SystemError::BadParameter(
                "this entry is a bare potential; it has no flow".to_string(),
            )),
        }
    }

    /// The preferred normalizer pair of the family.
    pub fn main_pair(&self) -> Result<NormalizerPair, SystemError> {
        match &self.model {
            SystemModel::Separable(s) => Ok(s.pair()),
            SystemModel::Reparam { xi } => build_reparam_center(xi, &self.region),
            SystemModel::Hamiltonian { h } => Ok(super::universal_pair(h)),
            SystemModel::Jacobian(t) => Ok(t.pair()),
            SystemModel::Custom { v, w } => match w {
                Some(w) => Ok(NormalizerPair::new(
                    NormalizerKind::Custom,
                    Field::Ast(v.clone()),
                    Field::Ast(w.clone()),
                    CofactorFn::General,
                )),
                None => Err(SystemError::BadParameter(
                    "custom system has no normalizer W".to_string(),
                )),
            },
            SystemModel::Potential { .. } => Err(SystemError::BadParameter(
                "this entry is a bare potential; it has no normalizer".to_string(),
            )),
        }
    }

    /// Pair with the universal normalizer `∇H/|∇H|²`, when a first integral
    /// is known. For reparametrized centers `H = (x² + y²)/2` is a first
    /// integral and the cofactor comes from the bracket quotient.
    pub fn universal_pair(&self) -> Result<NormalizerPair, SystemError> {
        match &self.model {
            SystemModel::Separable(s) => Ok(s.universal_pair()),
            SystemModel::Hamiltonian { h } => Ok(super::universal_pair(h)),
            SystemModel::Jacobian(_) => {
                Ok(super::universal_pair(&self.hamiltonian().expect("jacobian has H")))
            }
            SystemModel::Reparam { .. } => {
                let h = ExprAst::parse("(x^2 + y^2)/2", Arity::Two).expect("static expression");
                let w = super::build_universal_normalizer(&h);
                Ok(NormalizerPair::new(
                    NormalizerKind::UniversalH,
                    self.vector_field()?,
                    Field::Ast(w),
                    CofactorFn::General,
                ))
            }
            _ => Err(SystemError::BadParameter(
                "no first integral is known for this system".to_string(),
            )),
        }
    }

    pub fn hamiltonian(&self) -> Option<ExprAst> {
        match &self.model {
            SystemModel::Separable(s) => Some(s.hamiltonian()),
            SystemModel::Hamiltonian { h } => Some(h.clone()),
            SystemModel::Reparam { .. } => {
                Some(ExprAst::parse("(x^2 + y^2)/2", Arity::Two).expect("static expression"))
            }
            SystemModel::Jacobian(t) => {
                let two = ExprAst::constant(2.0, Arity::Two);
                Some(t.p.clone().pow(2).add(t.q.clone().pow(2)).div(two))
            }
            _ => None,
        }
    }

    pub fn separable(&self) -> Option<&Arc<SeparableSystem>> {
        match &self.model {
            SystemModel::Separable(s) => Some(s),
            _ => None,
        }
    }

    pub fn potential(&self) -> Option<&ExprAst> {
        match &self.model {
            SystemModel::Potential { l } => Some(l),
            _ => None,
        }
    }
}

fn pot(src: &str) -> ExprAst {
    ExprAst::parse(src, Arity::One).expect("static catalog expression")
}

fn take_params(
    name: &str,
    entry: &CatalogEntry,
    given: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>, SystemError> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for (key, default) in entry.params {
        out.insert((*key).to_string(), *default);
    }
    for (key, value) in given {
        if !out.contains_key(key.as_str()) {
            return Err(SystemError::BadParameter(format!(
                "system `{name}` has no parameter `{key}`"
            )));
        }
        out.insert(key.clone(), *value);
    }
    Ok(out)
}

/// Build a catalog system by name, with parameter overrides.
pub fn build_system(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<BuiltSystem, SystemError> {
    let entry = ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| SystemError::UnknownSystem(name.to_string()))?;
    let p = take_params(name, entry, params)?;
    let quadratic = Leading { order: 2, coefficient: 0.5 };

    let built = match name {
        "harmonic" => {
            let f = pot("t^2/2");
            let region = Region::Rect { x: (-3.0, 3.0), y: (-3.0, 3.0) };
            let s = build_separable(&f, &f, quadratic, quadratic, region.clone())?;
            BuiltSystem {
                name: name.to_string(),
                model: SystemModel::Separable(s),
                region,
                anchor: [1.0, 0.0],
                default_s_range: (0.0, 1.0),
            }
        }
        "duffing" => {
            let region = Region::Rect { x: (-2.5, 2.5), y: (-3.5, 3.5) };
            let s = build_separable(
                &pot("t^2/2"),
                &pot("(t^2 + t^4)/2"),
                quadratic,
                quadratic,
                region.clone(),
            )?;
            BuiltSystem {
                name: name.to_string(),
                model: SystemModel::Separable(s),
                region,
                anchor: [1.0, 0.0],
                default_s_range: (0.0, 1.0),
            }
        }
        "cubic" => {
            // declared region restricted to the inner annulus: G' vanishes at x = 1
            let region = Region::Rect { x: (-0.33, 0.97), y: (-0.41, 0.41) };
            let s = build_separable(
                &pot("t^2/2"),
                &pot("t^2/2 - 2*t^3/3 + t^4/4"),
                quadratic,
                quadratic,
                region.clone(),
            )?;
            BuiltSystem {
                name: name.to_string(),
                model: SystemModel::Separable(s),
                region,
                anchor: [0.3, 0.0],
                default_s_range: (0.0, 0.3),
            }
        }
        "homog" => {
            let k = p["k"];
            if k < 1.0 || k % 1.0 != 0.0 || k > 6.0 {
                return Err(SystemError::BadParameter(format!(
                    "homog requires integer k in 1..=6, got {k}"
                )));
            }
            let ki = k as i32;
            let src = format!("t^{}/{}", 2 * ki, 2 * ki);
            let lead = Leading { order: 2 * ki as usize, coefficient: 1.0 / (2.0 * k) };
            let region = Region::Rect { x: (-1.4, 1.4), y: (-1.4, 1.4) };
            let s = build_separable(&pot(&src), &pot(&src), lead, lead, region.clone())?;
            BuiltSystem {
                name: format!("homog(k={ki})"),
                model: SystemModel::Separable(s),
                region,
                anchor: [1.0, 0.0],
                default_s_range: (0.0, 1.0),
            }
        }
        "sinsq" => {
            let lead = Leading { order: 2, coefficient: 1.0 };
            let g = pot("sin(t)^2");
            let region = Region::Rect { x: (-1.55, 1.55), y: (-1.55, 1.55) };
            let s = build_separable(&g, &g, lead, lead, region.clone())?;
            BuiltSystem {
                name: name.to_string(),
                model: SystemModel::Separable(s),
                region,
                anchor: [0.7, 0.0],
                default_s_range: (0.0, 0.3),
            }
        }
        "expcos" => {
            let lead = Leading { order: 4, coefficient: 0.75 * crate::math::exp(-2.0) };
            let region = Region::Rect { x: (-3.04, 3.04), y: (-3.9, 3.9) };
            let s = build_separable(
                &pot("t^2/2"),
                &pot("exp(cos(t)^3 - 3*cos(t))"),
                quadratic,
                lead,
                region.clone(),
            )?;
            // along W_s the energy grows as G(x(s)) = G(x₀)e^{2s}, so the
            // boundary at x = π is reached at s ≈ 3.9893; the default stops
            // at x ≈ 2.93 where T already exceeds twice the minimal period
            BuiltSystem {
                name: name.to_string(),
                model: SystemModel::Separable(s),
                region,
                anchor: [0.4, 0.0],
                default_s_range: (0.0, 3.9885),
            }
        }
        "radial-quartic" => {
            let xi = ExprAst::parse("(x^2 + y^2) - (x^2 + y^2)^2", Arity::Two)
                .expect("static catalog expression");
            let region = Region::Disk { center: [0.0, 0.0], radius: 0.97 };
            // validates xi > 0 on the probes
            build_reparam_center(&xi, &region)?;
            BuiltSystem {
                name: name.to_string(),
                model: SystemModel::Reparam { xi },
                region,
                anchor: [0.3, 0.0],
                default_s_range: (0.0, 1.15),
            }
        }
        "rational-potential" => {
            let (a, b, c) = (p["a"], p["b"], p["c"]);
            if a < 0.0 || b < 0.0 || c < 0.0 || a * b * c == 0.0 {
                return Err(SystemError::BadParameter(format!(
                    "rational-potential requires a, b, c >= 0 with abc != 0, got ({a}, {b}, {c})"
                )));
            }
            let g = pot(&format!(
                "({a}*t^4 + {b}*t^6 + {c}*t^8)/(1 + {a}*t^4 + {b}*t^6 + {c}*t^8)"
            ));
            let lead = Leading { order: 4, coefficient: a };
            let region = Region::Rect { x: (-3.5, 3.5), y: (-1.4, 1.4) };
            let s = build_separable(&pot("t^2/2"), &g, quadratic, lead, region.clone())?;
            // the s-parameter saturates at ½·ln(1/G(x₀)) ≈ 2.74 for the
            // default anchor as G approaches its limit 1
            BuiltSystem {
                name: format!("rational-potential({a},{b},{c})"),
                model: SystemModel::Separable(s),
                region,
                anchor: [0.25, 0.0],
                default_s_range: (0.0, 2.70),
            }
        }
        "cor11-j" => {
            let (a, b, c) = (p["a"], p["b"], p["c"]);
            if a <= 0.0 || b <= 0.0 || c <= 0.0 {
                return Err(SystemError::BadParameter(format!(
                    "cor11-j requires a, b, c > 0, got ({a}, {b}, {c})"
                )));
            }
            let l = pot(&format!("1/({a} + {b}*t^4 + {c}*t^8)"));
            BuiltSystem {
                name: format!("cor11-j({a},{b},{c})"),
                model: SystemModel::Potential { l },
                region: Region::Rect { x: (-2.0, 2.0), y: (-1.0, 1.0) },
                anchor: [0.5, 0.0],
                default_s_range: (0.0, 1.0),
            }
        }
        "cor11-jj" => {
            let (a, b, c, k) = (p["a"], p["b"], p["c"], p["k"]);
            if a <= 0.0 || b <= 0.0 || c <= 0.0 || k < 1.0 || k % 1.0 != 0.0 {
                return Err(SystemError::BadParameter(format!(
                    "cor11-jj requires a, b, c > 0 and integer k >= 1, got ({a}, {b}, {c}, {k})"
                )));
            }
            let ki = k as i32;
            let g = pot(&format!(
                "{a}*t^{}/(1 + {b}*t^{} + {c}*t^{})",
                4 * ki,
                2 * ki,
                6 * ki
            ));
            let lead = Leading { order: 4 * ki as usize, coefficient: a };
            let region = Region::Rect { x: (-1.1, 1.1), y: (-1.2, 1.2) };
            let s = build_separable(&pot("t^2/2"), &g, quadratic, lead, region.clone())?;
            BuiltSystem {
                name: format!("cor11-jj({a},{b},{c},k={ki})"),
                model: SystemModel::Separable(s),
                region,
                anchor: [0.5, 0.0],
                default_s_range: (0.0, 0.9),
            }
        }
        _ => unreachable!("entry list and builder are in sync"),
    };
    Ok(built)
}
