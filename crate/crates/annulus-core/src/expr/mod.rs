//! Scalar expressions in one or two variables.
//!
//! The grammar is plain infix with precedence `^` > unary `-` > `*`,`/` >
//! `+`,`-`; functions are called as `name(expr)` with `sin`, `cos`, `exp`,
//! `ln`, `sqrt`, `sign` available. Two-variable expressions use `x` and `y`,
//! one-variable expressions use `t`. Power exponents must be integer
//! literals (possibly negative): every expression denotes a composition of
//! rational, trigonometric and exponential pieces, which is what the jet
//! evaluator supports.

mod parse;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::jet::{Jet1, Jet2};
use crate::math;
use crate::plane::Pt;

pub use parse::ParseError;

/// Number of variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    One,
    Two,
}

impl Arity {
    pub fn count(self) -> usize {
        match self {
            Arity::One => 1,
            Arity::Two => 2,
        }
    }
}

/// Variable index; arity-1 expressions use only `X` (spelled `t`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X = 0,
    Y = 1,
}

impl Var {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fun {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Sign,
}

impl Fun {
    fn name(self) -> &'static str {
        match self {
            Fun::Sin => "sin",
            Fun::Cos => "cos",
            Fun::Exp => "exp",
            Fun::Ln => "ln",
            Fun::Sqrt => "sqrt",
            Fun::Sign => "sign",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    /// Integer power, computed by repeated squaring.
    Pow(Box<Node>, i32),
    Fun(Fun, Box<Node>),
}

/// Errors raised while evaluating an expression (pointwise or in jets).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("ln of non-positive value {0}")]
    LogNonPositive(f64),
    #[error("sqrt of negative value {0}")]
    SqrtNegative(f64),
    #[error("sqrt of zero has no finite derivatives")]
    SqrtZeroJet,
    #[error("derivative of sign requested at zero")]
    SignAtZero,
    #[error("non-finite value encountered")]
    NonFinite,
}

/// A parsed scalar expression together with its declared arity.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    arity: Arity,
    root: Node,
}

impl ExprAst {
    /// Parse `source` as an expression in `arity` variables.
    pub fn parse(source: &str, arity: Arity) -> Result<Self, ParseError> {
        parse::parse(source, arity)
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn constant(value: f64, arity: Arity) -> Self {
        ExprAst { arity, root: Node::Const(value) }
    }

    /// The variable `x` (or `t` for arity one).
    pub fn var_x(arity: Arity) -> Self {
        ExprAst { arity, root: Node::Var(Var::X) }
    }

    /// The variable `y`; panics for arity one.
    pub fn var_y(arity: Arity) -> Self {
        assert!(matches!(arity, Arity::Two), "y is only available in two-variable expressions");
        ExprAst { arity, root: Node::Var(Var::Y) }
    }

    fn combine(self, other: ExprAst, f: impl FnOnce(Node, Node) -> Node) -> ExprAst {
        assert!(self.arity == other.arity, "arity mismatch in expression combinator");
        ExprAst { arity: self.arity, root: f(self.root, other.root) }
    }

    pub fn add(self, other: ExprAst) -> ExprAst {
        self.combine(other, fold_add)
    }

    pub fn sub(self, other: ExprAst) -> ExprAst {
        self.combine(other, fold_sub)
    }

    pub fn mul(self, other: ExprAst) -> ExprAst {
        self.combine(other, fold_mul)
    }

    pub fn div(self, other: ExprAst) -> ExprAst {
        self.combine(other, fold_div)
    }

    pub fn pow(self, exponent: i32) -> ExprAst {
        ExprAst { arity: self.arity, root: fold_pow(self.root, exponent) }
    }

    pub fn neg(self) -> ExprAst {
        ExprAst { arity: self.arity, root: fold_neg(self.root) }
    }

    pub fn apply(self, fun: Fun) -> ExprAst {
        ExprAst { arity: self.arity, root: Node::Fun(fun, Box::new(self.root)) }
    }

    /// Symbolic derivative with respect to `var`, with basic constant folding.
    ///
    /// `sign` is treated as locally constant (derivative zero): derivative
    /// paths of the library never cross its jump.
    pub fn derivative(&self, var: Var) -> ExprAst {
        ExprAst { arity: self.arity, root: deriv(&self.root, var) }
    }

    /// Re-read a one-variable expression as a two-variable one, with the
    /// single variable renamed to `axis`.
    pub fn lift(&self, axis: Var) -> ExprAst {
        assert!(matches!(self.arity, Arity::One), "lift applies to one-variable expressions");
        ExprAst { arity: Arity::Two, root: lift_node(&self.root, axis) }
    }

    /// Pointwise evaluation of a two-variable expression.
    pub fn eval2(&self, z: Pt) -> Result<f64, EvalError> {
        debug_assert!(matches!(self.arity, Arity::Two));
        eval_node(&self.root, &z)
    }

    /// Pointwise evaluation of a one-variable expression.
    pub fn eval1(&self, t: f64) -> Result<f64, EvalError> {
        debug_assert!(matches!(self.arity, Arity::One));
        eval_node(&self.root, &[t, 0.0])
    }

    /// Truncated Taylor expansion at `z` carrying all partial derivatives up
    /// to total order `order`. At order 0 this reproduces [`Self::eval2`]
    /// exactly (same floating-point operations).
    pub fn jet2(&self, z: Pt, order: usize) -> Result<Jet2, EvalError> {
        debug_assert!(matches!(self.arity, Arity::Two));
        jet2_node(&self.root, z, order)
    }

    /// One-variable counterpart of [`Self::jet2`].
    pub fn jet1(&self, t0: f64, order: usize) -> Result<Jet1, EvalError> {
        debug_assert!(matches!(self.arity, Arity::One));
        jet1_node(&self.root, t0, order)
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: &[&str] = match self.arity {
            Arity::One => &["t", "t"],
            Arity::Two => &["x", "y"],
        };
        write!(f, "{}", display_node(&self.root, names, 0))
    }
}

fn eval_node(n: &Node, v: &Pt) -> Result<f64, EvalError> {
    Ok(match n {
        Node::Const(c) => *c,
        Node::Var(x) => v[x.index()],
        Node::Neg(a) => -eval_node(a, v)?,
        Node::Add(a, b) => eval_node(a, v)? + eval_node(b, v)?,
        Node::Sub(a, b) => eval_node(a, v)? - eval_node(b, v)?,
        Node::Mul(a, b) => eval_node(a, v)? * eval_node(b, v)?,
        Node::Div(a, b) => {
            let d = eval_node(b, v)?;
            if d == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            eval_node(a, v)? / d
        }
        Node::Pow(a, k) => {
            let base = eval_node(a, v)?;
            if base == 0.0 && *k < 0 {
                return Err(EvalError::DivisionByZero);
            }
            math::powi(base, *k)
        }
        Node::Fun(fun, a) => {
            let x = eval_node(a, v)?;
            match fun {
                Fun::Sin => math::sin(x),
                Fun::Cos => math::cos(x),
                Fun::Exp => math::exp(x),
                Fun::Ln => {
                    if x <= 0.0 {
                        return Err(EvalError::LogNonPositive(x));
                    }
                    math::ln(x)
                }
                Fun::Sqrt => {
                    if x < 0.0 {
                        return Err(EvalError::SqrtNegative(x));
                    }
                    math::sqrt(x)
                }
                Fun::Sign => math::sign(x),
            }
        }
    })
}

fn jet2_node(n: &Node, z: Pt, order: usize) -> Result<Jet2, EvalError> {
    Ok(match n {
        Node::Const(c) => Jet2::constant(*c, z, order),
        Node::Var(Var::X) => Jet2::variable_x(z, order),
        Node::Var(Var::Y) => Jet2::variable_y(z, order),
        Node::Neg(a) => jet2_node(a, z, order)?.neg(),
        Node::Add(a, b) => jet2_node(a, z, order)?.add(&jet2_node(b, z, order)?),
        Node::Sub(a, b) => jet2_node(a, z, order)?.sub(&jet2_node(b, z, order)?),
        Node::Mul(a, b) => jet2_node(a, z, order)?.mul(&jet2_node(b, z, order)?),
        Node::Div(a, b) => jet2_node(a, z, order)?.div(&jet2_node(b, z, order)?)?,
        Node::Pow(a, k) => jet2_node(a, z, order)?.powi(*k)?,
        Node::Fun(fun, a) => {
            let u = jet2_node(a, z, order)?;
            match fun {
                Fun::Sin => u.sin(),
                Fun::Cos => u.cos(),
                Fun::Exp => u.exp(),
                Fun::Ln => u.ln()?,
                Fun::Sqrt => u.sqrt()?,
                Fun::Sign => u.sign()?,
            }
        }
    })
}

fn jet1_node(n: &Node, t0: f64, order: usize) -> Result<Jet1, EvalError> {
    Ok(match n {
        Node::Const(c) => Jet1::constant(*c, t0, order),
        Node::Var(_) => Jet1::variable(t0, order),
        Node::Neg(a) => jet1_node(a, t0, order)?.neg(),
        Node::Add(a, b) => jet1_node(a, t0, order)?.add(&jet1_node(b, t0, order)?),
        Node::Sub(a, b) => jet1_node(a, t0, order)?.sub(&jet1_node(b, t0, order)?),
        Node::Mul(a, b) => jet1_node(a, t0, order)?.mul(&jet1_node(b, t0, order)?),
        Node::Div(a, b) => jet1_node(a, t0, order)?.div(&jet1_node(b, t0, order)?)?,
        Node::Pow(a, k) => jet1_node(a, t0, order)?.powi(*k)?,
        Node::Fun(fun, a) => {
            let u = jet1_node(a, t0, order)?;
            match fun {
                Fun::Sin => u.sin(),
                Fun::Cos => u.cos(),
                Fun::Exp => u.exp(),
                Fun::Ln => u.ln()?,
                Fun::Sqrt => u.sqrt()?,
                Fun::Sign => u.sign()?,
            }
        }
    })
}

// Smart constructors used by the parser, the combinators and the symbolic
// derivative. Only total arithmetic identities are folded.

fn is_zero(n: &Node) -> bool {
    matches!(n, Node::Const(c) if *c == 0.0)
}

fn is_one(n: &Node) -> bool {
    matches!(n, Node::Const(c) if *c == 1.0)
}

fn fold_add(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => Node::Const(x + y),
        (a, b) if is_zero(&a) => b,
        (a, b) if is_zero(&b) => a,
        (a, b) => Node::Add(Box::new(a), Box::new(b)),
    }
}

fn fold_sub(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => Node::Const(x - y),
        (a, b) if is_zero(&b) => a,
        (a, b) if is_zero(&a) => fold_neg(b),
        (a, b) => Node::Sub(Box::new(a), Box::new(b)),
    }
}

fn fold_mul(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => Node::Const(x * y),
        (a, b) if is_zero(&a) || is_one(&b) => a,
        (a, b) if is_zero(&b) || is_one(&a) => b,
        (a, b) => Node::Mul(Box::new(a), Box::new(b)),
    }
}

fn fold_div(a: Node, b: Node) -> Node {
    match (a, b) {
        (a, b) if is_one(&b) => a,
        (a, b) if is_zero(&a) && !is_zero(&b) => a,
        (Node::Const(x), Node::Const(y)) if y != 0.0 => Node::Const(x / y),
        (a, b) => Node::Div(Box::new(a), Box::new(b)),
    }
}

fn fold_neg(a: Node) -> Node {
    match a {
        Node::Const(x) => Node::Const(-x),
        Node::Neg(inner) => *inner,
        a => Node::Neg(Box::new(a)),
    }
}

fn fold_pow(a: Node, k: i32) -> Node {
    match k {
        0 => Node::Const(1.0),
        1 => a,
        _ => match a {
            Node::Const(x) if x != 0.0 || k > 0 => Node::Const(math::powi(x, k)),
            a => Node::Pow(Box::new(a), k),
        },
    }
}

fn deriv(n: &Node, var: Var) -> Node {
    match n {
        Node::Const(_) => Node::Const(0.0),
        Node::Var(v) => Node::Const(if *v == var { 1.0 } else { 0.0 }),
        Node::Neg(a) => fold_neg(deriv(a, var)),
        Node::Add(a, b) => fold_add(deriv(a, var), deriv(b, var)),
        Node::Sub(a, b) => fold_sub(deriv(a, var), deriv(b, var)),
        Node::Mul(a, b) => fold_add(
            fold_mul(deriv(a, var), (**b).clone()),
            fold_mul((**a).clone(), deriv(b, var)),
        ),
        Node::Div(a, b) => fold_div(
            fold_sub(
                fold_mul(deriv(a, var), (**b).clone()),
                fold_mul((**a).clone(), deriv(b, var)),
            ),
            fold_pow((**b).clone(), 2),
        ),
        Node::Pow(a, k) => fold_mul(
            fold_mul(Node::Const(f64::from(*k)), fold_pow((**a).clone(), k - 1)),
            deriv(a, var),
        ),
        Node::Fun(fun, a) => {
            let da = deriv(a, var);
            let outer = match fun {
                Fun::Sin => Node::Fun(Fun::Cos, a.clone()),
                Fun::Cos => fold_neg(Node::Fun(Fun::Sin, a.clone())),
                Fun::Exp => Node::Fun(Fun::Exp, a.clone()),
                Fun::Ln => fold_div(Node::Const(1.0), (**a).clone()),
                Fun::Sqrt => fold_div(
                    Node::Const(0.5),
                    Node::Fun(Fun::Sqrt, a.clone()),
                ),
                // Locally constant away from its jump.
                Fun::Sign => Node::Const(0.0),
            };
            fold_mul(outer, da)
        }
    }
}

fn lift_node(n: &Node, axis: Var) -> Node {
    match n {
        Node::Const(c) => Node::Const(*c),
        Node::Var(_) => Node::Var(axis),
        Node::Neg(a) => Node::Neg(Box::new(lift_node(a, axis))),
        Node::Add(a, b) => Node::Add(Box::new(lift_node(a, axis)), Box::new(lift_node(b, axis))),
        Node::Sub(a, b) => Node::Sub(Box::new(lift_node(a, axis)), Box::new(lift_node(b, axis))),
        Node::Mul(a, b) => Node::Mul(Box::new(lift_node(a, axis)), Box::new(lift_node(b, axis))),
        Node::Div(a, b) => Node::Div(Box::new(lift_node(a, axis)), Box::new(lift_node(b, axis))),
        Node::Pow(a, k) => Node::Pow(Box::new(lift_node(a, axis)), *k),
        Node::Fun(f, a) => Node::Fun(*f, Box::new(lift_node(a, axis))),
    }
}

fn display_node(n: &Node, names: &[&str], parent_prec: u8) -> String {
    // precedence: add/sub 1, mul/div 2, unary 3, pow 4
    let (s, prec) = match n {
        Node::Const(c) => (format!("{c}"), if *c < 0.0 { 3 } else { 5 }),
        Node::Var(v) => (String::from(names[v.index()]), 5),
        Node::Neg(a) => (format!("-{}", display_node(a, names, 3)), 3),
        Node::Add(a, b) => (
            format!("{} + {}", display_node(a, names, 1), display_node(b, names, 1)),
            1,
        ),
        Node::Sub(a, b) => (
            format!("{} - {}", display_node(a, names, 1), display_node(b, names, 2)),
            1,
        ),
        Node::Mul(a, b) => (
            format!("{}*{}", display_node(a, names, 2), display_node(b, names, 2)),
            2,
        ),
        Node::Div(a, b) => (
            format!("{}/{}", display_node(a, names, 2), display_node(b, names, 3)),
            2,
        ),
        Node::Pow(a, k) => {
            let base = display_node(a, names, 4);
            let s = if *k < 0 { format!("{base}^({k})") } else { format!("{base}^{k}") };
            (s, 4)
        }
        Node::Fun(f, a) => (format!("{}({})", f.name(), display_node(a, names, 0)), 5),
    };
    if prec < parent_prec {
        format!("({s})")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_sum_of_powers() {
        let ast = ExprAst::parse("x^2 + y^2", Arity::Two).unwrap();
        match ast.root() {
            Node::Add(a, b) => {
                assert!(matches!(**a, Node::Pow(_, 2)));
                assert!(matches!(**b, Node::Pow(_, 2)));
            }
            other => panic!("expected Add, got {other:?}"),
        }
    }

    #[test]
    fn unbalanced_paren_is_an_error_at_end() {
        let err = ExprAst::parse("sin(x", Arity::Two).unwrap_err();
        assert_eq!(err.position, 5);
    }

    #[test]
    fn sin_squared_pointwise() {
        let ast = ExprAst::parse("(sin(x))^2", Arity::Two).unwrap();
        assert_relative_eq!(ast.eval2([core::f64::consts::FRAC_PI_2, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn one_variable_expressions_use_t() {
        let ast = ExprAst::parse("t^2/2", Arity::One).unwrap();
        assert_eq!(ast.eval1(4.0).unwrap(), 8.0);
        assert!(ExprAst::parse("x^2", Arity::One).is_err());
        assert!(ExprAst::parse("t + y", Arity::Two).is_err());
    }

    #[test]
    fn unknown_identifier_reports_position() {
        let err = ExprAst::parse("x + foo(y)", Arity::Two).unwrap_err();
        assert_eq!(err.position, 4);
    }

    #[test]
    fn division_by_zero_detected() {
        let ast = ExprAst::parse("1/(t - 1)", Arity::One).unwrap();
        assert_eq!(ast.eval1(1.0), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn expcos_value_at_zero() {
        // G of the exponential-cosine potential: exp(cos³t − 3 cos t) at 0 is e⁻².
        let ast = ExprAst::parse("exp(cos(t)^3 - 3*cos(t))", Arity::One).unwrap();
        assert_relative_eq!(ast.eval1(0.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn rational_pointwise() {
        let ast = ExprAst::parse("1/(1 + t^4 + t^8)", Arity::One).unwrap();
        assert_relative_eq!(ast.eval1(1.0).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn symbolic_derivative_of_hamiltonian() {
        // H = (x² + x⁴ + y²)/2 → H_x = x + 2x³ at (1, 0) is 3.
        let h = ExprAst::parse("(x^2 + x^4 + y^2)/2", Arity::Two).unwrap();
        let hx = h.derivative(Var::X);
        assert_relative_eq!(hx.eval2([1.0, 0.0]).unwrap(), 3.0);
        let hy = h.derivative(Var::Y);
        assert_relative_eq!(hy.eval2([0.3, -2.0]).unwrap(), -2.0);
    }

    #[test]
    fn unary_minus_binds_weaker_than_power() {
        let ast = ExprAst::parse("-t^2", Arity::One).unwrap();
        assert_eq!(ast.eval1(3.0).unwrap(), -9.0);
    }

    #[test]
    fn negative_exponents() {
        let a = ExprAst::parse("t^-2", Arity::One).unwrap();
        let b = ExprAst::parse("t^(-2)", Arity::One).unwrap();
        assert_eq!(a.eval1(2.0).unwrap(), 0.25);
        assert_eq!(b.eval1(2.0).unwrap(), 0.25);
        assert!(ExprAst::parse("t^1.5", Arity::One).is_err());
    }

    #[test]
    fn lift_renames_variable() {
        let g = ExprAst::parse("t^2 + sin(t)", Arity::One).unwrap();
        let gy = g.lift(Var::Y);
        assert_relative_eq!(gy.eval2([100.0, 0.7]).unwrap(), g.eval1(0.7).unwrap());
    }

    #[test]
    fn display_reparses() {
        let src = "x^2*y - sin(x*y)/(1 + x^2) + sqrt(1 + y^2)";
        let ast = ExprAst::parse(src, Arity::Two).unwrap();
        let printed = alloc::format!("{ast}");
        let re = ExprAst::parse(&printed, Arity::Two).unwrap();
        for &z in &[[0.3, 0.7], [-1.2, 0.4], [2.0, -0.9]] {
            assert_relative_eq!(ast.eval2(z).unwrap(), re.eval2(z).unwrap(), max_relative = 1e-15);
        }
    }
}
