//! Period functions of planar centers.
//!
//! Given a planar system `z' = V(z)` with a period annulus, and a transversal
//! field `W` with `[V, W] = μV` (a *normalizer* with *N-cofactor* `μ`), the
//! derivatives of the period function `T` along the `W`-flow are line
//! integrals of the cofactor sequence
//!
//! ```text
//! μ₁ = μ,   μₙ = μₙ₋₁ μ + ∂_W μₙ₋₁,      ∂_W⁽ⁿ⁾ T(z) = ∫₀ᵀ μₙ(φ_V(t, z)) dt .
//! ```
//!
//! This crate builds the normalizer pairs for several families of centers
//! (Hamiltonian, separable-variable, reparametrized linear, jacobian-map),
//! evaluates the cofactor sequence with truncated-Taylor jets, integrates the
//! cycles and the cofactor quadratures with an embedded Runge–Kutta pair, and
//! locates/classifies critical orbits. Sample-based certificates for the
//! monotonicity and convexity conditions of the separable families are in
//! [`analysis`].
//!
//! The crate is `no_std`-compatible (`alloc` required): disable the default
//! `std` feature and enable `libm`.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("annulus-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod analysis;
pub mod cofactors;
pub mod expr;
pub mod flow;
pub mod jet;
mod math;
pub mod plane;
pub mod systems;

pub use expr::{Arity, EvalError, ExprAst, ParseError, Var};
pub use jet::{Jet1, Jet2};
pub use plane::Pt;
pub use systems::{NormalizerPair, Region, SystemError, VectorField};
