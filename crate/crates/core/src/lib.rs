//! Exact symbolic computation for algebras of linear differential operators
//! and their classical limits.
//!
//! The crate provides, over exact rational arithmetic:
//!
//! - sparse polynomial, symbol, and trigonometric-polynomial arithmetic
//!   ([`poly`]);
//! - the classical Poisson algebra of symbols on the cotangent bundle of R^n
//!   ([`symbols`]);
//! - normal-ordered differential operators with composition, commutator,
//!   filtration, and algebraic symbols ([`diffop`]);
//! - the normal-ordering quantization and the induced star product
//!   ([`quantize`]);
//! - constructors and Leibniz verifiers for derivations and automorphisms of
//!   the operator algebras ([`derivations`]);
//! - flows of affine fields, the group divergence cocycle, and one-parameter
//!   automorphism groups ([`flows`]);
//! - rank-1 bundle models over R^n and over the circle, with the filtration,
//!   gauge transformations, and globalization isomorphism ([`linebundle`]);
//! - the sl(n+1) realization and a solver for projectively equivariant symbol
//!   maps at low order ([`equivariance`]);
//! - an expression parser and printer for the CLI ([`parse`]) and named
//!   verification suites ([`verify`]).

pub mod diffop;
pub mod derivations;
pub mod equivariance;
pub mod error;
pub mod flows;
pub mod linebundle;
pub mod matrix;
pub mod multiindex;
pub mod parse;
pub mod poly;
pub mod quantize;
pub mod rat;
pub mod sample;
pub mod scalar;
pub mod symbols;
pub mod verify;

pub use error::{Error, Result};
