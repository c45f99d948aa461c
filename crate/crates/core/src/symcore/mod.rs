//! Exact symbolic arithmetic: interned symbols, big rationals, sparse Laurent
//! polynomials and expression trees.

mod expr;
mod laurent;
mod poly;
mod rational;
mod sym;

pub use expr::{expr_arith, jacobi_f64, monomial_expr, ArithOp, Expr, Func};
pub use laurent::{to_laurent, LaurentForm, LaurentKey};
pub use poly::{Monomial, Poly};
pub use rational::{fmt_rational, int, parse_rational, rat, rat_pow, rat_sqrt, rational_content, to_f64, Rational};
pub use sym::{DerivInfo, Sym, SymKind};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymError {
    #[error("exponent must be an integer, got {0}")]
    NonIntegerExponent(String),
    #[error("not a polynomial: {0}")]
    NotPolynomial(String),
    #[error("unreduced higher derivative marker {0}")]
    UnreducedMarker(String),
    #[error("marker {0} appears with power {1}")]
    MarkerPower(String, i32),
    #[error("division by zero")]
    DivisionByZero,
}
