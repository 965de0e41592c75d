//! Exact symbolic expression kernel.
//!
//! Expressions are kept in a sum-of-monomials normal form with exact
//! rational coefficients. Atoms are symbols, elementary calls, opaque
//! unary function calls carrying a derivative order, and inverted sums.

mod eval;
mod expr;
mod parse;
mod print;
mod zero;

use thiserror::Error;

pub use eval::{eval_numeric, eval_with_scale, Assignment, RadialInverse, TestFamily, UnaryFunction};
pub use expr::{ElemFn, Expr, ExprView, Rational};
pub use parse::parse;
pub use zero::{is_zero, ZeroReport, ZeroVerdict};


#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown token {token:?} at byte {offset}")]
    UnknownToken { offset: usize, token: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("no value for {0}")]
    Uncovered(String),
    #[error("evaluation domain error: {0}")]
    Domain(String),
    #[error("sampling budget exhausted after {attempts} attempts: {last}")]
    SamplingBudget { attempts: usize, last: String },
}

#[cfg(test)]
mod tests;
