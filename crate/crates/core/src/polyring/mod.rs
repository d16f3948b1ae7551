//! Sparse multivariate polynomials over the rationals in the variables
//! `x_ij, y_ij` of an `n x n` candidate basis.

mod monomial;
mod polynomial;
mod text;

use thiserror::Error;

pub use monomial::{Monomial, MonomialOrder, VarKind, VariableId};
pub(crate) use polynomial::divide_impl;
pub use polynomial::{reduce, s_polynomial, Polynomial, Reduction, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
    #[error("variable {0} is outside the ring of dimension {1}")]
    UnknownVariable(String, usize),
}
