//! Planted formula mutations for oracle soundness testing.
//!
//! Each variant corrupts one index or sign in one operation. [`Mutant`]
//! exposes the affected operations with the corruption applied; the
//! numeric oracle suite is expected to detect every one of them.

use crate::error::Result;

use super::{ops, CoordinateMap, OneForm, Tensor11, TwoForm, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mutation {
    None,
    /// `[X,Y]^i = X^j d_j Y^i + Y^j d_j X^i`
    BracketSign,
    /// `[X,Y]^i = X^j d_i Y^j - Y^j d_i X^j`
    BracketIndex,
    /// `(L_X a)_i = X^j d_j a_i - a_j d_i X^j`
    OneFormLieSign,
    /// `(L_X a)_i = X^j d_j a_i + a_j d_j X^i`
    OneFormLieIndex,
    /// `(L_X S)^i_j = X^k d_k S^i_j + S^k_j d_k X^i + S^i_k d_j X^k`
    TensorLieSign,
    /// `(L_X S)^i_j = X^k d_k S^i_j - S^k_j d_k X^i + S^i_k d_k X^j`
    TensorLieIndex,
    /// `(da)_ij = d_i a_j + d_j a_i`
    ExteriorSign,
    /// `(i_X w)_j = X^i w_ji`
    InteriorIndex,
    /// `(S* a)_j = a_i S^j_i`
    DualTranspose,
    /// `(phi* a)_i = (a_a o phi) d phi^i / dx^a`
    PullbackTranspose,
}

impl Mutation {
    pub const ALL: [Mutation; 10] = [
        Mutation::BracketSign,
        Mutation::BracketIndex,
        Mutation::OneFormLieSign,
        Mutation::OneFormLieIndex,
        Mutation::TensorLieSign,
        Mutation::TensorLieIndex,
        Mutation::ExteriorSign,
        Mutation::InteriorIndex,
        Mutation::DualTranspose,
        Mutation::PullbackTranspose,
    ];
}

/// The `geom` operations under a planted mutation.
#[derive(Clone, Copy, Debug)]
pub struct Mutant(pub Mutation);

impl Mutant {
    pub fn lie_bracket(&self, x: &VectorField, y: &VectorField) -> Result<VectorField> {
        ops::lie_bracket_m(x, y, self.0)
    }

    pub fn lie_derivative_oneform(&self, x: &VectorField, a: &OneForm) -> Result<OneForm> {
        ops::lie_derivative_oneform_m(x, a, self.0)
    }

    pub fn lie_derivative_tensor11(&self, x: &VectorField, s: &Tensor11) -> Result<Tensor11> {
        ops::lie_derivative_tensor11_m(x, s, self.0)
    }

    pub fn exterior_derivative(&self, a: &OneForm) -> TwoForm {
        ops::exterior_derivative_m(a, self.0)
    }

    pub fn interior_product(&self, x: &VectorField, w: &TwoForm) -> Result<OneForm> {
        ops::interior_product_m(x, w, self.0)
    }

    pub fn apply_tensor_dual(&self, s: &Tensor11, a: &OneForm) -> Result<OneForm> {
        ops::apply_tensor_dual_m(s, a, self.0)
    }

    pub fn pullback(&self, phi: &CoordinateMap, a: &OneForm) -> Result<OneForm> {
        ops::pullback_m(phi, a, self.0)
    }
}
