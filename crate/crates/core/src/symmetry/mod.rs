//! Symmetry reduction of learning networks: relabeling classes, Haar twirl,
//! irreducible blocks of `U* ⊗ U^⊗N` and the `Δ` coefficients.

pub mod blocks;
pub mod classes;
pub mod delta;
pub mod haar;
pub mod relabel;
pub mod twirl;

use thiserror::Error;

use crate::comb::CombError;
use crate::tensor::TensorError;

pub use blocks::{schur_projectors, BlockDecomposition, DecompositionKind, IrrepBlock};
pub use classes::{equivalence_classes, EquivClass};
pub use delta::{delta_brute_force, delta_coeffs, DeltaEntry};
pub use haar::haar_random_unitary;
pub use relabel::{
    covariant_symmetrize, relabel_residual, relabel_symmetrize, relabel_symmetrize_dense,
    symmetrize,
};
pub use twirl::{haar_twirl, haar_twirl_monte_carlo, twirl_matrix, RepSpec, Twirler};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Comb(#[from] CombError),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}
