//! Optimal learning of von Neumann measurements with quantum combs.
//!
//! Layers, bottom up: [`tensor`] (labeled operators), [`comb`] (Choi
//! operators and instruments), [`symmetry`] (twirl, relabeling classes,
//! irreducible blocks), [`metrics`] (POVM distance and fidelity),
//! [`learn`] (optimal networks), [`sim`] (retrieval circuit simulation)
//! and [`verify`] (invariant suites).

pub mod comb;
pub mod learn;
pub mod linalg;
pub mod metrics;
pub mod sim;
pub mod symmetry;
pub mod tensor;
pub mod verify;

pub type CMatrix = qmlearn_sdp::CMatrix;
