//! Covariant operator bases for a single bosonic mode.
//!
//! The normally ordered monomials `T_Kq = a^dagger^{K+q} a^{K-q}` and their
//! trace duals `𝔗_Kq` form a pair of operator bases that transform cleanly
//! under displacements. Expectation values in the two bases (multipoles and
//! inverse multipoles) expand any state, and their norms quantify how far a
//! state sits from the vacuum.

pub mod basis;
pub mod error;
pub mod extremal;
pub mod fock;
pub mod multipole;
pub mod special;
pub mod verify;

pub use basis::TensorIndex;
pub use error::{Error, Result};
pub use fock::{DensityMatrix, FockOperator, StateSpec, C64};
