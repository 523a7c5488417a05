//! Symmetric tensor decomposition over the complex numbers via moment matrix
//! extension: catalecticant rank probes, simultaneous diagonalization, the
//! order-4 linear-system path, finite-field rank certificates and explicit
//! monomial decompositions.

pub mod error;
pub mod exponent;
pub mod ff;
pub mod hankel;
pub mod io;
pub mod jennrich;
pub mod linalg;
pub mod linsys;
pub mod monomial;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
pub use linalg::{c, numerical_rank, C64};
pub use tensor::{Decomposition, PointSet, SymTensor};
