//! Finite-dimensional tracial multi-matrix dynamical systems.
//!
//! The crate models a von Neumann algebra as a finite direct sum of full
//! matrix blocks with a weighted trace, and provides on top of it:
//! conditional expectations onto *-subalgebras, module bases and fusion
//! products of bimodules, Hilbert–Schmidt operator kernels, group actions
//! with Koopman representations, almost-periodic / weakly-mixing
//! decompositions, joinings and disjointness probes, and a tower of
//! characteristic factors with the associated uniformity seminorms.

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod fusion;
pub mod hkz;
pub mod joinings;
pub mod linalg;
pub mod modules;
pub mod relprod;
pub mod report;
pub mod subalgebra;
pub mod sysfile;
pub mod tol;
pub mod wedderburn;

pub use error::{Error, Result};
pub use tol::ToleranceProfile;
