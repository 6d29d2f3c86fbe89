//! Multidimensional Chinese remainder theorem toolkit.
//!
//! Exact integer-matrix lattice algebra, single- and multi-vector
//! reconstruction from vector residue sets modulo matrix moduli, and a
//! small frequency-detection simulator that produces such residue sets.

pub mod error;
pub mod freqsim;
pub mod exactint;
pub mod lattice;
pub mod matrix;
pub mod mdcrt;
pub mod multivec;
pub mod pairvec;
pub mod scalar;

pub use error::{Error, Result};
pub use matrix::{Matrix, Vector};
pub use scalar::{IntScalar, RealScalar};

pub use num_bigint::BigInt;

pub type IntMatrix = Matrix<BigInt>;
pub type IntVector = Vector<BigInt>;
