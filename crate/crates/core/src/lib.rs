//! Numerical quantum mechanics toolkit.
//!
//! Natural units (ħ = 1, mass 1 unless a mass parameter is explicit) are used
//! throughout; velocities are `v_E = √(2E/m)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod error;
pub mod dynamics;
pub mod fock;
pub mod numeric;
pub mod qc;
pub mod quasi1d;
pub mod spherical;
pub mod wigner;

pub use error::{QmError, Result};
pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
pub use numeric::{ComplexMatrix, EigenDecomposition};
