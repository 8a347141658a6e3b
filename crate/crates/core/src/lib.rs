//! Cohomology of finite-dimensional Lie superalgebras with adjoint,
//! parity-shifted adjoint and trivial coefficients, computed exactly over
//! the rationals, together with the Nijenhuis bracket on cochains.

pub mod algebra;
pub mod cohomology;
pub mod complex;
pub mod error;
pub mod linalg;
pub mod nijenhuis;

pub use error::{Error, Result};
