//! Discrete analytic functions on the right half-lattice `ℤ₊ + iℤ`.
//!
//! The crate covers the basis polynomials `z⁽ⁿ⁾` and the exponentials `e_λ`,
//! the difference operators and discrete integration, rational discrete
//! analytic functions given by state-space realizations, Schur functions built
//! from coisometric colligations, and the mesh-`h` refinement limit.
//!
//! Every computation is generic over [`Scalar`]: [`GaussRat`] gives exact
//! Gaussian-rational arithmetic, `Complex64` gives double precision.

pub mod basis;
pub mod error;
pub mod lattice;
pub mod matrix;
pub mod mesh;
pub mod realization;
pub mod samples;
pub mod scalar;
pub mod schur;

pub use error::{Error, Result};
pub use lattice::{LatticeFunction, LatticePoint, PathSpec, Window};
pub use matrix::Mat;
pub use num_complex::Complex64;
pub use scalar::{GaussRat, Mode, Scalar};
