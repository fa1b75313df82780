//! Numerical laboratory for the planar logarithmic Choquard equation
//! (the two-dimensional Schrödinger–Newton system).
//!
//! The crate computes the unique positive radial ground state for a given
//! frequency a > 0 by shooting plus scaling normalization, certifies it
//! through residual and self-consistency checks, evaluates the sharp decay
//! law and its special-function closed form, and verifies nondegeneracy of
//! the linearized operator by angular-sector spectral analysis.

// openblas-src provides the BLAS/LAPACK link; lapack-sys only declares symbols.
extern crate openblas_src;





pub mod error;
pub mod fd;
pub mod grid;


pub mod asymptotics;
pub mod groundstate;
pub mod interp;
pub mod quad;
pub mod shoot;
pub mod special;


pub use error::{Error, Result};
pub use grid::{make_log_grid, RadialGrid, RadialProfile};

