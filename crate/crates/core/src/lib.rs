//! Pseudospectrum enclosures for band operators on the integers.
//!
//! The lower and upper bound fields are minima of smallest singular values over
//! finite windows of `A - lambda I` and its adjoint. Windows at consecutive
//! positions overlap, so their QR factors are obtained by updating one rotation
//! pattern instead of refactorizing.

pub mod bounds;
pub mod cli;
pub mod dense;
pub mod error;
pub mod givens;
pub mod operator;
pub mod qh;
pub mod sigma;
pub mod tracer;

pub use error::{Error, Result};
pub use num_complex::Complex64;
