//! Band structures of 1D periodic Schrödinger operators, their Dirac points,
//! and the mid-gap states created by a slowly varying domain wall.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod bloch;
pub mod dirac_point;
pub mod edge;
pub mod effective_dirac;
pub mod error;
pub mod multiscale;
pub mod potential;
pub mod quad;
pub mod tridiag;

pub use error::{Error, Result};
