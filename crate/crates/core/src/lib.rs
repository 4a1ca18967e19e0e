//! Computational toolkit around the unramified spherical Hecke algebra of
//! `PGL(n, Q_p)`: exact coset enumeration and convolution, the Satake
//! transform, Satake parameters from Hecke eigenvalues, Plancherel and
//! Sato-Tate measures, Weyl-law bookkeeping, synthetic families that exercise
//! the equidistribution statements, and one-level densities of low-lying
//! zeros.

// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod family_sim;
pub mod lowlying;
pub mod measures;
pub mod oracle;
pub mod padic_hecke;
pub mod satake;
pub mod verify;
pub mod weyl_law;

pub use error::{Error, Result};

/// Exact rational scalar used for Hecke coefficients and surd parts.
pub type Rational = num_rational::Ratio<i128>;
