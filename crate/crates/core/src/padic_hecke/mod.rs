//! Exact coset combinatorics for the spherical Hecke algebra of `PGL(n, Q_p)`.

mod algebra;
mod cocharacter;
mod enumerate;
pub mod smith;

pub use algebra::{convolve, HeckeAlgebra, HeckeElement};
pub use cocharacter::Cocharacter;
pub use enumerate::{
    degree, degree_with_budget, diagonal_profile, enumerate_cosets, enumerate_cosets_with_budget,
    gaussian_binomial, CosetRep, DEFAULT_BUDGET,
};

/// `min_c max_i |a_i + c|`.
pub fn height(omega: &Cocharacter) -> u32 {
    omega.height()
}
