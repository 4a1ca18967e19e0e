//! Satake transform, Satake parameters and their extraction from Hecke
//! eigenvalues.

mod laurent;
mod params;
mod surd;
mod transform;

pub use laurent::{SymLaurent, TorusEvaluator};
pub use params::{
    eigenvalue_from_parameter, extraction_polynomial, is_tempered, satake_params_from_eigenvalues,
    Extraction, SatakeParameter, DEFAULT_TEMPERED_TOL, PRODUCT_TOL, ROOT_ITERATION_CAP, ROOT_RESIDUAL_TOL,
};
pub use surd::Surd;
pub use transform::{satake_transform, satake_transform_in, RhoShift};
