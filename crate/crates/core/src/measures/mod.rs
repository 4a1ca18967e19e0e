//! Plancherel and Sato-Tate measures on the compact torus modulo the
//! symmetric group: densities, normalization, quadrature pairings, rejection
//! sampling and the large-`p` convergence table.

mod convergence;
mod empirical;
mod quadrature;
mod sampler;
mod torus;

pub use convergence::{
    default_testset, weak_convergence_report, ConvergenceReport, ConvergenceRow, TestFunction, NOISE_FLOOR,
};
pub use empirical::{mean_and_stderr, EmpiricalMeasure};
pub use quadrature::{
    mix_seed, normalize, normalize_with, pair, pair_with, total_mass, Method, Quadrature, TorusRule,
    DEFAULT_GRID, DEFAULT_MC_SAMPLES, DEFAULT_MC_SEED, MAX_GRID_RANK, REFINEMENT_TOL,
};
pub use sampler::{grid_supremum, sample, sample_streams, sample_with, SampleSet, Sampler, ENVELOPE_SAFETY, MAX_ENVELOPE_RETRIES};
pub use torus::{MeasureKind, MeasureSpec, TorusPoint};
