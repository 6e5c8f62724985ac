//! SU(2)-valued nonlinear Fourier transform.

pub mod config;
pub mod error;
pub mod estimates;
pub mod forward;
pub mod grid;
pub mod io;
pub mod krylov;
pub mod pair;
pub mod rh;
pub mod sequence;
pub mod spectral;
pub mod weight;

pub use error::{NlftError, Result};
pub use estimates::{run_suite, CheckRecord, CheckStatus, SuiteInput, SuiteOptions, VerificationReport};
pub use forward::{a_star_at_zero, multilinear_partial_sum, multilinear_term, nlft_forward};
pub use grid::{from_grid, reciprocal_on_grid, to_grid, GridFunction, GridTransform};
pub use pair::NlftPair;
pub use rh::{inverse_nlft, layer_strip, rh_solve, InverseOptions, RhSolution, RhSystem};
pub use sequence::{CoefficientSequence, IndexWindow};
pub use spectral::{outer_complement, symbol_ratio};
pub use weight::BeurlingWeight;
