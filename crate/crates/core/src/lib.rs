//! The tempered discrete Linnik distribution and its ancestral family.
//!
//! Closed-form generating functions and Laplace transforms, exact finite-sum
//! probability mass functions, moment formulas, samplers built from the
//! mixture and compound representations, and an extended-precision power
//! series oracle used to cross-check all of it.

pub mod analytic;
pub mod cli;
pub mod coeffs;
pub mod dd;
mod error;
pub mod moments;
pub mod oracle;
pub mod params;
pub mod sampler;

pub use error::{Error, Result};
pub use params::{
    reduce_special_case, validate_tdl, AuxParams, Family, LinnikParams, Reduction, StableParams,
    TdlBranch, TdlParams, TdsParams, TemperedLinnikParams, TemperedStableParams,
};
