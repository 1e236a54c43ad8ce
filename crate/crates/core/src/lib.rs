//! Spacing-ratio statistics across the orthogonal to unitary symmetry crossover.
//!
//! The crate is `no_std` (it needs `alloc`). It carries
//!
//! * [`analytic`]: closed-form densities of the consecutive spacing ratio
//!   `r` and of `r̃ = min(r, 1/r)` for the 3×3 Gaussian crossover ensemble,
//!   their averages, the invariant-class limits and the 3×3 Laguerre results;
//! * [`ensembles`]: seeded samplers for Gaussian and Wishart crossover
//!   matrices and for the quantum kicked rotor Floquet operator, together with
//!   the dense eigensolvers in [`linalg`];
//! * [`spectra`]: spacings, ratios, spectrum slicing and histograms;
//! * [`analysis`]: maximum-likelihood fitting of the effective crossover
//!   parameter, symmetrized Kullback-Leibler divergences and scaling points.
//!
//! IO, parallel drivers and the command line live in the `ratiocross` crate.
#![no_std]
// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod analytic;
pub mod ensembles;
mod error;
pub mod linalg;
pub mod quad;
pub mod spectra;

pub use analytic::CrossoverParam;
pub use error::{Error, Result};
