//! Numerics for the degree of polarization (DOP) of optical pulses
//! depolarized by polarization mode dispersion (PMD), and for the Shannon
//! information a two-photon measurement extracts about it.
//!
//! * [`pmd`]: Maxwell DGD statistics, per-realization DOP and Bloch vector,
//!   and the prior DOP density by adaptive quadrature.
//! * [`measurement`]: singlet/triplet (coherent) and same/different
//!   (incoherent) outcome likelihoods.
//! * [`bayes`]: posteriors, differential entropies and mean information gain.
//! * [`oracle`]: seeded Monte Carlo counterparts used for validation.
//!
//! The crate is `no_std` and needs only `alloc`. Times are in picoseconds.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bayes;
pub mod error;
pub mod measurement;
pub mod oracle;
pub mod pmd;
pub mod quad;

pub use bayes::{
    gain_ratio, gain_ratio_for, gain_ratio_uniform, mean_info_gain, posterior, GainReport,
    PosteriorDensity,
};
pub use error::{Error, Result};
pub use measurement::{Outcome, OutcomeModel};
pub use pmd::{
    prior_density, prior_table, survival, BlochState, DopPrior, FiberPmd, GaussianPulse,
    PmdRealization,
};
