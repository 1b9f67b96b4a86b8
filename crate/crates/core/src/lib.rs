//! Bayesian optimization on pointwise Wasserstein barycenters of Gaussian
//! process surrogates.
//!
//! The crate combines `M` independent GP models into a single surrogate by
//! taking, at every query point, the 2-Wasserstein barycenter of their
//! posterior Gaussians. Because the barycenter of univariate Gaussians has a
//! closed form (weighted mean of the means, weighted mean of the standard
//! deviations), the combined surrogate costs no more than `M` posterior
//! evaluations per point, and acquisition functions such as LCB, PI, and EI
//! apply to it directly.
//!
//! Three optimization drivers are built on this surrogate, differing only in
//! the weight vector handed to the barycenter:
//!
//! * [`tasks::run_federated`] — `M` agents with private datasets collaborate
//!   by sharing predictions only (self-confident / equal / uncooperative
//!   weightings),
//! * [`tasks::run_batch`] — `M` kernels on one shared dataset propose a
//!   synchronous batch of up to `M` deduplicated queries per iteration,
//! * [`tasks::run_mfbo`] — multi-fidelity optimization over information
//!   sources of known fidelity, with a cost- and discrepancy-aware
//!   acquisition.
//!
//! [`benchmarks`] provides the global-optimization test problems, Latin
//! hypercube initialization, and the gap / AUGC / rank-sum metrics used to
//! compare weighting schemas.
//!
//! The crate is `no_std` (requires `alloc`); float transcendentals come from
//! `libm`. All drivers are deterministic for a fixed seed.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod acquisition;
pub mod benchmarks;
pub mod gp;
pub mod kernels;
pub mod matrix;
pub mod tasks;
pub mod wasserstein;

mod normal;
mod rng;

pub use gp::{fit_gp, Dataset, GpModel};
pub use kernels::{KernelKind, KernelSpec};
pub use matrix::SpdMatrix;
pub use wasserstein::{Gaussian1D, WeightVector};
