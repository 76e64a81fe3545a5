//! Sampling kernels for a KPZ fixed point laboratory.
//!
//! The crate builds one object out of another in a fixed order:
//!
//! 1. [`grid`]: uniform grids and partial functions on them.
//! 2. [`ensemble`]: Brownian line ensembles and two-sided Brownian paths,
//!    addressed by pure [`rng::RngKey`] triples so every sample is replayable.
//! 3. [`lpp`]: last passage values, profiles, and rightmost geodesics across
//!    an ensemble, plus a brute-force oracle for small instances.
//! 4. [`landscape`]: the 1:2:3 rescaling of last passage values into directed
//!    landscape slices, Airy sheet samples, and couplings across time splits.
//! 5. [`semigroup`]: growth of an initial profile under the landscape
//!    max-plus semigroup, argmax tracking, ordering checks, and the drifted
//!    sandwich construction.
//! 6. [`stats`]: estimators and gates used by the laboratory: KS distances,
//!    Hoelder seminorms, modulus of continuity, argmax mean curves, and
//!    increment variance profiles.
//!
//! Geometric facts (composition, monotonicity, ordering) are checked exactly
//! per sample; distributional facts are estimated and gated with fixed seeds
//! in the companion laboratory crate.

pub mod ensemble;
pub mod error;
pub mod grid;
pub mod landscape;
pub mod lpp;
pub mod rng;
pub mod semigroup;
pub mod stats;

pub use error::{Error, Result};
