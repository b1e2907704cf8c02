#![forbid(unsafe_code)]
//! Numerical laboratory for the smallest singular value of random matrices
//! with independent, not necessarily identically distributed entries.
//!
//! The crate is organized around the quantities that drive quantitative
//! invertibility arguments:
//!
//! * [`ensembles`] — entry laws, matrix ensembles, and their standing
//!   assumptions (second-moment budget, unit-scale concentration bound).
//! * [`spectral`] — smallest singular values and distances from a column to
//!   the span of the others.
//! * [`sphere`] — the compressible / incompressible decomposition of the
//!   unit sphere.
//! * [`rlcd`] — the randomized least common denominator of a vector relative
//!   to a product law, with a stability check and an incompressible-vector
//!   lower bound.
//! * [`anticoncentration`] — concentration-function estimates and the bound
//!   chain from characteristic-function integrals to small-ball
//!   probabilities for matrix-vector images.
//! * [`nets`] — weighted lattice nets: randomized rounding, weight
//!   projection, the water-filling column functional, and uniform sampling
//!   of spread lattice points.
//! * [`harness`] — seeded, reproducible tail experiments tying the pieces
//!   together, plus report serialization.
//!
//! All randomized routines draw from [`rng::SeedSpec`] streams, so every
//! result is a pure function of `(master seed, stream index)` regardless of
//! thread count.

pub mod anticoncentration;
pub mod config;
pub mod ensembles;
pub mod harness;
pub mod nets;
pub mod report;
pub mod rlcd;
pub mod rng;
pub mod spectral;
pub mod sphere;

pub use rng::SeedSpec;
