//! Desk-scale verification toolkit for the distribution of ω(n), the number
//! of distinct prime factors, over short intervals and dyadic blocks.
//!
//! The crate is organized as:
//!
//! - [`sieve`]: segmented sieving of ω over windows, prime tables, and an
//!   independent per-integer oracle;
//! - [`theory`]: the limit laws (normal and corrected), their
//!   characteristic functions, the Mertens constant, the Euler-product
//!   function A(z), mean-value and local-law predictions;
//! - [`empirics`]: empirical distribution/characteristic functions and
//!   sup-norm discrepancies built from ω-histograms;
//! - [`ladder`]: the factor-interval system 𝒮 with sieve densities and the
//!   exact inclusion–exclusion identity;
//! - [`pretentious`]: pretentious distances, the Halász-type bound, and the
//!   restricted Dirichlet sum R_{v,H};
//! - [`experiments`]: deterministic sampled-window experiment runners.

pub mod empirics;
pub mod error;
pub mod experiments;
pub mod ladder;
pub mod pretentious;
pub mod sieve;
pub mod theory;

pub use error::{Error, Result};
