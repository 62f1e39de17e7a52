//! Finite-SNR achievable rates for lattice interference alignment.
//!
//! Two users (or, after alignment, one desired user and one aggregate
//! interferer) share a single Construction-A linear code over a prime field.
//! This crate evaluates the resulting achievable symmetric rates for the
//! two-user modulo MAC and the K-user integer-interference channel, and
//! checks them against a desk-scale Monte Carlo simulation of the actual
//! encoder, channel and joint decoder.
//!
//! Module map:
//!
//! * [`modarith`]: reduction modulo the basic interval and the residue grid.
//! * [`diophantine`]: the approximation factor `delta(p, gamma)`, primes and
//!   the admissible prime set.
//! * [`rates`]: case bounds, two-user and K-user rates, baselines, DoF scans.
//! * [`code`]: the linear code ensemble, encoder and linearity checks.
//! * [`mac`]: the two-user modulo MAC and its exhaustive joint decoder.
//! * [`network`]: integer-interference channels, alignment and sum-rate curves.
//! * [`power_time`]: the three-user power-time schedule and its rates.

pub mod code;
pub mod diophantine;
mod error;
pub mod mac;
pub mod modarith;
pub mod network;
pub mod par;
pub mod power_time;
pub mod rates;
pub mod rng;

pub use error::{Error, Result};

/// Converts an SNR given in dB to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
