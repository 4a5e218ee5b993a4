//! Multipolar opinion dynamics on Watts-Strogatz graphs.
//!
//! The crate is organised along the simulation pipeline:
//!
//! * [`graph`] generates and measures the small-world interaction graph,
//! * [`population`] ingests regional statistics, lays regions out on the
//!   graph and assigns binary biases,
//! * [`dynamics`] iterates the normalised biased-averaging update until it
//!   reaches a fixed point,
//! * [`analysis`] turns final states into regional predictions, error
//!   metrics, histograms and a least-squares baseline.
//!
//! Every stochastic operation takes an explicit `u64` seed and draws from
//! [`rng::SimRng`], so results are reproducible bit for bit.

pub mod analysis;
pub mod decimal;
pub mod dynamics;
mod error;
pub mod graph;
pub mod population;
pub mod rng;

pub use error::{Error, Result};
