//! Piecewise deterministic Markov processes: a generic simulation engine,
//! bundled TCP and switched-vector-field models, TCP couplings with
//! Wasserstein and total-variation estimators, the embedded and
//! observation chains, and a kernel estimator of the inter-jump density.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! Monte Carlo and the command line live in the `pdmp-cli` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chains;
pub mod coupling;
pub mod engine;
pub mod error;
pub mod estimation;
pub mod interval;
pub mod models;
pub mod numerics;
pub mod rng;
pub mod stats;

pub use engine::{
    Boundary, EventKind, Flow, JumpSampler, LocalCharacteristics, State, Trajectory,
};
pub use error::{PdmpError, Result};
pub use interval::{Interval, IntervalSet};
pub use rng::RandomStream;
