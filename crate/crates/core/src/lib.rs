//! Simulation and analysis toolkit for the three-stage multi-photon quantum
//! cryptography protocol and its intensity-aware variant.
//!
//! * [`optics`]: polarization states, rotations, Malus-law measurement, beam splitting.
//! * [`protocol`]: the Alice/Bob/Alice/Bob exchange with intensity checkpoints.
//! * [`adversary`]: siphoning attacks and tomography.
//! * [`analytics`]: closed-form SNR, intensity budget, photon bounds, (p-k-n) classes.
//! * [`montecarlo`]: seeded experiments and sweeps.
//! * [`cli`]: the `tsqc` command-line front end.

pub mod adversary;
pub mod analytics;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod optics;
pub mod protocol;
pub mod rng;

pub use error::{Error, Result};
pub use rng::RandomStream;
