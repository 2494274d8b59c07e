//! Stochastic dynamic fundamental diagrams for mixed platoons of human-driven
//! and automated vehicles.
//!
//! The pipeline runs bottom-up:
//!
//! * [`cf_models`]: car-following laws, parameter priors and equilibria.
//! * [`linear_tf`]: closed-form and linearized speed transfer functions.
//! * [`dfa`]: amplitude-dependent gains by harmonic balance or simulation.
//! * [`platoon`]: vehicle sequences and amplitude propagation along a platoon.
//! * [`macro_fd`]: density and flow traces of one platoon realization.
//! * [`stoch_fd`]: Monte Carlo ensembles, joint densities and hysteresis metrics.
//! * [`cli`]: configuration, commands and file outputs for the `stochfd` binary.

pub mod cf_models;
pub mod cli;
pub mod dfa;
pub mod error;
pub mod linear_tf;
pub mod macro_fd;
pub mod platoon;
pub mod seed;
pub mod stoch_fd;

pub use cf_models::{CarFollowingLaw, LawKind, VehicleState};
pub use error::{Error, Result};
pub use linear_tf::ComplexGain;
