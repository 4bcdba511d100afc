//! Simulator for field-resolved detection of weak light pulses.
//!
//! * [`photon_stats`]: photon-number laws, series moments, samplers.
//! * [`ghost_mc`]: Monte Carlo shot model and scaling sweeps.
//! * [`field_model`]: classical heterodyne traces and CEP behaviour.
//! * [`trace_sim`]: stochastic delay scans, spectra, field vs intensity detection.
//! * [`gabor_analysis`]: windowed intrapulse statistics and mixture estimation.
//! * [`cli`]: configuration, experiment runners and file output for the `qfs` binary.

// `!(x > 0.0)` style checks are intentional: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod field_model;
pub mod gabor_analysis;
pub mod ghost_mc;
pub mod photon_stats;
pub mod rng;
pub mod stats;
pub mod trace_sim;

pub use error::{Error, Result};
