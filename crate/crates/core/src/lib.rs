//! Simulation and analysis of frequency-domain Hong-Ou-Mandel interference.
//!
//! Photon pairs from a CW-pumped microring are mixed by a Bragg-scattering
//! four-wave-mixing frequency beam splitter. The crate covers the biphoton
//! spectral amplitude ([`spectral`]), the SU(2) frequency-bin transform
//! ([`fbs`]), second-order correlation functions ([`correlation`]), a
//! Monte Carlo model of the gated coincidence experiment
//! ([`montecarlo`]), visibility estimation ([`estimation`]) and
//! phase-matching design for the mixing fiber ([`phasematch`]).

pub mod cli;
pub mod config;
pub mod correlation;
pub mod error;
pub mod estimation;
pub mod fbs;
pub mod io;
pub mod manifest;
pub mod montecarlo;
pub mod phasematch;
pub mod spectral;

pub use error::{Error, Result};

/// 2π, for converting between Hz and rad/s.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
