//! Photon-counting simulation of a gated FBS experiment.
//!
//! A CW pair source feeds the splitter, whose pumps are on only in one window
//! per period. Clicks are binned into coincidence histograms, with the
//! remaining windows (or an incoherent reference run) as normalization.

mod config;
mod engine;
mod expected;
mod histogram;

pub use config::{ExperimentConfig, CALIBRATION_DURATION, TARGET_NORMALIZATION_COUNTS};
pub use engine::{
    histogram_from_events, outcome_probabilities, simulate_autocorrelation, simulate_histogram, simulate_run,
    with_threads, Channel, CorrelationMode, Event, SimulationOutput, CHUNK_PERIODS,
};
pub use expected::{expected_histogram, sample_histogram, synthetic_histogram, ExpectedHistogram};
pub use histogram::{CorrelationHistogram, NormalizationSource};
