//! Visibility estimation from coincidence histograms.

mod fit;
mod normalize;

pub use fit::{
    fit_beating, Estimate, DEFAULT_FIT_HALF_RANGE_LINEWIDTHS, FitOptions, FitResult, ModelGrid, DETUNING_CHI2_THRESHOLD,
    MAX_ITERATIONS, PARAMETER_NAMES, PARAMETER_TOLERANCE,
};
pub use normalize::{
    normalize_histogram, raw_visibility, NormalizedHistogram, RawVisibility, SignalShape,
};
