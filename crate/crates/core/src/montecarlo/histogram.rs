use crate::error::{Error, Result};

/// Which windows fill the normalization partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationSource {
    /// Unsynchronized windows of the same run (pumps off).
    OffSync,
    /// An independent incoherent reference run (α = 0) in synchronized windows.
    Reference,
}

impl NormalizationSource {
    pub fn label(self) -> &'static str {
        match self {
            NormalizationSource::OffSync => "off_sync",
            NormalizationSource::Reference => "reference",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "off_sync" => Some(NormalizationSource::OffSync),
            "reference" => Some(NormalizationSource::Reference),
            _ => None,
        }
    }
}

/// Coincidence counts versus delay τ = t_first − t_second in two partitions.
///
/// Bins are `tau_bin` wide and τ = 0 falls on an edge, so the two central
/// bins straddle zero symmetrically.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationHistogram {
    pub tau_bin: f64,
    /// Gate window length, s. Pairs with delay τ survive with probability
    /// `1 − |τ|/L`; zero means unknown and no correction is applied.
    pub window_length: f64,
    pub in_sync: Vec<u64>,
    pub normalization: Vec<u64>,
    pub normalization_source: NormalizationSource,
    pub sync_windows: u64,
    /// Windows contributing to `normalization`.
    pub normalization_windows: u64,
    pub warnings: Vec<String>,
}

impl CorrelationHistogram {
    pub fn empty(
        tau_bin: f64,
        tau_range: f64,
        window_length: f64,
        normalization_source: NormalizationSource,
    ) -> Self {
        let n = 2 * ((tau_range / tau_bin) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self {
            tau_bin,
            window_length,
            in_sync: vec![0; n],
            normalization: vec![0; n],
            normalization_source,
            sync_windows: 0,
            normalization_windows: 0,
            warnings: Vec::new(),
        }
    }

    pub fn n_bins(&self) -> usize {
        self.in_sync.len()
    }

    pub fn half_range(&self) -> f64 {
        self.tau_bin * (self.n_bins() / 2) as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5 - (self.n_bins() / 2) as f64) * self.tau_bin
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_bins()).map(|i| self.bin_center(i)).collect()
    }

    pub fn bin_of(&self, tau: f64) -> Option<usize> {
        let k = (tau / self.tau_bin).floor() + (self.n_bins() / 2) as f64;
        (k >= 0.0 && k < self.n_bins() as f64).then_some(k as usize)
    }

    /// Ratio of normalization windows to synchronized windows.
    pub fn window_ratio(&self) -> f64 {
        if self.sync_windows == 0 {
            return 0.0;
        }
        self.normalization_windows as f64 / self.sync_windows as f64
    }

    pub fn in_sync_errors(&self) -> Vec<f64> {
        self.in_sync.iter().map(|&c| (c as f64).sqrt()).collect()
    }

    pub fn normalization_errors(&self) -> Vec<f64> {
        self.normalization.iter().map(|&c| (c as f64).sqrt()).collect()
    }

    /// Counts in bins whose centers satisfy |τ| ≤ `half_width`.
    pub fn counts_within(&self, counts: &[u64], half_width: f64) -> u64 {
        (0..self.n_bins())
            .filter(|&i| self.bin_center(i).abs() <= half_width)
            .map(|i| counts[i])
            .sum()
    }

    /// Adds another histogram with identical binning.
    pub fn merge(&mut self, other: &CorrelationHistogram) -> Result<()> {
        if other.n_bins() != self.n_bins() || other.tau_bin != self.tau_bin {
            return Err(Error::Config("cannot merge histograms with different binning".into()));
        }
        for (a, b) in self.in_sync.iter_mut().zip(&other.in_sync) {
            *a += b;
        }
        for (a, b) in self.normalization.iter_mut().zip(&other.normalization) {
            *a += b;
        }
        self.sync_windows += other.sync_windows;
        self.normalization_windows += other.normalization_windows;
        Ok(())
    }
}
