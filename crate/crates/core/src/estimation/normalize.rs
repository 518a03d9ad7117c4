use crate::correlation::{CurveKind, CurveSource, G2Curve};
use crate::error::{Error, Result};
use crate::montecarlo::{CorrelationHistogram, CorrelationMode, NormalizationSource};

/// Normalized coincidence data: the in-sync curve and the scaled
/// normalization partition, both divided by the normalization peak.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedHistogram {
    /// In-sync counts / S, with measured provenance.
    pub curve: G2Curve,
    /// Quadrature errors including the uncertainty of S.
    pub errors: Vec<f64>,
    /// Poisson-only errors, `√max(N, 1)/S`, used as fit weights.
    pub fit_errors: Vec<f64>,
    /// Normalization partition averaged per window, / S.
    pub reference: Vec<f64>,
    pub reference_errors: Vec<f64>,
    pub reference_fit_errors: Vec<f64>,
    /// Peak of the per-window normalization average, counts.
    pub scale: f64,
    pub scale_error: f64,
    pub tau_bin: f64,
    pub window_length: f64,
    pub mode: CorrelationMode,
    /// Raw counts kept for visibility estimates.
    pub in_sync_counts: Vec<u64>,
    pub normalization_counts: Vec<u64>,
    /// Normalization windows per synchronized window.
    pub window_ratio: f64,
}

impl NormalizedHistogram {
    pub fn tau(&self) -> &[f64] {
        &self.curve.tau
    }

    pub fn signal(&self) -> &[f64] {
        &self.curve.values
    }

    /// Indices of the two bins adjacent to τ = 0.
    pub fn central_bins(&self) -> [usize; 2] {
        let mid = self.curve.tau.len() / 2;
        [mid - 1, mid]
    }
}

/// Divides in-sync counts by the peak S of the per-window normalization
/// average, taken as the mean over the two bins adjacent to τ = 0.
pub fn normalize_histogram(hist: &CorrelationHistogram) -> Result<NormalizedHistogram> {
    let n = hist.n_bins();
    if n < 2 {
        return Err(Error::Normalization("histogram has fewer than two bins".into()));
    }
    let total_norm: u64 = hist.normalization.iter().sum();
    if total_norm == 0 || hist.normalization_windows == 0 {
        return Err(Error::Normalization("normalization partition is empty".into()));
    }
    let ratio = hist.window_ratio();
    if !(ratio > 0.0) {
        return Err(Error::Normalization("no synchronized windows recorded".into()));
    }
    let mid = n / 2;
    let central = hist.normalization[mid - 1] + hist.normalization[mid];
    if central == 0 {
        return Err(Error::Normalization("no normalization counts near τ = 0".into()));
    }
    let scale = central as f64 / (2.0 * ratio);
    let scale_rel = 1.0 / (central as f64).sqrt();

    let mode = match hist.normalization_source {
        NormalizationSource::OffSync => CorrelationMode::Cross,
        NormalizationSource::Reference => CorrelationMode::Auto,
    };
    let kind = match mode {
        CorrelationMode::Cross => CurveKind::CrossRb,
        CorrelationMode::Auto => CurveKind::AutoBb,
    };

    let norm_signal = |c: u64, per: f64| c as f64 / (per * scale);
    let quad = |c: u64, per: f64| {
        let v = norm_signal(c, per);
        let rel_count = if c > 0 { 1.0 / c as f64 } else { 0.0 };
        let poisson_only = (c.max(1) as f64).sqrt() / (per * scale);
        // Empty bins fall back to the Poisson floor.
        (v * (rel_count + scale_rel * scale_rel).sqrt()).max(if c == 0 { poisson_only } else { 0.0 })
    };
    let fit_err = |c: u64, per: f64| (c.max(1) as f64).sqrt() / (per * scale);

    let values: Vec<f64> = hist.in_sync.iter().map(|&c| norm_signal(c, 1.0)).collect();
    let errors = hist.in_sync.iter().map(|&c| quad(c, 1.0)).collect();
    let fit_errors = hist.in_sync.iter().map(|&c| fit_err(c, 1.0)).collect();
    let reference = hist.normalization.iter().map(|&c| norm_signal(c, ratio)).collect();
    let reference_errors = hist.normalization.iter().map(|&c| quad(c, ratio)).collect();
    let reference_fit_errors = hist.normalization.iter().map(|&c| fit_err(c, ratio)).collect();

    let mut curve = G2Curve::new(hist.centers(), values, kind, CurveSource::Measured);
    curve.parameters.push(("normalization_scale_counts".into(), scale));
    curve.parameters.push(("window_ratio".into(), ratio));
    curve.warnings.extend(hist.warnings.iter().cloned());
    Ok(NormalizedHistogram {
        curve,
        errors,
        fit_errors,
        reference,
        reference_errors,
        reference_fit_errors,
        scale,
        scale_error: scale * scale_rel,
        tau_bin: hist.tau_bin,
        window_length: hist.window_length,
        mode,
        in_sync_counts: hist.in_sync.clone(),
        normalization_counts: hist.normalization.clone(),
        window_ratio: ratio,
    })
}

/// Interference shape `base + beat·α·cos(ΔΩτ)` multiplying the envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalShape {
    pub base: f64,
    pub beat: f64,
}

impl SignalShape {
    /// Cross-port coincidences behind a splitter with conversion efficiency η:
    /// `(1 − η)² + η² − 2η(1 − η)α cos`. At η = 1/2 this is `(1 − α cos)/2`.
    pub fn cross(efficiency: f64) -> Self {
        let t = 1.0 - efficiency;
        Self {
            base: t * t + efficiency * efficiency,
            beat: -2.0 * t * efficiency,
        }
    }

    /// Same-port coincidences relative to the incoherent reference: `1 + α cos`.
    pub fn auto() -> Self {
        Self { base: 1.0, beat: 1.0 }
    }

    pub fn for_mode(mode: CorrelationMode, efficiency: f64) -> Self {
        match mode {
            CorrelationMode::Cross => Self::cross(efficiency),
            CorrelationMode::Auto => Self::auto(),
        }
    }
}

/// Raw visibility from the two bins adjacent to τ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawVisibility {
    pub alpha: f64,
    pub sigma: f64,
    pub on_counts: u64,
    pub off_counts: u64,
    /// Per-window normalization counts in the same bins.
    pub off_average: f64,
}

/// α_r from the on/off ratio r = C_on/C_off at τ ≈ 0, solving
/// `r = base + beat·α` (for a balanced cross measurement, α_r = 1 − 2r).
pub fn raw_visibility(data: &NormalizedHistogram, shape: SignalShape) -> Result<RawVisibility> {
    let [a, b] = data.central_bins();
    let on = data.in_sync_counts[a] + data.in_sync_counts[b];
    let off = data.normalization_counts[a] + data.normalization_counts[b];
    if off == 0 {
        return Err(Error::UndefinedVisibility("no normalization counts at τ ≈ 0".into()));
    }
    if shape.beat == 0.0 {
        return Err(Error::UndefinedVisibility("splitter produces no interference term".into()));
    }
    let off_average = off as f64 / data.window_ratio;
    let r = on as f64 / off_average;
    let rel_var = 1.0 / off as f64 + if on > 0 { 1.0 / on as f64 } else { 0.0 };
    // With zero on-counts the ratio's spread is set by a single count.
    let sigma_r = if on > 0 {
        r * rel_var.sqrt()
    } else {
        1.0 / off_average
    };
    Ok(RawVisibility {
        alpha: (r - shape.base) / shape.beat,
        sigma: sigma_r / shape.beat.abs(),
        on_counts: on,
        off_counts: off,
        off_average,
    })
}
