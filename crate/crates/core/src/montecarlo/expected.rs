use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::engine::{outcome_probabilities, poisson, CorrelationMode};
use super::histogram::{CorrelationHistogram, NormalizationSource};
use crate::error::Result;

/// Mean counts per bin for both histogram partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedHistogram {
    pub tau_bin: f64,
    pub window_length: f64,
    pub in_sync: Vec<f64>,
    pub normalization: Vec<f64>,
    pub normalization_source: NormalizationSource,
    pub sync_windows: u64,
    pub normalization_windows: u64,
}

impl ExpectedHistogram {
    pub fn bin_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5 - (self.in_sync.len() / 2) as f64) * self.tau_bin
    }
}

/// Mean histogram the simulator converges to: pair correlations weighted by
/// outcome probability and window acceptance, convolved with the jitter, plus
/// a triangular accidental floor.
pub fn expected_histogram(cfg: &ExperimentConfig, mode: CorrelationMode) -> Result<ExpectedHistogram> {
    cfg.validate()?;
    let amps = cfg.splitter()?;
    let template = CorrelationHistogram::empty(
        cfg.tau_bin,
        cfg.tau_range,
        cfg.window_length,
        NormalizationSource::OffSync,
    );
    let n_bins = template.n_bins();
    let half = template.half_range();
    let periods = cfg.periods();
    let slots = cfg.slots_per_period();
    let lw = cfg.linewidth();
    let detuning = cfg.detuning();
    let rate = cfg.total_pair_rate();
    let l_w = cfg.window_length;
    let sigma = cfg.jitter_sigma;

    let mut h = cfg.tau_bin / 16.0;
    if sigma > 0.0 {
        h = h.min(sigma / 4.0);
    }
    let pad = 8.0 * sigma;
    let n_fine = (((2.0 * (half + pad)) / h).ceil() as usize).max(1);
    let fine_tau = |k: usize| -half - pad + (k as f64 + 0.5) * h;

    let density = |weight: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let f: Vec<f64> = (0..n_fine)
            .map(|k| {
                let tau = fine_tau(k);
                0.5 * lw * (-lw * tau.abs()).exp() * weight(tau) * cfg.window_acceptance(tau)
            })
            .collect();
        let g = if sigma > 0.0 {
            let m = (pad / h).ceil() as isize;
            let kernel: Vec<f64> = (-m..=m)
                .map(|j| (-0.5 * (j as f64 * h / sigma).powi(2)).exp())
                .collect();
            let norm: f64 = kernel.iter().sum();
            (0..n_fine as isize)
                .map(|k| {
                    let mut acc = 0.0;
                    for (idx, w) in kernel.iter().enumerate() {
                        let src = k + idx as isize - m;
                        if src >= 0 && (src as usize) < n_fine {
                            acc += w * f[src as usize];
                        }
                    }
                    acc / norm
                })
                .collect()
        } else {
            f
        };
        let mut bins = vec![0.0; n_bins];
        for (k, v) in g.iter().enumerate() {
            let tau = fine_tau(k);
            if let Some(b) = template.bin_of(tau) {
                bins[b] += v * h;
            }
        }
        bins
    };

    let accidental = |s_a: f64, s_b: f64, windows: f64| -> Vec<f64> {
        (0..n_bins)
            .map(|i| {
                let tau = template.bin_center(i);
                windows * s_a * s_b * (l_w - tau.abs()).max(0.0) * cfg.tau_bin
            })
            .collect()
    };

    let sync_time = periods as f64 * l_w;
    let off_windows = periods * slots.saturating_sub(1);
    let (in_sync, normalization, source, norm_windows) = match mode {
        CorrelationMode::Cross => {
            let eta = cfg.detection_efficiency_r * cfg.detection_efficiency_b;
            let s_r = rate * cfg.detection_efficiency_r + cfg.dark_rate_r;
            let s_b = rate * cfg.detection_efficiency_b + cfg.dark_rate_b;
            let on = density(&|tau| outcome_probabilities(&amps, cfg.visibility, detuning, tau).0);
            let off = density(&|_| 1.0);
            let acc_on = accidental(s_r, s_b, periods as f64);
            let acc_off = accidental(s_r, s_b, off_windows as f64);
            let k_on = rate * eta * sync_time;
            let k_off = rate * eta * off_windows as f64 * l_w;
            (
                on.iter().zip(&acc_on).map(|(v, a)| k_on * v + a).collect(),
                off.iter().zip(&acc_off).map(|(v, a)| k_off * v + a).collect(),
                NormalizationSource::OffSync,
                off_windows,
            )
        }
        CorrelationMode::Auto => {
            let k = rate * cfg.detection_efficiency_b.powi(2) * 0.5 * sync_time;
            let s = 0.5 * rate * cfg.detection_efficiency_b + cfg.dark_rate_b;
            let acc = accidental(s, s, periods as f64);
            let on = density(&|tau| outcome_probabilities(&amps, cfg.visibility, detuning, tau).2);
            let reference = density(&|tau| outcome_probabilities(&amps, 0.0, detuning, tau).2);
            (
                on.iter().zip(&acc).map(|(v, a)| k * v + a).collect(),
                reference.iter().zip(&acc).map(|(v, a)| k * v + a).collect(),
                NormalizationSource::Reference,
                periods,
            )
        }
    };
    Ok(ExpectedHistogram {
        tau_bin: cfg.tau_bin,
        window_length: cfg.window_length,
        in_sync,
        normalization,
        normalization_source: source,
        sync_windows: periods,
        normalization_windows: norm_windows,
    })
}

/// Poisson draw of every bin of [`expected_histogram`]. Much cheaper than a
/// full event simulation and suited to ensemble studies of the estimators.
pub fn synthetic_histogram(
    cfg: &ExperimentConfig,
    mode: CorrelationMode,
    seed: u64,
) -> Result<CorrelationHistogram> {
    let expected = expected_histogram(cfg, mode)?;
    Ok(sample_histogram(&expected, seed))
}

pub fn sample_histogram(expected: &ExpectedHistogram, seed: u64) -> CorrelationHistogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |v: &[f64]| v.iter().map(|&m| poisson(&mut rng, m)).collect::<Vec<_>>();
    let in_sync = draw(&expected.in_sync);
    let normalization = draw(&expected.normalization);
    CorrelationHistogram {
        tau_bin: expected.tau_bin,
        window_length: expected.window_length,
        in_sync,
        normalization,
        normalization_source: expected.normalization_source,
        sync_windows: expected.sync_windows,
        normalization_windows: expected.normalization_windows,
        warnings: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::config::TARGET_NORMALIZATION_COUNTS;

    #[test]
    fn default_calibration_hits_target() {
        let cfg = ExperimentConfig {
            dark_rate_r: 0.0,
            dark_rate_b: 0.0,
            jitter_sigma: 0.0,
            ..ExperimentConfig::default()
        };
        let e = expected_histogram(&cfg, CorrelationMode::Cross).unwrap();
        let within: f64 = (0..e.normalization.len())
            .filter(|&i| e.bin_center(i).abs() <= 1.0 / cfg.linewidth())
            .map(|i| e.normalization[i])
            .sum();
        // Bin-center selection clips the ±1/Δω edges slightly.
        let rel = (within - TARGET_NORMALIZATION_COUNTS).abs() / TARGET_NORMALIZATION_COUNTS;
        assert!(rel < 0.05, "within {within}");
    }

    #[test]
    fn synthetic_is_reproducible() {
        let cfg = ExperimentConfig::default();
        let a = synthetic_histogram(&cfg, CorrelationMode::Cross, 5).unwrap();
        let b = synthetic_histogram(&cfg, CorrelationMode::Cross, 5).unwrap();
        assert_eq!(a, b);
    }
}
