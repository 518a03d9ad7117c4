use std::path::Path;

use crate::config::{render, KeyValues};
use crate::correlation::DEFAULT_JITTER_SIGMA;
use crate::error::{Error, Result};
use crate::fbs::{splitter_amplitudes, FbsParams, SplitterAmplitudes};
use crate::spectral::ResonatorSpec;

/// Raw normalization coincidences within the 1/e coherence time that the
/// default pair rate is calibrated to produce per hour.
pub const TARGET_NORMALIZATION_COUNTS: f64 = 2700.0;
pub const CALIBRATION_DURATION: f64 = 3600.0;

/// Settings of one simulated counting run.
///
/// `pair_rate` and the detection efficiencies are not known independently;
/// the defaults are fitted so a one-hour pumps-off acquisition collects
/// [`TARGET_NORMALIZATION_COUNTS`] normalization coincidences.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Generated pairs per second (CW source).
    pub pair_rate: f64,
    /// Pump gate length, s.
    pub window_length: f64,
    /// Pump repetition period, s. Holds one synchronized window followed by
    /// unsynchronized windows used for normalization.
    pub window_period: f64,
    pub detection_efficiency_r: f64,
    pub detection_efficiency_b: f64,
    /// Counts per second.
    pub dark_rate_r: f64,
    pub dark_rate_b: f64,
    /// Combined timing jitter of a two-detector delay, s.
    pub jitter_sigma: f64,
    /// Extra independent pairs per coherence time 1/Δω on top of `pair_rate`.
    pub multi_pair_parameter: f64,
    /// Interference ideality α used for conditional outcome sampling.
    pub visibility: f64,
    pub fbs: FbsParams,
    pub source: ResonatorSpec,
    /// Acquisition time, s.
    pub duration: f64,
    pub seed: u64,
    /// Histogram bin width, s.
    pub tau_bin: f64,
    /// Histogram half range, s.
    pub tau_range: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let source = ResonatorSpec::default();
        let mut cfg = Self {
            pair_rate: 0.0,
            window_length: 10e-9,
            window_period: 50e-9,
            detection_efficiency_r: 0.05,
            detection_efficiency_b: 0.05,
            dark_rate_r: 100.0,
            dark_rate_b: 100.0,
            jitter_sigma: DEFAULT_JITTER_SIGMA,
            multi_pair_parameter: 0.0,
            visibility: 1.0,
            fbs: FbsParams {
                pump_separation: source.photon_separation(),
                ..FbsParams::default()
            },
            source,
            duration: CALIBRATION_DURATION,
            seed: 1,
            tau_bin: 100e-12,
            tau_range: 10e-9,
        };
        cfg.pair_rate = cfg.calibrated_pair_rate(TARGET_NORMALIZATION_COUNTS, CALIBRATION_DURATION);
        cfg
    }
}

const KEYS: &[&str] = &[
    "pair_rate",
    "window_length",
    "window_period",
    "detection_efficiency_r",
    "detection_efficiency_b",
    "dark_rate_r",
    "dark_rate_b",
    "jitter_sigma",
    "multi_pair_parameter",
    "visibility",
    "fbs_strength",
    "fbs_pump_phase",
    "fbs_pump_separation",
    "fbs_mismatch",
    "fbs_length",
    "detuning",
    "source_pump_frequency",
    "source_fsr",
    "source_linewidth",
    "source_index",
    "duration",
    "seed",
    "tau_bin",
    "tau_range",
];

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.fbs.validate()?;
        let non_negative = [
            ("pair_rate", self.pair_rate),
            ("dark_rate_r", self.dark_rate_r),
            ("dark_rate_b", self.dark_rate_b),
            ("jitter_sigma", self.jitter_sigma),
            ("multi_pair_parameter", self.multi_pair_parameter),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, "must be finite and non-negative"));
            }
        }
        for (name, v) in [
            ("detection_efficiency_r", self.detection_efficiency_r),
            ("detection_efficiency_b", self.detection_efficiency_b),
            ("visibility", self.visibility),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, "must lie in [0, 1]"));
            }
        }
        for (name, v) in [
            ("window_length", self.window_length),
            ("duration", self.duration),
            ("tau_bin", self.tau_bin),
            ("tau_range", self.tau_range),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if !(self.window_length <= self.window_period) {
            return Err(Error::invalid("window_period", "must be at least window_length"));
        }
        if self.tau_range < self.tau_bin {
            return Err(Error::invalid("tau_range", "must cover at least one bin"));
        }
        Ok(())
    }

    /// ΔΩ = Ω − (ω_B⁰ − ω_R⁰), rad/s.
    pub fn detuning(&self) -> f64 {
        self.fbs.pump_separation - self.source.photon_separation()
    }

    pub fn set_detuning(&mut self, detuning: f64) {
        self.fbs.pump_separation = self.source.photon_separation() + detuning;
    }

    pub fn linewidth(&self) -> f64 {
        self.source.linewidth
    }

    pub fn splitter(&self) -> Result<SplitterAmplitudes> {
        splitter_amplitudes(&self.fbs)
    }

    /// Pairs per second including multi-pair noise pairs.
    pub fn total_pair_rate(&self) -> f64 {
        self.pair_rate + self.multi_pair_parameter * self.source.linewidth
    }

    /// Gate windows per period; the first is synchronized.
    pub fn slots_per_period(&self) -> u64 {
        ((self.window_period / self.window_length) * (1.0 + 1e-12)).floor() as u64
    }

    pub fn periods(&self) -> u64 {
        (self.duration / self.window_period).round() as u64
    }

    /// Probability that a pair with true delay τ is recorded within the
    /// same window: `1 − |τ|/L`.
    pub(crate) fn window_acceptance(&self, tau: f64) -> f64 {
        (1.0 - tau.abs() / self.window_length).max(0.0)
    }

    /// Pair rate giving `target` raw unsynchronized coincidences with
    /// |τ| ≤ 1/Δω over `duration` seconds, ignoring jitter and accidentals.
    pub fn calibrated_pair_rate(&self, target: f64, duration: f64) -> f64 {
        let lw = self.source.linewidth;
        let slots = self.slots_per_period().max(1) as f64;
        let off_fraction = (slots - 1.0) / slots;
        let e1 = (-1.0f64).exp();
        // ∫_{|τ|<1/Δω} (Δω/2)e^{−Δω|τ|}(1 − |τ|/L) dτ
        let in_coherence = (1.0 - e1) - (1.0 - 2.0 * e1) / (lw * self.window_length);
        let eta = self.detection_efficiency_r * self.detection_efficiency_b;
        target / (eta * duration * off_fraction * in_coherence)
    }

    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        kv.reject_unknown(KEYS)?;
        let mut cfg = Self::default();
        macro_rules! set {
            ($key:literal, $field:expr) => {
                if let Some(v) = kv.get($key)? {
                    $field = v;
                }
            };
        }
        set!("pair_rate", cfg.pair_rate);
        set!("window_length", cfg.window_length);
        set!("window_period", cfg.window_period);
        set!("detection_efficiency_r", cfg.detection_efficiency_r);
        set!("detection_efficiency_b", cfg.detection_efficiency_b);
        set!("dark_rate_r", cfg.dark_rate_r);
        set!("dark_rate_b", cfg.dark_rate_b);
        set!("jitter_sigma", cfg.jitter_sigma);
        set!("multi_pair_parameter", cfg.multi_pair_parameter);
        set!("visibility", cfg.visibility);
        set!("fbs_strength", cfg.fbs.strength);
        set!("fbs_pump_phase", cfg.fbs.pump_phase);
        set!("fbs_mismatch", cfg.fbs.mismatch);
        set!("fbs_length", cfg.fbs.length);
        set!("source_pump_frequency", cfg.source.pump_frequency);
        set!("source_fsr", cfg.source.fsr);
        set!("source_linewidth", cfg.source.linewidth);
        set!("duration", cfg.duration);
        set!("seed", cfg.seed);
        set!("tau_bin", cfg.tau_bin);
        set!("tau_range", cfg.tau_range);
        if let Some(m) = kv.get::<i32>("source_index")? {
            cfg.source.signal_index = m;
            cfg.source.idler_index = m;
        }
        // The pump separation follows the source unless set explicitly.
        cfg.fbs.pump_separation = cfg.source.photon_separation();
        match (
            kv.get::<f64>("fbs_pump_separation")?,
            kv.get::<f64>("detuning")?,
        ) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either `fbs_pump_separation` or `detuning`, not both".into(),
                ))
            }
            (Some(sep), None) => cfg.fbs.pump_separation = sep,
            (None, Some(det)) => cfg.set_detuning(det),
            (None, None) => {}
        }
        if kv.get_raw("pair_rate").is_none() {
            cfg.pair_rate =
                cfg.calibrated_pair_rate(TARGET_NORMALIZATION_COUNTS, CALIBRATION_DURATION);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_key_values(&KeyValues::load(path)?)
    }

    /// Every field as `key = value`, in a fixed order. Parsing the output
    /// reproduces the config exactly.
    pub fn to_key_values(&self) -> String {
        let entries = self.entries();
        let pairs: Vec<(&str, String)> = entries.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
        render(&pairs)
    }

    /// Resolved `(key, value)` pairs in the order [`Self::to_key_values`] writes them.
    pub fn entries(&self) -> Vec<(String, String)> {
        let f = |v: f64| format!("{v:e}");
        [
            ("pair_rate", f(self.pair_rate)),
            ("window_length", f(self.window_length)),
            ("window_period", f(self.window_period)),
            ("detection_efficiency_r", f(self.detection_efficiency_r)),
            ("detection_efficiency_b", f(self.detection_efficiency_b)),
            ("dark_rate_r", f(self.dark_rate_r)),
            ("dark_rate_b", f(self.dark_rate_b)),
            ("jitter_sigma", f(self.jitter_sigma)),
            ("multi_pair_parameter", f(self.multi_pair_parameter)),
            ("visibility", f(self.visibility)),
            ("fbs_strength", f(self.fbs.strength)),
            ("fbs_pump_phase", f(self.fbs.pump_phase)),
            ("fbs_pump_separation", f(self.fbs.pump_separation)),
            ("fbs_mismatch", f(self.fbs.mismatch)),
            ("fbs_length", f(self.fbs.length)),
            ("source_pump_frequency", f(self.source.pump_frequency)),
            ("source_fsr", f(self.source.fsr)),
            ("source_linewidth", f(self.source.linewidth)),
            ("source_index", self.source.signal_index.to_string()),
            ("duration", f(self.duration)),
            ("seed", self.seed.to_string()),
            ("tau_bin", f(self.tau_bin)),
            ("tau_range", f(self.tau_range)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect()
    }
}
