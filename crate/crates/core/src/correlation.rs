//! Second-order correlation functions: closed forms, numeric evaluation from
//! two-photon states, and detector-jitter convolution.
//!
//! All curves are in units where the pumps-off G² peak is 1.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fbs::{Sector, TwoPhotonState};
use crate::spectral::fourier_at;

/// Default half range of the delay axis, s.
pub const DEFAULT_TAU_HALF_RANGE: f64 = 8e-9;
/// Default delay spacing, s.
pub const DEFAULT_TAU_SPACING: f64 = 20e-12;
/// Combined (two detectors + tagger) timing jitter, s. Assumed, not measured.
pub const DEFAULT_JITTER_SIGMA: f64 = 40e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveKind {
    CrossRb,
    AutoBb,
    AutoRr,
}

impl CurveKind {
    pub fn label(self) -> &'static str {
        match self {
            CurveKind::CrossRb => "cross_RB",
            CurveKind::AutoBb => "auto_BB",
            CurveKind::AutoRr => "auto_RR",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "cross_RB" => Some(CurveKind::CrossRb),
            "auto_BB" => Some(CurveKind::AutoBb),
            "auto_RR" => Some(CurveKind::AutoRr),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveSource {
    Analytic,
    Numeric,
    Measured,
}

impl CurveSource {
    pub fn label(self) -> &'static str {
        match self {
            CurveSource::Analytic => "analytic",
            CurveSource::Numeric => "numeric",
            CurveSource::Measured => "measured",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "analytic" => Some(CurveSource::Analytic),
            "numeric" => Some(CurveSource::Numeric),
            "measured" => Some(CurveSource::Measured),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2Curve {
    pub tau: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: CurveKind,
    pub source: CurveSource,
    /// Parameters the curve was produced with, in insertion order.
    pub parameters: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

impl G2Curve {
    pub fn new(tau: Vec<f64>, values: Vec<f64>, kind: CurveKind, source: CurveSource) -> Self {
        Self {
            tau,
            values,
            kind,
            source,
            parameters: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn with_param(mut self, name: &str, value: f64) -> Self {
        self.parameters.push((name.to_owned(), value));
        self
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(k, _)| k == name).map(|p| p.1)
    }

    pub fn spacing(&self) -> Option<f64> {
        uniform_spacing(&self.tau)
    }

    /// Σ values·Δτ on a uniform axis.
    pub fn integral(&self) -> f64 {
        self.spacing().unwrap_or(0.0) * self.values.iter().sum::<f64>()
    }

    pub fn value_at_zero(&self) -> Option<f64> {
        let i = self.tau.iter().position(|&t| t.abs() < 1e-18)?;
        Some(self.values[i])
    }
}

/// Symmetric axis `−half_range..=half_range` in steps of `spacing`, with 0
/// on a sample.
pub fn tau_axis(half_range: f64, spacing: f64) -> Result<Vec<f64>> {
    if !(spacing > 0.0) || !(half_range >= 0.0) {
        return Err(Error::invalid("tau_axis", "spacing must be positive"));
    }
    let n = (half_range / spacing).round() as i64;
    Ok((-n..=n).map(|i| i as f64 * spacing).collect())
}

pub fn default_tau_axis() -> Vec<f64> {
    tau_axis(DEFAULT_TAU_HALF_RANGE, DEFAULT_TAU_SPACING).expect("default axis is valid")
}

fn uniform_spacing(tau: &[f64]) -> Option<f64> {
    if tau.len() < 2 {
        return None;
    }
    let d = (tau[tau.len() - 1] - tau[0]) / (tau.len() - 1) as f64;
    let ok = tau
        .windows(2)
        .all(|w| ((w[1] - w[0]) - d).abs() <= 1e-6 * d.abs());
    (ok && d > 0.0).then_some(d)
}

/// `A·e^{−Δω|τ−t₀|}·(½ − (α/2)cos ΔΩ(τ−t₀)) + B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatModel {
    /// Δω, rad/s.
    pub linewidth: f64,
    /// ΔΩ, rad/s.
    pub detuning: f64,
    /// α in [0, 1].
    pub visibility: f64,
    pub amplitude: f64,
    /// t₀, s.
    pub offset: f64,
    pub background: f64,
}

impl BeatModel {
    pub fn ideal(linewidth: f64, detuning: f64, visibility: f64) -> Self {
        Self {
            linewidth,
            detuning,
            visibility,
            amplitude: 1.0,
            offset: 0.0,
            background: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.linewidth > 0.0) || !self.linewidth.is_finite() {
            return Err(Error::invalid("linewidth", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::invalid("visibility", "must lie in [0, 1]"));
        }
        if !(self.background >= 0.0) {
            return Err(Error::invalid("background", "must be non-negative"));
        }
        Ok(())
    }

    #[inline]
    pub fn evaluate(&self, tau: f64) -> f64 {
        let u = tau - self.offset;
        self.amplitude
            * (-self.linewidth * u.abs()).exp()
            * (0.5 - 0.5 * self.visibility * (self.detuning * u).cos())
            + self.background
    }
}

/// Beating curve after a balanced splitter, pumps-off peak = 1.
pub fn g2_cross_analytic(
    linewidth: f64,
    detuning: f64,
    visibility: f64,
    tau: &[f64],
) -> Result<G2Curve> {
    let model = BeatModel::ideal(linewidth, detuning, visibility);
    model.validate()?;
    let values = tau.iter().map(|&t| model.evaluate(t)).collect();
    Ok(G2Curve::new(tau.to_vec(), values, CurveKind::CrossRb, CurveSource::Analytic)
        .with_param("linewidth_rad_s", linewidth)
        .with_param("detuning_rad_s", detuning)
        .with_param("visibility", visibility))
}

/// `e^{−Δω|τ|}`.
pub fn g2_pumps_off_analytic(linewidth: f64, tau: &[f64]) -> Result<G2Curve> {
    if !(linewidth > 0.0) {
        return Err(Error::invalid("linewidth", "must be positive"));
    }
    let values = tau.iter().map(|&t| (-linewidth * t.abs()).exp()).collect();
    Ok(G2Curve::new(tau.to_vec(), values, CurveKind::CrossRb, CurveSource::Analytic)
        .with_param("linewidth_rad_s", linewidth))
}

/// G² of one output sector by direct Fourier quadrature of its amplitude.
///
/// For bunched sectors the two photons are indistinguishable and the
/// detection amplitude carries a factor √2.
pub fn g2_numeric(state: &TwoPhotonState, sector: Sector, tau: &[f64]) -> Result<G2Curve> {
    let limit = state.grid.nyquist_delay();
    if let Some(&bad) = tau.iter().find(|t| t.abs() > limit) {
        return Err(Error::Aliasing { tau: bad, limit });
    }
    if !(state.reference_peak > 0.0) {
        return Err(Error::invalid("state", "source amplitude has zero pumps-off peak"));
    }
    let amplitude: Vec<Complex64> = state.sector_amplitude(sector);
    let scale = match sector {
        Sector::Cross => 1.0,
        Sector::BothRed | Sector::BothBlue => 2.0,
    } / state.reference_peak;
    let values: Vec<f64> = tau
        .par_iter()
        .map(|&t| scale * fourier_at(&state.grid, &amplitude, t).norm_sqr())
        .collect();
    let kind = match sector {
        Sector::Cross => CurveKind::CrossRb,
        Sector::BothRed => CurveKind::AutoRr,
        Sector::BothBlue => CurveKind::AutoBb,
    };
    let weight = state.sector_weight(sector);
    let mut curve = G2Curve::new(tau.to_vec(), values, kind, CurveSource::Numeric)
        .with_param("sector_weight", weight)
        .with_param("envelope_offset_rad_s", state.envelope_offset);
    if weight == 0.0 {
        curve.warnings.push(format!("empty {} sector", sector.label()));
    }
    Ok(curve)
}

/// Autocorrelation of the both-blue (`blue = true`) or both-red sector.
/// The `sector_weight` parameter carries the sector probability.
pub fn g2_auto_bunched(state: &TwoPhotonState, blue: bool, tau: &[f64]) -> Result<G2Curve> {
    let sector = if blue { Sector::BothBlue } else { Sector::BothRed };
    g2_numeric(state, sector, tau)
}

/// Contrast reduction of a `cos ΔΩτ` term under Gaussian jitter.
pub fn jitter_damping(detuning: f64, sigma: f64) -> f64 {
    (-0.5 * (detuning * sigma).powi(2)).exp()
}

/// Leakage past the axis tolerated before asking for padding.
pub const MAX_BOUNDARY_LEAKAGE: f64 = 1e-3;

/// Discrete Gaussian convolution with standard deviation `sigma`.
pub fn convolve_jitter(curve: &G2Curve, sigma: f64) -> Result<G2Curve> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", "must be finite and non-negative"));
    }
    let dt = curve
        .spacing()
        .ok_or_else(|| Error::invalid("tau", "convolution needs a uniform axis"))?;
    let mut out = curve.clone();
    out.parameters.push(("jitter_sigma_s".into(), sigma));
    if sigma == 0.0 {
        return Ok(out);
    }
    let half = (8.0 * sigma / dt).ceil() as i64;
    let mut kernel: Vec<f64> = (-half..=half)
        .map(|k| (-0.5 * (k as f64 * dt / sigma).powi(2)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= total);

    let n = curve.values.len() as i64;
    out.values = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for (j, w) in (-half..=half).zip(&kernel) {
                let src = i - j;
                if (0..n).contains(&src) {
                    acc += w * curve.values[src as usize];
                }
            }
            acc
        })
        .collect();
    let before: f64 = curve.values.iter().sum();
    let after: f64 = out.values.iter().sum();
    if before > 0.0 {
        let leaked = (before - after) / before;
        if leaked > MAX_BOUNDARY_LEAKAGE {
            return Err(Error::BoundaryLeakage { leaked });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbs::{apply_fbs_two_photon, FbsParams, BALANCED_STRENGTH};
    use crate::spectral::{apply_envelope_offset, build_ring_jsa, FrequencyGrid, ResonatorSpec};
    use crate::TWO_PI;
    use approx::assert_relative_eq;

    const LW: f64 = TWO_PI * 270e6;

    #[test]
    fn analytic_null_and_half_height() {
        let tau = default_tau_axis();
        let null = g2_cross_analytic(LW, 0.0, 1.0, &tau).unwrap();
        assert!(null.values.iter().all(|&v| v.abs() < 1e-300 || v == 0.0));
        let flat = g2_cross_analytic(LW, TWO_PI * 300e6, 0.0, &tau).unwrap();
        for (t, v) in tau.iter().zip(&flat.values) {
            assert_relative_eq!(*v, 0.5 * (-LW * t.abs()).exp(), max_relative = 1e-15);
        }
    }

    #[test]
    fn analytic_zeros_at_beat_period() {
        let det = TWO_PI * 300e6;
        let period = TWO_PI / det;
        assert_relative_eq!(period, 3.3333e-9, max_relative = 1e-4);
        let tau = [period, 2.0 * period, -period];
        let c = g2_cross_analytic(LW, det, 1.0, &tau).unwrap();
        assert!(c.values.iter().all(|&v| v < 1e-15));
        // α = 1 equals e^{−Δω|τ|} sin²(ΔΩτ/2)
        let c = g2_cross_analytic(LW, det, 1.0, &[0.7e-9]).unwrap();
        let expected = (-LW * 0.7e-9).exp() * (det * 0.7e-9 / 2.0).sin().powi(2);
        assert_relative_eq!(c.values[0], expected, max_relative = 1e-12);
    }

    #[test]
    fn analytic_rejects_visibility_out_of_range() {
        assert!(g2_cross_analytic(LW, 0.0, 1.2, &[0.0]).is_err());
        assert!(g2_cross_analytic(LW, 0.0, -0.1, &[0.0]).is_err());
    }

    #[test]
    fn pumps_off_one_over_e() {
        let c = g2_pumps_off_analytic(LW, &[0.0, 1.0 / LW, 1e-6]).unwrap();
        assert_eq!(c.values[0], 1.0);
        assert_relative_eq!(c.values[1], (-1.0f64).exp(), max_relative = 1e-15);
        assert!((1.0 / LW - 0.589e-9).abs() < 1e-12);
        assert!(c.values[2] < 1e-300);
    }

    #[test]
    fn numeric_rejects_aliasing() {
        let spec = ResonatorSpec::default();
        let jsa = build_ring_jsa(&spec, FrequencyGrid::default_for(spec.linewidth).unwrap()).unwrap();
        let state = TwoPhotonState::from_jsa(&jsa).unwrap();
        let limit = state.grid.nyquist_delay();
        assert!(matches!(
            g2_numeric(&state, Sector::Cross, &[2.0 * limit]),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn bunched_sector_empty_without_conversion() {
        let spec = ResonatorSpec::default();
        let jsa = build_ring_jsa(&spec, FrequencyGrid::default_for(spec.linewidth).unwrap()).unwrap();
        let state = TwoPhotonState::from_jsa(&jsa).unwrap();
        let out = apply_fbs_two_photon(&state, &FbsParams::with_strength(0.0)).unwrap();
        let c = g2_auto_bunched(&out, true, &[0.0, 1e-9]).unwrap();
        assert_eq!(c.parameter("sector_weight"), Some(0.0));
        assert!(c.values.iter().all(|&v| v == 0.0));
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn bunched_weight_doubles_at_null() {
        let spec = ResonatorSpec::default();
        let jsa = build_ring_jsa(&spec, FrequencyGrid::default_for(spec.linewidth).unwrap()).unwrap();
        let state = TwoPhotonState::from_jsa(&jsa).unwrap();
        let out = apply_fbs_two_photon(&state, &FbsParams::with_strength(BALANCED_STRENGTH)).unwrap();
        let c = g2_auto_bunched(&out, true, &[0.0]).unwrap();
        assert_relative_eq!(c.parameter("sector_weight").unwrap() / 0.25, 2.0, epsilon = 1e-10);

        let offset = TWO_PI * 5e9;
        let grid = FrequencyGrid::commensurate(spec.linewidth, offset, 4096).unwrap();
        let jsa = apply_envelope_offset(&build_ring_jsa(&spec, grid).unwrap(), offset).unwrap();
        let out = apply_fbs_two_photon(
            &TwoPhotonState::from_jsa(&jsa).unwrap(),
            &FbsParams::with_strength(BALANCED_STRENGTH),
        )
        .unwrap();
        let c = g2_auto_bunched(&out, true, &[0.0]).unwrap();
        assert!((c.parameter("sector_weight").unwrap() - 0.25).abs() < 1e-2);
    }

    #[test]
    fn jitter_identity_and_integral() {
        let tau = default_tau_axis();
        let c = g2_cross_analytic(LW, TWO_PI * 300e6, 0.9, &tau).unwrap();
        let same = convolve_jitter(&c, 0.0).unwrap();
        assert_eq!(same.values, c.values);
        let smeared = convolve_jitter(&c, 100e-12).unwrap();
        assert_relative_eq!(smeared.integral(), c.integral(), max_relative = 1e-6);
    }

    #[test]
    fn jitter_washes_out_fast_fringes() {
        let tau = default_tau_axis();
        let det = TWO_PI * 5e9;
        let c = g2_cross_analytic(LW, det, 1.0, &tau).unwrap();
        let smeared = convolve_jitter(&c, 100e-12).unwrap();
        let flat = g2_cross_analytic(LW, det, 0.0, &tau).unwrap();
        let flat_smeared = convolve_jitter(&flat, 100e-12).unwrap();
        let contrast = |v: &[f64], reference: &[f64]| {
            v.iter()
                .zip(reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let before = contrast(&c.values, &flat.values);
        let after = contrast(&smeared.values, &flat_smeared.values);
        assert!(after < 0.05 * before, "{after} vs {before}");
        assert!(jitter_damping(det, 100e-12) < 1e-2);
    }

    #[test]
    fn jitter_damping_matches_discrete_convolution() {
        // A pure cosine under a flat envelope isolates the damping factor.
        let tau = tau_axis(20e-9, 5e-12).unwrap();
        let det = TWO_PI * 300e6;
        let values = tau.iter().map(|&t| 1.0 + (det * t).cos()).collect();
        let c = G2Curve::new(tau.clone(), values, CurveKind::CrossRb, CurveSource::Analytic);
        let sigma = 100e-12;
        let smeared = convolve_jitter(&c, sigma);
        // A flat curve leaks at both ends.
        assert!(matches!(smeared, Err(Error::BoundaryLeakage { .. })));

        let envelope = |t: f64| (-(t / 6e-9).powi(2)).exp();
        let values = tau.iter().map(|&t| envelope(t) * (det * t).cos()).collect();
        let c = G2Curve::new(tau.clone(), values, CurveKind::CrossRb, CurveSource::Analytic);
        let smeared = convolve_jitter(&c, sigma).unwrap();
        let mid = tau.len() / 2;
        let measured = smeared.values[mid] / c.values[mid];
        assert_relative_eq!(measured, jitter_damping(det, sigma), max_relative = 1e-3);
        assert_relative_eq!(jitter_damping(det, sigma), 0.9824, max_relative = 1e-3);
    }

    #[test]
    fn leakage_flagged() {
        let tau = tau_axis(1e-9, 20e-12).unwrap();
        let c = g2_pumps_off_analytic(LW, &tau).unwrap();
        assert!(matches!(
            convolve_jitter(&c, 400e-12),
            Err(Error::BoundaryLeakage { .. })
        ));
    }
}
