//! Biphoton joint spectral amplitude of a CW-pumped microring pair source.
//!
//! Under CW pumping the pair's frequencies obey `ω_B = 2ω_P − ω_R`, so the
//! two-dimensional amplitude collapses onto a line. We store it as a
//! function of the red photon's detuning `ν = ω_R − ω_R⁰` on a uniform,
//! mirror-symmetric grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::TWO_PI;

/// Speed of light in vacuum, m/s.
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Minimum number of grid points per linewidth.
pub const MIN_POINTS_PER_LINEWIDTH: f64 = 16.0;
/// Minimum grid span in linewidths.
pub const MIN_SPAN_LINEWIDTHS: f64 = 80.0;
/// Points used by [`FrequencyGrid::correlation_grade`].
pub const CORRELATION_GRID_POINTS: usize = 1 << 19;

/// Parameters of the spontaneous four-wave-mixing pair source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorSpec {
    /// Absolute angular frequency of the SFWM pump, rad/s.
    pub pump_frequency: f64,
    /// Free spectral range, Hz.
    pub fsr: f64,
    /// Full width at half maximum of each resonance, rad/s.
    pub linewidth: f64,
    pub signal_index: i32,
    pub idler_index: i32,
}

impl Default for ResonatorSpec {
    fn default() -> Self {
        Self {
            // 1282.8 nm
            pump_frequency: TWO_PI * SPEED_OF_LIGHT / 1282.8e-9,
            fsr: 201.275e9,
            linewidth: TWO_PI * 270e6,
            signal_index: 2,
            idler_index: 2,
        }
    }
}

impl ResonatorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.linewidth > 0.0) || !self.linewidth.is_finite() {
            return Err(Error::invalid("linewidth", "must be positive and finite"));
        }
        if !(self.fsr > 0.0) || !self.fsr.is_finite() {
            return Err(Error::invalid("fsr", "must be positive and finite"));
        }
        if self.signal_index != self.idler_index {
            return Err(Error::invalid(
                "idler_index",
                "pairs occupy mirror resonances; signal and idler indices must match",
            ));
        }
        if self.signal_index < 1 {
            return Err(Error::invalid("signal_index", "must be at least 1"));
        }
        Ok(())
    }

    /// Red resonance center ω_R⁰, rad/s.
    pub fn red_center(&self) -> f64 {
        self.pump_frequency - self.signal_index as f64 * TWO_PI * self.fsr
    }

    /// Blue resonance center ω_B⁰, rad/s.
    pub fn blue_center(&self) -> f64 {
        self.pump_frequency + self.idler_index as f64 * TWO_PI * self.fsr
    }

    /// ω_B⁰ − ω_R⁰ in rad/s, computed without cancellation.
    pub fn photon_separation(&self) -> f64 {
        TWO_PI * (2 * self.signal_index) as f64 * self.fsr
    }
}

/// Uniform grid over detuning. Points sit at `center + (i − (n−1)/2)·δ`
/// with `δ = span/(n−1)`, so detunings are exact negatives of each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub center: f64,
    pub span: f64,
    pub n_points: usize,
}

impl FrequencyGrid {
    pub fn new(center: f64, span: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::Resolution(format!(
                "n_points = {n_points} must be a power of two and at least 2"
            )));
        }
        if !(span > 0.0) || !span.is_finite() || !center.is_finite() {
            return Err(Error::Resolution(format!(
                "span = {span:e} must be positive and finite"
            )));
        }
        Ok(Self {
            center,
            span,
            n_points,
        })
    }

    /// 128 linewidths over 4096 points.
    pub fn default_for(linewidth: f64) -> Result<Self> {
        Self::new(0.0, 128.0 * linewidth, 4096)
    }

    /// Smallest-stride grid of `n_points` whose spacing divides `offset`
    /// exactly and resolves the linewidth.
    pub fn commensurate(linewidth: f64, offset: f64, n_points: usize) -> Result<Self> {
        if !(linewidth > 0.0) {
            return Err(Error::invalid("linewidth", "must be positive"));
        }
        let max_spacing = linewidth / MIN_POINTS_PER_LINEWIDTH;
        let spacing = if offset == 0.0 {
            max_spacing
        } else {
            let bins = (offset.abs() / max_spacing).ceil().max(1.0);
            offset.abs() / bins
        };
        Self::new(0.0, spacing * (n_points - 1) as f64, n_points)
    }

    /// Wide grid for numeric correlation functions. Lorentzian amplitude
    /// tails fall off only as 1/ν², so ~3·10⁴ linewidths are needed to
    /// hold the transform to 1e−4.
    pub fn correlation_grade(linewidth: f64, offset: f64) -> Result<Self> {
        Self::commensurate(linewidth, offset, CORRELATION_GRID_POINTS)
    }

    pub fn spacing(&self) -> f64 {
        self.span / (self.n_points - 1) as f64
    }

    /// Detuning of point `i` from the grid center.
    #[inline]
    pub fn detuning(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * (self.n_points - 1) as f64) * self.spacing()
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.center + self.detuning(i)
    }

    pub fn detunings(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.detuning(i))
    }

    /// Largest |τ| the sampled spectrum can represent without aliasing.
    pub fn nyquist_delay(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    /// Checks spacing and span against a resonance linewidth.
    pub fn check_resolves(&self, linewidth: f64) -> Result<()> {
        let spacing = self.spacing();
        if spacing > linewidth / MIN_POINTS_PER_LINEWIDTH * (1.0 + 1e-12) {
            return Err(Error::Resolution(format!(
                "spacing {spacing:e} rad/s exceeds linewidth/16 = {:e} rad/s",
                linewidth / MIN_POINTS_PER_LINEWIDTH
            )));
        }
        if self.span < MIN_SPAN_LINEWIDTHS * linewidth {
            return Err(Error::Resolution(format!(
                "span {:e} rad/s covers fewer than 80 linewidths",
                self.span
            )));
        }
        Ok(())
    }

    /// Integer number of grid steps in `offset`, if it is one.
    pub fn steps_in(&self, offset: f64) -> Option<i64> {
        let ratio = offset / self.spacing();
        let rounded = ratio.round();
        ((ratio - rounded).abs() <= 1e-6 * rounded.abs().max(1.0)).then_some(rounded as i64)
    }
}

/// How the CW delta function was collapsed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConstraint {
    /// ω_P of `ω_B = 2ω_P − ω_R`; zero when unknown (imported data).
    pub pump_frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectralAmplitude {
    pub grid: FrequencyGrid,
    pub amplitude: Vec<Complex64>,
    pub constraint: EnergyConstraint,
    /// ΔΩ seen by a downstream beam splitter, rad/s.
    pub envelope_offset: f64,
    norm: f64,
}

impl JointSpectralAmplitude {
    pub fn from_samples(grid: FrequencyGrid, amplitude: Vec<Complex64>) -> Result<Self> {
        if amplitude.len() != grid.n_points {
            return Err(Error::invalid(
                "amplitude",
                format!("{} samples for a {}-point grid", amplitude.len(), grid.n_points),
            ));
        }
        let norm = intensity_integral(&grid, &amplitude);
        Ok(Self {
            grid,
            amplitude,
            constraint: EnergyConstraint { pump_frequency: 0.0 },
            envelope_offset: 0.0,
            norm,
        })
    }

    /// ∫|φ|²dν.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn normalize(mut self) -> Result<Self> {
        if !(self.norm > 0.0) || !self.norm.is_finite() {
            return Err(Error::invalid("amplitude", "cannot normalize a zero amplitude"));
        }
        let scale = self.norm.sqrt().recip();
        for a in &mut self.amplitude {
            *a *= scale;
        }
        self.norm = intensity_integral(&self.grid, &self.amplitude);
        Ok(self)
    }

    pub fn intensity(&self) -> impl Iterator<Item = f64> + '_ {
        self.amplitude.iter().map(|a| a.norm_sqr())
    }

    /// ∫φ(ν)e^{−iντ}dν by direct quadrature.
    pub fn fourier_amplitude(&self, tau: f64) -> Complex64 {
        fourier_at(&self.grid, &self.amplitude, tau)
    }
}

/// Ring resonance response `l(ν) = (Δω/2)^{1/2} / (−iν + Δω/2)`.
pub fn lorentzian_lineshape(detuning: f64, linewidth: f64) -> Result<Complex64> {
    if !(linewidth > 0.0) || !linewidth.is_finite() {
        return Err(Error::invalid("linewidth", "must be positive and finite"));
    }
    Ok(lineshape(detuning, linewidth))
}

#[inline]
fn lineshape(detuning: f64, linewidth: f64) -> Complex64 {
    let half = 0.5 * linewidth;
    Complex64::new(half.sqrt(), 0.0) / Complex64::new(half, -detuning)
}

/// Normalized ring JSA `φ(ν) ∝ l(ν)·l(−ν)`; the second factor is the blue
/// resonance evaluated at `ω_B = 2ω_P − ω_R`.
pub fn build_ring_jsa(spec: &ResonatorSpec, grid: FrequencyGrid) -> Result<JointSpectralAmplitude> {
    spec.validate()?;
    grid.check_resolves(spec.linewidth)?;
    let amplitude = grid
        .detunings()
        .map(|nu| lineshape(nu, spec.linewidth) * lineshape(-nu, spec.linewidth))
        .collect();
    let mut jsa = JointSpectralAmplitude::from_samples(grid, amplitude)?.normalize()?;
    jsa.constraint.pump_frequency = spec.pump_frequency;
    Ok(jsa)
}

/// Relabels the envelope centers so a downstream splitter sees a
/// pump-separation mismatch `offset`. Amplitudes are untouched.
pub fn apply_envelope_offset(
    jsa: &JointSpectralAmplitude,
    offset: f64,
) -> Result<JointSpectralAmplitude> {
    if !offset.is_finite() || offset.abs() >= jsa.grid.span / 4.0 {
        return Err(Error::Resolution(format!(
            "offset {offset:e} rad/s must be below a quarter of the span ({:e})",
            jsa.grid.span / 4.0
        )));
    }
    if jsa.grid.steps_in(offset).is_none() {
        return Err(Error::Resolution(format!(
            "offset {offset:e} rad/s is not a whole number of grid steps ({:e}); \
             build the grid with FrequencyGrid::commensurate",
            jsa.grid.spacing()
        )));
    }
    let mut out = jsa.clone();
    out.envelope_offset = offset;
    Ok(out)
}

pub(crate) fn intensity_integral(grid: &FrequencyGrid, amplitude: &[Complex64]) -> f64 {
    grid.spacing() * pairwise_sum(amplitude, |a| a.norm_sqr())
}

fn pairwise_sum<T>(xs: &[T], f: impl Fn(&T) -> f64 + Copy) -> f64 {
    if xs.len() <= 256 {
        return xs.iter().map(f).sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid], f) + pairwise_sum(&xs[mid..], f)
}

const ANCHOR_BLOCK: usize = 512;

/// `δ·Σ a_k e^{−i d_k τ}` over grid detunings `d_k`.
///
/// The phasor advances by repeated multiplication and is re-anchored to an
/// exact value every block, which keeps round-off at the 1e−13 level on
/// 2^19-point grids.
pub fn fourier_at(grid: &FrequencyGrid, amplitude: &[Complex64], tau: f64) -> Complex64 {
    let spacing = grid.spacing();
    let step = Complex64::from_polar(1.0, -spacing * tau);
    let mut total = Complex64::new(0.0, 0.0);
    for (block, chunk) in amplitude.chunks(ANCHOR_BLOCK).enumerate() {
        let first = block * ANCHOR_BLOCK;
        let mut phasor = Complex64::from_polar(1.0, -grid.detuning(first) * tau);
        let mut partial = Complex64::new(0.0, 0.0);
        for a in chunk {
            partial += a * phasor;
            phasor *= step;
        }
        total += partial;
    }
    total * spacing
}
