//! Bragg-scattering frequency beam splitter acting on the two-bin
//! frequency space {|ω_R⟩, |ω_B⟩}.
//!
//! A single photon maps as
//!
//! ```text
//! |R, x⟩ → υ|R, x⟩ − μ|B, x + ΔΩ⟩
//! |B, x⟩ → μ*|R, x − ΔΩ⟩ + υ*|B, x⟩
//! ```
//!
//! where `x` is the detuning from the arm's envelope center and ΔΩ is the
//! mismatch between the pump separation and the envelope separation.
//! Frequency shifts are whole grid steps, so the transform is exact on the
//! grid apart from amplitude pushed past the grid edge.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{intensity_integral, FrequencyGrid, JointSpectralAmplitude};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbsParams {
    /// γPL, dimensionless.
    pub strength: f64,
    /// Relative pump phase φ, radians.
    pub pump_phase: f64,
    /// Ω = ω_P1 − ω_P2, rad/s.
    pub pump_separation: f64,
    /// Phase mismatch Δβ, rad/m.
    pub mismatch: f64,
    /// Interaction length L, m. Only `mismatch·length` enters the amplitudes.
    pub length: f64,
}

impl Default for FbsParams {
    fn default() -> Self {
        Self {
            strength: BALANCED_STRENGTH,
            pump_phase: 0.0,
            pump_separation: crate::TWO_PI * 805.1e9,
            mismatch: 0.0,
            length: 1.0,
        }
    }
}

/// γPL giving a 50:50 splitter.
pub const BALANCED_STRENGTH: f64 = std::f64::consts::PI / 8.0;
/// γPL giving full conversion.
pub const FULL_CONVERSION_STRENGTH: f64 = std::f64::consts::PI / 4.0;

impl FbsParams {
    pub fn with_strength(strength: f64) -> Self {
        Self {
            strength,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strength >= 0.0) || !self.strength.is_finite() {
            return Err(Error::invalid("strength", "must be finite and non-negative"));
        }
        if !self.pump_phase.is_finite() || !self.mismatch.is_finite() {
            return Err(Error::invalid("pump_phase", "phase and mismatch must be finite"));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::invalid("length", "must be positive"));
        }
        Ok(())
    }
}

/// Transmission υ and conversion μ amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitterAmplitudes {
    pub transmit: Complex64,
    pub convert: Complex64,
}

impl SplitterAmplitudes {
    /// Single-photon conversion efficiency |μ|².
    pub fn efficiency(&self) -> f64 {
        self.convert.norm_sqr()
    }

    /// Sector probabilities (cross, both-red, both-blue) with two-photon
    /// interference switched off.
    pub fn incoherent_weights(&self) -> (f64, f64, f64) {
        let t = self.transmit.norm_sqr();
        let c = self.convert.norm_sqr();
        (t * t + c * c, t * c, t * c)
    }

    fn kernel(&self, to: Arm, from: Arm) -> Complex64 {
        match (to, from) {
            (Arm::Red, Arm::Red) => self.transmit,
            (Arm::Blue, Arm::Red) => -self.convert,
            (Arm::Red, Arm::Blue) => self.convert.conj(),
            (Arm::Blue, Arm::Blue) => self.transmit.conj(),
        }
    }
}

/// υ, μ for the given settings. With Δβ ≠ 0 the coupled two-mode solution
/// gives `υ = cos gL − i(Δβ/2g) sin gL`, `μ = e^{iφ}(2γP/g) sin gL` with
/// `g = √((2γP)² + (Δβ/2)²)`.
pub fn splitter_amplitudes(params: &FbsParams) -> Result<SplitterAmplitudes> {
    params.validate()?;
    let coupling = 2.0 * params.strength;
    let half_mismatch = 0.5 * params.mismatch * params.length;
    let phase = Complex64::from_polar(1.0, params.pump_phase);
    if half_mismatch == 0.0 {
        return Ok(SplitterAmplitudes {
            transmit: Complex64::new(coupling.cos(), 0.0),
            convert: phase * coupling.sin(),
        });
    }
    let g_l = coupling.hypot(half_mismatch);
    let (s, c) = g_l.sin_cos();
    Ok(SplitterAmplitudes {
        transmit: Complex64::new(c, -half_mismatch / g_l * s),
        convert: phase * (coupling / g_l * s),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Red,
    Blue,
}

impl Arm {
    const BOTH: [Arm; 2] = [Arm::Red, Arm::Blue];

    pub(crate) fn index(self) -> usize {
        match self {
            Arm::Red => 0,
            Arm::Blue => 1,
        }
    }

    /// Grid steps a photon moves when going `from` → `to`.
    fn shift(to: Arm, from: Arm, steps: i64) -> i64 {
        match (to, from) {
            (Arm::Blue, Arm::Red) => steps,
            (Arm::Red, Arm::Blue) => -steps,
            _ => 0,
        }
    }
}

/// out[i] = v[i − k], zero where the source index falls off the grid.
fn shifted(v: &[Complex64], k: i64) -> impl Iterator<Item = Complex64> + '_ {
    let n = v.len() as i64;
    (0..n).map(move |i| {
        let j = i - k;
        if (0..n).contains(&j) {
            v[j as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn offset_steps(grid: &FrequencyGrid, offset: f64) -> Result<i64> {
    grid.steps_in(offset).ok_or_else(|| {
        Error::Resolution(format!(
            "envelope offset {offset:e} rad/s is not a whole number of grid steps ({:e})",
            grid.spacing()
        ))
    })
}

/// One photon spread over both arms.
#[derive(Debug, Clone, PartialEq)]
pub struct SinglePhoton {
    pub grid: FrequencyGrid,
    pub red: Vec<Complex64>,
    pub blue: Vec<Complex64>,
    pub envelope_offset: f64,
}

impl SinglePhoton {
    pub fn in_arm(jsa: &JointSpectralAmplitude, arm: Arm) -> Self {
        let zeros = vec![Complex64::new(0.0, 0.0); jsa.grid.n_points];
        let (red, blue) = match arm {
            Arm::Red => (jsa.amplitude.clone(), zeros),
            Arm::Blue => (zeros, jsa.amplitude.clone()),
        };
        Self {
            grid: jsa.grid,
            red,
            blue,
            envelope_offset: jsa.envelope_offset,
        }
    }

    pub fn population(&self, arm: Arm) -> f64 {
        match arm {
            Arm::Red => intensity_integral(&self.grid, &self.red),
            Arm::Blue => intensity_integral(&self.grid, &self.blue),
        }
    }
}

/// Applies the splitter to a single photon.
pub fn apply_fbs_single(photon: &SinglePhoton, params: &FbsParams) -> Result<SinglePhoton> {
    let amps = splitter_amplitudes(params)?;
    let steps = offset_steps(&photon.grid, photon.envelope_offset)?;
    let input = [&photon.red, &photon.blue];
    let mut out = [Vec::new(), Vec::new()];
    for to in Arm::BOTH {
        let mut acc = vec![Complex64::new(0.0, 0.0); photon.grid.n_points];
        for from in Arm::BOTH {
            let k = amps.kernel(to, from);
            let shift = Arm::shift(to, from, steps);
            for (a, v) in acc.iter_mut().zip(shifted(input[from.index()], shift)) {
                *a += k * v;
            }
        }
        out[to.index()] = acc;
    }
    let [red, blue] = out;
    Ok(SinglePhoton {
        grid: photon.grid,
        red,
        blue,
        envelope_offset: photon.envelope_offset,
    })
}

/// Symmetric two-photon wavefunction restricted to the energy-conservation
/// lines. `psi[a][b][i]` is the amplitude for photon 1 in arm `a` at grid
/// detuning `i` and photon 2 in arm `b` at the detuning fixed by the line
/// (`0`, `−ΔΩ` or `+ΔΩ` total for RB/BR, RR and BB).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState {
    pub grid: FrequencyGrid,
    pub envelope_offset: f64,
    psi: [[Vec<Complex64>; 2]; 2],
    /// |∫φ dν|² of the source amplitude; the pumps-off G² peak.
    pub reference_peak: f64,
}

/// Output sector of a two-photon measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    /// One photon per arm.
    Cross,
    BothRed,
    BothBlue,
}

impl Sector {
    pub fn label(self) -> &'static str {
        match self {
            Sector::Cross => "rb",
            Sector::BothRed => "rr",
            Sector::BothBlue => "bb",
        }
    }
}

impl TwoPhotonState {
    /// Pair state `∫φ(ν) a_R†(ω_R⁰+ν) a_B†(ω_B⁰−ν)|0⟩` carrying the JSA's
    /// envelope offset.
    pub fn from_jsa(jsa: &JointSpectralAmplitude) -> Result<Self> {
        offset_steps(&jsa.grid, jsa.envelope_offset)?;
        let n = jsa.grid.n_points;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zeros = vec![Complex64::new(0.0, 0.0); n];
        let rb: Vec<_> = jsa.amplitude.iter().map(|a| a * s).collect();
        let br: Vec<_> = (0..n).map(|i| jsa.amplitude[n - 1 - i] * s).collect();
        let reference_peak = jsa.fourier_amplitude(0.0).norm_sqr();
        Ok(Self {
            grid: jsa.grid,
            envelope_offset: jsa.envelope_offset,
            psi: [[zeros.clone(), rb], [br, zeros]],
            reference_peak,
        })
    }

    pub fn component(&self, first: Arm, second: Arm) -> &[Complex64] {
        &self.psi[first.index()][second.index()]
    }

    /// Sector amplitude as a function of photon-1 detuning, scaled so its
    /// squared norm is the sector probability.
    pub fn sector_amplitude(&self, sector: Sector) -> Vec<Complex64> {
        match sector {
            Sector::Cross => {
                let s = std::f64::consts::SQRT_2;
                self.component(Arm::Red, Arm::Blue).iter().map(|a| a * s).collect()
            }
            Sector::BothRed => self.component(Arm::Red, Arm::Red).to_vec(),
            Sector::BothBlue => self.component(Arm::Blue, Arm::Blue).to_vec(),
        }
    }

    pub fn sector_weight(&self, sector: Sector) -> f64 {
        let norm = |a: Arm, b: Arm| intensity_integral(&self.grid, self.component(a, b));
        match sector {
            Sector::Cross => norm(Arm::Red, Arm::Blue) + norm(Arm::Blue, Arm::Red),
            Sector::BothRed => norm(Arm::Red, Arm::Red),
            Sector::BothBlue => norm(Arm::Blue, Arm::Blue),
        }
    }

    pub fn total_norm(&self) -> f64 {
        [Sector::Cross, Sector::BothRed, Sector::BothBlue]
            .iter()
            .map(|&s| self.sector_weight(s))
            .sum()
    }

    pub fn is_pair_input(&self) -> bool {
        let zero = |a: Arm| self.component(a, a).iter().all(|v| v.norm_sqr() == 0.0);
        zero(Arm::Red) && zero(Arm::Blue)
    }

    pub(crate) fn from_components(
        grid: FrequencyGrid,
        envelope_offset: f64,
        psi: [[Vec<Complex64>; 2]; 2],
        reference_peak: f64,
    ) -> Result<Self> {
        if psi.iter().flatten().any(|v| v.len() != grid.n_points) {
            return Err(Error::invalid("psi", "component length does not match grid"));
        }
        offset_steps(&grid, envelope_offset)?;
        Ok(Self {
            grid,
            envelope_offset,
            psi,
            reference_peak,
        })
    }
}

/// Applies the splitter to both photons (U ⊗ U). Any input sector is
/// accepted, so repeated passes compose.
pub fn apply_fbs_two_photon(state: &TwoPhotonState, params: &FbsParams) -> Result<TwoPhotonState> {
    let amps = splitter_amplitudes(params)?;
    let steps = offset_steps(&state.grid, state.envelope_offset)?;
    let n = state.grid.n_points;
    let mut psi: [[Vec<Complex64>; 2]; 2] = Default::default();
    for a1 in Arm::BOTH {
        for a2 in Arm::BOTH {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for b1 in Arm::BOTH {
                for b2 in Arm::BOTH {
                    let src = state.component(b1, b2);
                    let k = amps.kernel(a1, b1) * amps.kernel(a2, b2);
                    if k == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    // Photon 2's shift is implied by its energy-conservation line.
                    let shift = Arm::shift(a1, b1, steps);
                    for (a, v) in acc.iter_mut().zip(shifted(src, shift)) {
                        *a += k * v;
                    }
                }
            }
            psi[a1.index()][a2.index()] = acc;
        }
    }
    Ok(TwoPhotonState {
        grid: state.grid,
        envelope_offset: state.envelope_offset,
        psi,
        reference_peak: state.reference_peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{apply_envelope_offset, build_ring_jsa, ResonatorSpec};
    use crate::TWO_PI;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn ring(offset_hz: f64, n: usize) -> JointSpectralAmplitude {
        let spec = ResonatorSpec::default();
        let offset = TWO_PI * offset_hz;
        let grid = FrequencyGrid::commensurate(spec.linewidth, offset, n).unwrap();
        apply_envelope_offset(&build_ring_jsa(&spec, grid).unwrap(), offset).unwrap()
    }

    fn params(strength: f64) -> FbsParams {
        FbsParams::with_strength(strength)
    }

    #[test]
    fn balanced_and_full_conversion() {
        let a = splitter_amplitudes(&params(BALANCED_STRENGTH)).unwrap();
        assert_relative_eq!(a.transmit.norm_sqr(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(a.convert.norm_sqr(), 0.5, epsilon = 1e-15);
        let a = splitter_amplitudes(&params(FULL_CONVERSION_STRENGTH)).unwrap();
        assert_relative_eq!(a.convert.norm_sqr(), 1.0, epsilon = 1e-15);
        let a = splitter_amplitudes(&params(0.0)).unwrap();
        assert_eq!(a.transmit, Complex64::new(1.0, 0.0));
        assert_eq!(a.convert, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn unitarity_random_strengths() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let p = FbsParams {
                strength: rng.random_range(0.0..10.0),
                pump_phase: rng.random_range(-4.0..4.0),
                ..Default::default()
            };
            let a = splitter_amplitudes(&p).unwrap();
            assert!((a.transmit.norm_sqr() + a.convert.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_efficiency_is_damped_rabi() {
        let p = FbsParams {
            strength: 0.3,
            mismatch: 2.0,
            length: 0.7,
            ..Default::default()
        };
        let a = splitter_amplitudes(&p).unwrap();
        let two_gp: f64 = 2.0 * 0.3 / 0.7;
        let g = two_gp.hypot(1.0);
        let expected = (two_gp / g).powi(2) * (g * 0.7).sin().powi(2);
        assert_relative_eq!(a.efficiency(), expected, max_relative = 1e-13);
        assert!((a.transmit.norm_sqr() + a.efficiency() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn negative_strength_rejected() {
        assert!(splitter_amplitudes(&params(-0.1)).is_err());
    }

    #[test]
    fn single_photon_conversion() {
        let jsa = ring(0.0, 4096);
        let red = SinglePhoton::in_arm(&jsa, Arm::Red);
        let full = apply_fbs_single(&red, &params(FULL_CONVERSION_STRENGTH)).unwrap();
        assert!(full.population(Arm::Red) < 1e-30);
        assert_relative_eq!(full.population(Arm::Blue), 1.0, epsilon = 1e-12);
        let half = apply_fbs_single(&red, &params(BALANCED_STRENGTH)).unwrap();
        assert_relative_eq!(half.population(Arm::Red), 0.5, epsilon = 1e-12);
        assert_relative_eq!(half.population(Arm::Blue), 0.5, epsilon = 1e-12);
        let same = apply_fbs_single(&red, &params(0.0)).unwrap();
        assert_eq!(same, red);
    }

    #[test]
    fn single_photon_shift_lands_on_offset() {
        let jsa = ring(300e6, 4096);
        let red = SinglePhoton::in_arm(&jsa, Arm::Red);
        let out = apply_fbs_single(&red, &params(FULL_CONVERSION_STRENGTH)).unwrap();
        let k = jsa.grid.steps_in(jsa.envelope_offset).unwrap() as usize;
        let n = jsa.grid.n_points;
        // Red envelope peaks at the two central points; the blue copy sits k steps up.
        let peak = out
            .blue
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap()
            .0;
        assert!(peak == n / 2 + k || peak == n / 2 - 1 + k);
    }

    #[test]
    fn hom_null_and_bunching() {
        let state = TwoPhotonState::from_jsa(&ring(0.0, 4096)).unwrap();
        assert!(state.is_pair_input());
        let out = apply_fbs_two_photon(&state, &params(BALANCED_STRENGTH)).unwrap();
        assert!(out.sector_weight(Sector::Cross) <= 1e-10);
        assert_relative_eq!(out.sector_weight(Sector::BothRed), 0.5, epsilon = 1e-10);
        assert_relative_eq!(out.sector_weight(Sector::BothBlue), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn identity_at_zero_strength() {
        let state = TwoPhotonState::from_jsa(&ring(300e6, 4096)).unwrap();
        let out = apply_fbs_two_photon(&state, &params(0.0)).unwrap();
        assert_eq!(out.sector_amplitude(Sector::Cross), state.sector_amplitude(Sector::Cross));
        assert_eq!(out.sector_weight(Sector::BothRed), 0.0);
    }

    #[test]
    fn large_offset_washes_out_interference() {
        let state = TwoPhotonState::from_jsa(&ring(5e9, 4096)).unwrap();
        let out = apply_fbs_two_photon(&state, &params(BALANCED_STRENGTH)).unwrap();
        assert!((out.sector_weight(Sector::Cross) - 0.5).abs() < 1e-2);
        assert!((out.sector_weight(Sector::BothBlue) - 0.25).abs() < 1e-2);
    }

    #[test]
    fn incoherent_bookkeeping_at_balance() {
        let a = splitter_amplitudes(&params(BALANCED_STRENGTH)).unwrap();
        let (cross, rr, bb) = a.incoherent_weights();
        assert_relative_eq!(cross, 0.5, epsilon = 1e-15);
        assert_relative_eq!(rr, 0.25, epsilon = 1e-15);
        assert_relative_eq!(bb, 0.25, epsilon = 1e-15);
        assert!((cross + rr + bb - 1.0).abs() < 1e-15);
    }

    /// Random compact JSA well inside the grid, so shifts never clip it.
    fn random_state(seed: u64, offset_steps: i64) -> TwoPhotonState {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = 1024;
        let grid = FrequencyGrid::new(0.0, 1023.0, n).unwrap();
        let amplitude: Vec<Complex64> = (0..n)
            .map(|i| {
                if (n / 2 - 100..n / 2 + 100).contains(&i) {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let mut jsa = JointSpectralAmplitude::from_samples(grid, amplitude)
            .unwrap()
            .normalize()
            .unwrap();
        jsa.envelope_offset = offset_steps as f64 * grid.spacing();
        TwoPhotonState::from_jsa(&jsa).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn two_photon_norm_conserved(
            seed in any::<u64>(),
            k in -50i64..50,
            strength in 0.0f64..3.0,
            phase in -3.2f64..3.2,
            mismatch in -5.0f64..5.0,
        ) {
            let state = random_state(seed, k);
            let p = FbsParams { strength, pump_phase: phase, mismatch, ..Default::default() };
            let out = apply_fbs_two_photon(&state, &p).unwrap();
            prop_assert!((out.total_norm() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn opposite_phase_pass_inverts(
            seed in any::<u64>(),
            k in -50i64..50,
            strength in 0.0f64..3.0,
            phase in -3.2f64..3.2,
        ) {
            let state = random_state(seed, k);
            let forward = FbsParams { strength, pump_phase: phase, ..Default::default() };
            let back = FbsParams { pump_phase: phase + std::f64::consts::PI, ..forward };
            let out = apply_fbs_two_photon(
                &apply_fbs_two_photon(&state, &forward).unwrap(),
                &back,
            ).unwrap();
            for a in Arm::BOTH {
                for b in Arm::BOTH {
                    for (x, y) in out.component(a, b).iter().zip(state.component(a, b)) {
                        prop_assert!((x - y).norm() < 1e-10);
                    }
                }
            }
        }
    }
}
