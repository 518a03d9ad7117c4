//! Phase-matching design for Bragg-scattering four-wave mixing in fiber.

use crate::error::{Error, Result};
use crate::fbs::{splitter_amplitudes, FbsParams};
use crate::TWO_PI;

/// Taylor expansion of the propagation constant about `reference_frequency`.
///
/// β₀ and β₁ are omitted: they cancel in every energy-conserving
/// four-wave Δβ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionProfile {
    /// ω₀, rad/s. Frequencies in [`ProcessPlacement`] are relative to it.
    pub reference_frequency: f64,
    /// s²/m
    pub beta2: f64,
    /// s³/m
    pub beta3: f64,
    /// s⁴/m
    pub beta4: f64,
}

impl DispersionProfile {
    /// Illustrative dispersion-shifted fiber with zero GVD near 1550 nm.
    /// Placeholder values, not a measured fiber.
    pub fn illustrative() -> Self {
        Self {
            reference_frequency: TWO_PI * 299_792_458.0 / 1550e-9,
            beta2: 0.0,
            beta3: 1.2e-40,
            beta4: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.reference_frequency, self.beta2, self.beta3, self.beta4];
        if all.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid("dispersion", "coefficients must be finite"))
        }
    }

    /// β(ω₀ + x) − β₀ − β₁x.
    #[inline]
    pub fn beta(&self, x: f64) -> f64 {
        x * x * (self.beta2 / 2.0 + x * (self.beta3 / 6.0 + x * self.beta4 / 24.0))
    }
}

/// Band layout relative to ω₀. The photons sit at `quantum_center ∓ Ω/2`
/// (R below, B above) and the pumps at `pump_center ∓ Ω/2` (P2 below, P1
/// above), so `ω_R + ω_P1 = ω_B + ω_P2` holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessPlacement {
    pub quantum_center: f64,
    pub pump_center: f64,
    /// Ω, rad/s.
    pub separation: f64,
    /// Fiber length, m.
    pub length: f64,
    /// γP, 1/m.
    pub gamma_power: f64,
}

impl ProcessPlacement {
    /// Photons at −D and pumps at +D about the zero-GVD point.
    pub fn symmetric(offset: f64, separation: f64, length: f64, gamma_power: f64) -> Self {
        Self {
            quantum_center: -offset,
            pump_center: offset,
            separation,
            length,
            gamma_power,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation >= 0.0) || !self.separation.is_finite() {
            return Err(Error::invalid("separation", "must be finite and non-negative"));
        }
        if !(self.length > 0.0) || !(self.gamma_power >= 0.0) {
            return Err(Error::invalid("length", "length must be positive, γP non-negative"));
        }
        if self.separation > 0.0 {
            let f = self.frequencies();
            let mut sorted = [f.red, f.blue, f.pump1, f.pump2];
            sorted.sort_by(f64::total_cmp);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid("placement", "the four frequencies must be distinct"));
            }
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Frequencies {
        let h = self.separation / 2.0;
        Frequencies {
            red: self.quantum_center - h,
            blue: self.quantum_center + h,
            pump2: self.pump_center - h,
            pump1: self.pump_center + h,
        }
    }
}

/// Detunings from ω₀, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequencies {
    pub red: f64,
    pub blue: f64,
    pub pump1: f64,
    pub pump2: f64,
}

/// Δβ = β_R + β_P1 − β_B − β_P2, rad/m.
pub fn delta_beta(profile: &DispersionProfile, placement: &ProcessPlacement) -> f64 {
    let f = placement.frequencies();
    mismatch(profile, f.red, f.pump1, f.blue, f.pump2)
}

/// Δβ of `in + pump_in → out + pump_out`.
fn mismatch(p: &DispersionProfile, input: f64, pump_in: f64, output: f64, pump_out: f64) -> f64 {
    // Pair terms that cancel under mirror symmetry before the final subtraction.
    (p.beta(input) + p.beta(pump_in)) - (p.beta(output) + p.beta(pump_out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessKind {
    /// R ↔ B, the designed process.
    Target,
    /// R → R − Ω with the pump roles exchanged.
    RedSideband,
    /// B → B + Ω with the pump roles exchanged.
    BlueSideband,
}

impl ProcessKind {
    pub fn label(self) -> &'static str {
        match self {
            ProcessKind::Target => "target",
            ProcessKind::RedSideband => "red_sideband",
            ProcessKind::BlueSideband => "blue_sideband",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessReport {
    pub kind: ProcessKind,
    /// Input and output frequencies relative to ω₀, rad/s.
    pub input: f64,
    pub output: f64,
    pub delta_beta: f64,
    /// Conversion efficiency |μ'|² at the designed γP and L.
    pub efficiency: f64,
    pub matched: bool,
}

/// Conversion efficiency of a mismatched two-mode process at the
/// placement's γP and L.
pub fn mismatched_efficiency(gamma_power: f64, length: f64, delta_beta: f64) -> f64 {
    let params = FbsParams {
        strength: gamma_power * length,
        mismatch: delta_beta,
        length,
        ..Default::default()
    };
    splitter_amplitudes(&params)
        .map(|a| a.efficiency())
        .unwrap_or(0.0)
}

/// Target process plus the first-order spurious Bragg processes.
pub fn sideband_suppression(
    profile: &DispersionProfile,
    placement: &ProcessPlacement,
) -> Result<Vec<ProcessReport>> {
    profile.validate()?;
    placement.validate()?;
    let f = placement.frequencies();
    let omega = placement.separation;
    let processes = [
        (ProcessKind::Target, f.red, f.pump1, f.blue, f.pump2),
        (ProcessKind::RedSideband, f.red, f.pump2, f.red - omega, f.pump1),
        (ProcessKind::BlueSideband, f.blue, f.pump1, f.blue + omega, f.pump2),
    ];
    Ok(processes
        .iter()
        .map(|&(kind, input, pump_in, output, pump_out)| {
            let db = mismatch(profile, input, pump_in, output, pump_out);
            ProcessReport {
                kind,
                input,
                output,
                delta_beta: db,
                efficiency: mismatched_efficiency(placement.gamma_power, placement.length, db),
                matched: db == 0.0,
            }
        })
        .collect())
}

/// Worst sideband efficiency relative to the target; 1 means no selectivity.
pub fn suppression_ratio(reports: &[ProcessReport]) -> f64 {
    let target = reports
        .iter()
        .find(|r| r.kind == ProcessKind::Target)
        .map(|r| r.efficiency)
        .unwrap_or(0.0);
    let worst = reports
        .iter()
        .filter(|r| r.kind != ProcessKind::Target)
        .map(|r| r.efficiency)
        .fold(0.0, f64::max);
    if target > 0.0 {
        worst / target
    } else {
        f64::INFINITY
    }
}

/// Ω = 2π·(2m·FSR): the pump separation matching resonances ±m.
pub fn pump_separation_from_fsr(fsr: f64, resonance_offset: i32) -> Result<f64> {
    if !(fsr > 0.0) || !fsr.is_finite() {
        return Err(Error::invalid("fsr", "must be positive"));
    }
    if resonance_offset < 1 {
        return Err(Error::invalid("resonance_offset", "must be at least 1"));
    }
    Ok(TWO_PI * (2 * resonance_offset) as f64 * fsr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn profile(beta2: f64, beta3: f64) -> DispersionProfile {
        DispersionProfile {
            reference_frequency: 1.2e15,
            beta2,
            beta3,
            beta4: 0.0,
        }
    }

    /// Brute-force expansion of each β term, independent of the Horner form.
    fn brute_force(p: &DispersionProfile, pl: &ProcessPlacement) -> f64 {
        let b = |x: f64| p.beta2 * x.powi(2) / 2.0 + p.beta3 * x.powi(3) / 6.0 + p.beta4 * x.powi(4) / 24.0;
        let f = pl.frequencies();
        b(f.red) + b(f.pump1) - b(f.blue) - b(f.pump2)
    }

    #[test]
    fn symmetric_zero_gvd_is_matched() {
        let pl = ProcessPlacement::symmetric(TWO_PI * 2e12, TWO_PI * 805.1e9, 1000.0, 1e-3);
        assert_eq!(delta_beta(&profile(0.0, 1e-40), &pl), 0.0);
    }

    #[test]
    fn quadratic_term_gives_two_beta2_d_omega() {
        let d = TWO_PI * 2e12;
        let omega = TWO_PI * 805.1e9;
        let p = profile(-2e-27, 1e-40);
        let pl = ProcessPlacement::symmetric(d, omega, 1000.0, 1e-3);
        let got = delta_beta(&p, &pl);
        assert_relative_eq!(got, 2.0 * p.beta2 * d * omega, max_relative = 1e-9);
        assert_relative_eq!(got, brute_force(&p, &pl), max_relative = 1e-9);
    }

    #[test]
    fn degenerate_separation() {
        let pl = ProcessPlacement::symmetric(TWO_PI * 1e12, 0.0, 1000.0, 1e-3);
        assert_eq!(delta_beta(&profile(-2e-27, 1e-40), &pl), 0.0);
    }

    #[test]
    fn sidebands_mismatched_under_third_order_dispersion() {
        let d = TWO_PI * 2e12;
        let omega = TWO_PI * 805.1e9;
        let p = profile(0.0, 1e-40);
        let pl = ProcessPlacement::symmetric(d, omega, 1000.0, 1e-3);
        let reports = sideband_suppression(&p, &pl).unwrap();
        assert_eq!(reports.len(), 3);
        assert!(reports[0].matched && reports[0].delta_beta == 0.0);
        // Expanding the cubic terms: |Δβ| = β₃Ω²(D ± Ω/2) for the red and blue sideband.
        let red = p.beta3 * omega * omega * (d + omega / 2.0);
        let blue = p.beta3 * omega * omega * (d - omega / 2.0);
        for (r, expected) in reports[1..].iter().zip([red, blue]) {
            assert!(!r.matched);
            assert_relative_eq!(r.delta_beta.abs(), expected, max_relative = 1e-6);
        }
        let ratio = suppression_ratio(&reports);
        assert!(ratio > 0.0 && ratio < 1.0);
    }

    #[test]
    fn dispersionless_has_no_selectivity() {
        let pl = ProcessPlacement::symmetric(TWO_PI * 2e12, TWO_PI * 805.1e9, 1000.0, 1e-3);
        let reports = sideband_suppression(&profile(0.0, 0.0), &pl).unwrap();
        assert!(reports.iter().all(|r| r.matched));
        assert_eq!(suppression_ratio(&reports), 1.0);
    }

    #[test]
    fn sinc_null_at_two_pi_mismatch() {
        let length = 100.0;
        let db = TWO_PI / length;
        let eff = mismatched_efficiency(1e-6, length, db);
        assert!(eff < 1e-6, "{eff}");
        assert!(mismatched_efficiency(1e-6, length, 0.0) > 0.0);
    }

    #[test]
    fn pump_separation_values() {
        assert_relative_eq!(pump_separation_from_fsr(201.275e9, 2).unwrap() / TWO_PI, 805.1e9, max_relative = 1e-15);
        assert_relative_eq!(pump_separation_from_fsr(201.275e9, 1).unwrap() / TWO_PI, 402.55e9, max_relative = 1e-15);
        assert_relative_eq!(pump_separation_from_fsr(100e9, 1).unwrap() / TWO_PI, 200e9, max_relative = 1e-15);
        assert!(pump_separation_from_fsr(0.0, 1).is_err());
        assert!(pump_separation_from_fsr(1e9, 0).is_err());
    }

    #[test]
    fn placement_energy_conservation() {
        let pl = ProcessPlacement {
            quantum_center: -3.1e12,
            pump_center: 7.7e12,
            separation: 5.05e12,
            length: 1.0,
            gamma_power: 1.0,
        };
        let f = pl.frequencies();
        assert_relative_eq!(f.red + f.pump1, f.blue + f.pump2, max_relative = 1e-15);
        assert!(pl.validate().is_ok());
        let collide = ProcessPlacement { pump_center: -3.1e12, ..pl };
        assert!(collide.validate().is_err());
    }

    proptest! {
        #[test]
        fn reflection_flips_cubic_contribution(
            beta2 in -1e-27f64..1e-27, beta3 in 1e-42f64..1e-39, d in 1e12f64..2e13,
            omega in 1e11f64..1e13, asym in 0.0f64..1e12,
        ) {
            let pl = ProcessPlacement { quantum_center: -d + asym, pump_center: d, separation: omega, length: 1.0, gamma_power: 1.0 };
            let f = pl.frequencies();
            let cubic = profile(0.0, beta3);
            let quad = profile(beta2, 0.0);
            // Every frequency reflected about ω₀, each wave keeping its role.
            let reflected = |p: &DispersionProfile| mismatch(p, -f.red, -f.pump1, -f.blue, -f.pump2);
            let a = delta_beta(&cubic, &pl);
            prop_assert!((reflected(&cubic) + a).abs() <= 1e-12 * a.abs().max(1e-300));
            let q = delta_beta(&quad, &pl);
            prop_assert!((reflected(&quad) - q).abs() <= 1e-12 * q.abs().max(1e-300));
        }

        #[test]
        fn asymmetry_grows_linearly(beta3 in 1e-41f64..1e-39, d in 1e12f64..2e13, omega in 1e11f64..1e13) {
            let p = profile(0.0, beta3);
            let at = |s: f64| delta_beta(&p, &ProcessPlacement { quantum_center: -d + s, pump_center: d, separation: omega, length: 1.0, gamma_power: 1.0 });
            let h = 1e-4 * d;
            let slope1 = (at(h) - at(0.0)) / h;
            let slope2 = (at(2.0 * h) - at(0.0)) / (2.0 * h);
            prop_assert!(at(0.0) == 0.0);
            prop_assert!(slope1 != 0.0);
            prop_assert!((slope1 - slope2).abs() <= 1e-3 * slope1.abs());
        }
    }
}
