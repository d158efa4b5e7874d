//! Side-branch impedance and sound transmission loss of the resonator.
//!
//! The branch impedance of the two-order resonator is the series/parallel
//! ladder
//!
//! ```text
//! Z = R₁√ω + jωM₁ + 1 / ( jωC₁ + 1 / ( R₂√ω + jωM₂ + 1/(jωC₂) ) )
//! ```
//!
//! and the transmission loss of a duct carrying it as a side branch is
//!
//! ```text
//! t = 10 log₁₀ [ X_b² + (Z₀/2S + R_b)² ] / [ R_b² + X_b² ]   (dB)
//! ```
//!
//! with Z_b = R_b + jX_b, duct cross section S and characteristic impedance
//! Z₀ = ρ₀c₀.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::geometry::EquivalentElectricalParams;
use crate::{Error, Result};

/// Branch impedance at one frequency, split into resistance R_b and
/// reactance X_b (Pa·s/m³).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BranchImpedance {
    pub frequency: f64,
    pub resistance: f64,
    pub reactance: f64,
}

impl BranchImpedance {
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.resistance, self.reactance)
    }

    pub fn magnitude(&self) -> f64 {
        self.as_complex().norm()
    }
}

/// Branch impedance of the resonator at frequency `f` (Hz, must be > 0).
pub fn impedance(eep: &EquivalentElectricalParams, f: f64) -> BranchImpedance {
    assert!(f > 0.0, "impedance requires f > 0, got {f}");
    let w = 2.0 * PI * f;
    let sw = w.sqrt();
    let inner = Complex64::new(
        eep.resistance[1] * sw,
        w * eep.inertance[1] - 1.0 / (w * eep.compliance[1]),
    );
    let shunt = Complex64::new(0.0, w * eep.compliance[0]) + inner.inv();
    let z = Complex64::new(eep.resistance[0] * sw, w * eep.inertance[0]) + shunt.inv();
    BranchImpedance {
        frequency: f,
        resistance: z.re,
        reactance: z.im,
    }
}

/// Transmission loss (dB) of a duct with the resonator as a side branch.
pub fn stl_side_branch(
    eep: &EquivalentElectricalParams,
    f: f64,
    cross_section: f64,
    pc: &PhysicalConstants,
) -> f64 {
    assert!(cross_section > 0.0, "cross section must be positive");
    let z = impedance(eep, f);
    stl_from_impedance(&z, cross_section, pc)
}

/// Transmission loss from a precomputed branch impedance.
pub fn stl_from_impedance(z: &BranchImpedance, cross_section: f64, pc: &PhysicalConstants) -> f64 {
    let half_duct = pc.characteristic_impedance() / (2.0 * cross_section);
    let num = z.reactance * z.reactance + (half_duct + z.resistance) * (half_duct + z.resistance);
    let den = z.resistance * z.resistance + z.reactance * z.reactance;
    10.0 * (num / den).log10()
}

/// A uniform frequency grid: `count` samples starting at `start_hz`, spaced
/// `step_hz` apart.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrequencyGrid {
    pub start_hz: f64,
    pub step_hz: f64,
    pub count: usize,
}

impl Default for FrequencyGrid {
    /// 101 Hz to 600 Hz at 1 Hz: 500 samples.
    fn default() -> Self {
        Self {
            start_hz: 101.0,
            step_hz: 1.0,
            count: 500,
        }
    }
}

impl FrequencyGrid {
    pub fn frequency(&self, index: usize) -> f64 {
        self.start_hz + index as f64 * self.step_hz
    }

    pub fn end_hz(&self) -> f64 {
        self.frequency(self.count.saturating_sub(1))
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.frequency(i))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start_hz > 0.0) || !(self.step_hz > 0.0) || self.count == 0 {
            return Err(Error::InvalidConfig(format!(
                "frequency grid must have positive start, step and count, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// A transmission-loss curve sampled on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StlSpectrum {
    pub grid: FrequencyGrid,
    pub values: Vec<f64>,
}

impl StlSpectrum {
    pub fn from_fn(grid: FrequencyGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.frequencies().map(f).collect();
        Self { grid, values }
    }

    /// Index of the largest value.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

/// Samples [`stl_side_branch`] over a frequency grid.
pub fn stl_spectrum(
    eep: &EquivalentElectricalParams,
    cross_section: f64,
    pc: &PhysicalConstants,
    grid: FrequencyGrid,
) -> Result<StlSpectrum> {
    grid.validate()?;
    Ok(StlSpectrum::from_fn(grid, |f| {
        stl_side_branch(eep, f, cross_section, pc)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::DEFAULT_CROSS_SECTION_M2;
    use crate::geometry::{gp_to_eep, GeometricParams};

    fn pc() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn example_eep() -> EquivalentElectricalParams {
        let gp = GeometricParams {
            neck_radius: [0.01; 2],
            neck_length: [0.02; 2],
            cavity_radius: [0.05; 2],
            cavity_length: [0.06; 2],
        };
        gp_to_eep(&gp, &pc()).unwrap()
    }

    #[test]
    fn branch_blocks_at_low_frequency() {
        let eep = example_eep();
        // Compliances dominate as f → 0⁺: |X_b| → ∞ and the branch carries
        // nothing, so the transmission loss vanishes.
        let z = impedance(&eep, 1e-3);
        assert!(z.reactance.abs() > 1e9);
        let t = stl_side_branch(&eep, 1e-3, DEFAULT_CROSS_SECTION_M2, &pc());
        assert!(t >= 0.0 && t < 1e-6, "expected t → 0 dB, got {t}");
    }

    #[test]
    fn resistance_is_positive_across_the_band() {
        let eep = example_eep();
        for i in 0..=4990 {
            let f = 101.0 + 0.1 * i as f64;
            let z = impedance(&eep, f);
            assert!(z.resistance > 0.0, "R_b must stay positive at {f} Hz");
        }
    }

    #[test]
    fn stl_is_nonnegative_across_the_band() {
        let eep = example_eep();
        let spec = stl_spectrum(&eep, DEFAULT_CROSS_SECTION_M2, &pc(), FrequencyGrid::default())
            .unwrap();
        assert!(spec.values.iter().all(|&t| t >= 0.0));
    }

    #[test]
    fn default_grid_has_500_points_and_correct_bookkeeping() {
        let grid = FrequencyGrid::default();
        assert_eq!(grid.count, 500);
        assert_eq!(grid.frequency(0), 101.0);
        assert_eq!(grid.end_hz(), 600.0);
        let spec = stl_spectrum(
            &example_eep(),
            DEFAULT_CROSS_SECTION_M2,
            &pc(),
            grid,
        )
        .unwrap();
        assert_eq!(spec.values.len(), 500);
        // Index i corresponds to start + i·step.
        let direct = stl_side_branch(&example_eep(), grid.frequency(123), 0.01, &pc());
        assert_eq!(spec.values[123], direct);
    }

    #[test]
    fn rejects_degenerate_grid() {
        let grid = FrequencyGrid {
            start_hz: 0.0,
            step_hz: 1.0,
            count: 10,
        };
        assert!(stl_spectrum(&example_eep(), 0.01, &pc(), grid).is_err());
    }
}
