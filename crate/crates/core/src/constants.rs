//! Physical properties of the working fluid.

use crate::{Error, Result};
use alloc::string::ToString;

/// Default duct cross section, 100 cm² (m²).
pub const DEFAULT_CROSS_SECTION_M2: f64 = 0.01;

/// Properties of air plus the neck end-correction factors.
///
/// Defaults describe dry air at 20 °C.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalConstants {
    /// Static air density ρ₀ (kg/m³).
    pub air_density: f64,
    /// Speed of sound c₀ (m/s).
    pub sound_speed: f64,
    /// Dynamic viscosity of air η (Pa·s).
    pub air_viscosity: f64,
    /// End-correction factor β₁ of the first-order neck.
    pub beta1: f64,
    /// End-correction factor β₂ of the second-order neck.
    pub beta2: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            air_density: 1.21,
            sound_speed: 343.0,
            air_viscosity: 1.81e-5,
            beta1: 0.75,
            beta2: 1.05,
        }
    }
}

impl PhysicalConstants {
    /// Characteristic impedance of the fluid, Z₀ = ρ₀·c₀ (Pa·s/m).
    pub fn characteristic_impedance(&self) -> f64 {
        self.air_density * self.sound_speed
    }

    /// End-correction factor for order `i` (0-based).
    pub fn beta(&self, order: usize) -> f64 {
        match order {
            0 => self.beta1,
            1 => self.beta2,
            _ => unreachable!("two-order resonator"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("air_density", self.air_density),
            ("sound_speed", self.sound_speed),
            ("air_viscosity", self.air_viscosity),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidConfig(name.to_string()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_characteristic_impedance() {
        let pc = PhysicalConstants::default();
        assert!((pc.characteristic_impedance() - 415.03).abs() < 1e-9);
        pc.validate().unwrap();
    }

    #[test]
    fn rejects_non_positive_values() {
        let mut pc = PhysicalConstants::default();
        pc.sound_speed = 0.0;
        assert!(pc.validate().is_err());
    }
}
