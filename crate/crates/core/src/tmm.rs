//! Transfer-matrix cascade for a duct carrying straight segments and
//! side-branch resonators.
//!
//! Elements are 2×2 two-ports in the pressure–volume-velocity convention.
//! A straight segment of length L is
//!
//! ```text
//! [ cos kL            j (Z₀/S) sin kL ]
//! [ j (S/Z₀) sin kL   cos kL          ]      k = 2πf/c₀
//! ```
//!
//! and a side branch with impedance Z_b is `[[1, 0], [1/Z_b, 1]]`. For a
//! matched source and termination the transmission loss of the cascade T is
//! `TL = 20 log₁₀(|T₁₁ + T₁₂ S/Z₀ + T₂₁ Z₀/S + T₂₂| / 2)`.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::branch::{impedance, FrequencyGrid, StlSpectrum};
use crate::constants::PhysicalConstants;
use crate::geometry::EquivalentElectricalParams;
use crate::{Error, Result};

/// 2×2 complex two-port matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub t11: Complex64,
    pub t12: Complex64,
    pub t21: Complex64,
    pub t22: Complex64,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        Self {
            t11: Complex64::new(1.0, 0.0),
            t12: Complex64::new(0.0, 0.0),
            t21: Complex64::new(0.0, 0.0),
            t22: Complex64::new(1.0, 0.0),
        }
    }

    /// Matrix product `self · rhs` (self closer to the source).
    pub fn then(&self, rhs: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            t11: self.t11 * rhs.t11 + self.t12 * rhs.t21,
            t12: self.t11 * rhs.t12 + self.t12 * rhs.t22,
            t21: self.t21 * rhs.t11 + self.t22 * rhs.t21,
            t22: self.t21 * rhs.t12 + self.t22 * rhs.t22,
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.t11 * self.t22 - self.t12 * self.t21
    }
}

/// One element of a duct network.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DuctElement {
    /// Lossless straight duct of the network cross section.
    StraightSegment { length: f64 },
    /// Two-order resonator mounted as a side branch.
    SideBranch { eep: EquivalentElectricalParams },
}

/// An ordered chain of duct elements, source side first.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DuctNetwork {
    /// Duct cross section S (m²).
    pub cross_section: f64,
    pub elements: Vec<DuctElement>,
}

impl DuctNetwork {
    pub fn validate(&self) -> Result<()> {
        if !(self.cross_section > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "duct cross section must be positive, got {}",
                self.cross_section
            )));
        }
        if self.elements.is_empty() {
            return Err(Error::InvalidConfig(
                "duct network needs at least one element".into(),
            ));
        }
        for el in &self.elements {
            if let DuctElement::StraightSegment { length } = el {
                if *length < 0.0 || !length.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "segment length must be ≥ 0, got {length}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same elements in reverse order (receiver side first).
    pub fn reversed(&self) -> Self {
        let mut elements = self.elements.clone();
        elements.reverse();
        Self {
            cross_section: self.cross_section,
            elements,
        }
    }
}

/// Two-port matrix of a single element at frequency `f`.
pub fn element_matrix(
    element: &DuctElement,
    f: f64,
    cross_section: f64,
    pc: &PhysicalConstants,
) -> TransferMatrix {
    assert!(f > 0.0, "element_matrix requires f > 0");
    match element {
        DuctElement::StraightSegment { length } => {
            let k = 2.0 * PI * f / pc.sound_speed;
            let (sin, cos) = (k * length).sin_cos();
            let z_duct = pc.characteristic_impedance() / cross_section;
            TransferMatrix {
                t11: Complex64::new(cos, 0.0),
                t12: Complex64::new(0.0, z_duct * sin),
                t21: Complex64::new(0.0, sin / z_duct),
                t22: Complex64::new(cos, 0.0),
            }
        }
        DuctElement::SideBranch { eep } => {
            let z = impedance(eep, f).as_complex();
            TransferMatrix {
                t11: Complex64::new(1.0, 0.0),
                t12: Complex64::new(0.0, 0.0),
                t21: z.inv(),
                t22: Complex64::new(1.0, 0.0),
            }
        }
    }
}

/// Ordered product of the element matrices, source side first.
pub fn cascade(network: &DuctNetwork, f: f64, pc: &PhysicalConstants) -> TransferMatrix {
    let mut total = TransferMatrix::identity();
    for el in &network.elements {
        total = total.then(&element_matrix(el, f, network.cross_section, pc));
    }
    total
}

/// Transmission loss (dB) of a cascade between matched duct terminations.
pub fn stl_from_matrix(t: &TransferMatrix, cross_section: f64, pc: &PhysicalConstants) -> f64 {
    let z_duct = pc.characteristic_impedance() / cross_section;
    let sum = t.t11 + t.t12 / z_duct + t.t21 * z_duct + t.t22;
    20.0 * (sum.norm() / 2.0).log10()
}

/// Transmission-loss spectrum of a network over a frequency grid.
pub fn network_spectrum(
    network: &DuctNetwork,
    grid: FrequencyGrid,
    pc: &PhysicalConstants,
) -> Result<StlSpectrum> {
    network.validate()?;
    grid.validate()?;
    Ok(StlSpectrum::from_fn(grid, |f| {
        stl_from_matrix(&cascade(network, f, pc), network.cross_section, pc)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::stl_side_branch;
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

    fn cnorm(x: Complex64) -> f64 {
        x.norm()
    }

    #[test]
    fn zero_length_segment_is_identity() {
        let m = element_matrix(
            &DuctElement::StraightSegment { length: 0.0 },
            200.0,
            0.01,
            &pc(),
        );
        let id = TransferMatrix::identity();
        assert_eq!(m, id);
    }

    #[test]
    fn blocked_branch_is_identity() {
        // Enormous impedance: compliances of a near-rigid branch at low f.
        let eep = EquivalentElectricalParams {
            resistance: [1e-9; 2],
            inertance: [1e-9; 2],
            compliance: [1e-18; 2],
        };
        let m = element_matrix(&DuctElement::SideBranch { eep }, 150.0, 0.01, &pc());
        assert!(cnorm(m.t21) < 1e-9);
        assert_eq!(m.t11, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn segment_determinant_is_unity() {
        for (f, l) in [(117.0, 0.13), (433.0, 0.71), (599.0, 2.3)] {
            let m = element_matrix(&DuctElement::StraightSegment { length: l }, f, 0.01, &pc());
            let det = m.determinant();
            assert!((det - Complex64::new(1.0, 0.0)).norm() < 1e-9, "det {det}");
        }
    }

    #[test]
    fn branch_determinant_is_exactly_one() {
        let m = element_matrix(
            &DuctElement::SideBranch { eep: example_eep() },
            250.0,
            0.01,
            &pc(),
        );
        assert_eq!(m.determinant(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn single_branch_cascade_equals_its_element() {
        let net = DuctNetwork {
            cross_section: 0.01,
            elements: alloc::vec![DuctElement::SideBranch { eep: example_eep() }],
        };
        let t = cascade(&net, 321.0, &pc());
        let e = element_matrix(&net.elements[0], 321.0, 0.01, &pc());
        assert_eq!(t, e);
    }

    #[test]
    fn two_zero_segments_cascade_to_identity() {
        let net = DuctNetwork {
            cross_section: 0.01,
            elements: alloc::vec![
                DuctElement::StraightSegment { length: 0.0 },
                DuctElement::StraightSegment { length: 0.0 },
            ],
        };
        let t = cascade(&net, 222.0, &pc());
        assert_eq!(t, TransferMatrix::identity());
        assert_eq!(stl_from_matrix(&t, 0.01, &pc()), 0.0);
    }

    #[test]
    fn single_branch_matches_direct_side_branch_formula() {
        let eep = example_eep();
        let net = DuctNetwork {
            cross_section: DEFAULT_CROSS_SECTION_M2,
            elements: alloc::vec![DuctElement::SideBranch { eep }],
        };
        let spec = network_spectrum(&net, FrequencyGrid::default(), &pc()).unwrap();
        for (i, f) in FrequencyGrid::default().frequencies().enumerate() {
            let direct = stl_side_branch(&eep, f, DEFAULT_CROSS_SECTION_M2, &pc());
            assert!(
                (spec.values[i] - direct).abs() < 1e-9,
                "mismatch at {f} Hz: {} vs {direct}",
                spec.values[i]
            );
        }
    }

    #[test]
    fn reversing_the_network_preserves_transmission_loss() {
        let mut second = example_eep();
        second.compliance = [2.1e-9, 1.4e-9];
        // Deliberately asymmetric spacing.
        let net = DuctNetwork {
            cross_section: 0.01,
            elements: alloc::vec![
                DuctElement::StraightSegment { length: 0.07 },
                DuctElement::SideBranch { eep: example_eep() },
                DuctElement::StraightSegment { length: 0.23 },
                DuctElement::SideBranch { eep: second },
                DuctElement::StraightSegment { length: 0.11 },
            ],
        };
        let rev = net.reversed();
        for f in [120.0, 240.0, 360.0, 480.0, 600.0] {
            let a = stl_from_matrix(&cascade(&net, f, &pc()), 0.01, &pc());
            let b = stl_from_matrix(&cascade(&rev, f, &pc()), 0.01, &pc());
            assert!((a - b).abs() < 1e-9, "TL changed under reversal at {f} Hz");
        }
    }

    #[test]
    fn network_validation_errors() {
        let empty = DuctNetwork {
            cross_section: 0.01,
            elements: alloc::vec![],
        };
        assert!(empty.validate().is_err());
        let bad = DuctNetwork {
            cross_section: -1.0,
            elements: alloc::vec![DuctElement::StraightSegment { length: 0.1 }],
        };
        assert!(bad.validate().is_err());
    }
}
