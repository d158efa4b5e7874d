//! Resonator geometry, equivalent electrical parameters, and the exact
//! algebra between them.
//!
//! Per order `i` the forward map is
//!
//! ```text
//! R_i = l_i √(2ηρ₀) / (π a_i³)        (resistance coefficient; R_i·√ω is
//!                                      the acoustic resistance)
//! M_i = ρ₀ (l_i + δ_i) / (π a_i²)     (acoustic inertance)
//! C_i = V_i / (ρ₀ c₀²)                (acoustic compliance)
//! ```
//!
//! with end correction `δ_i = (8a_i/3π)(2 − β_i a_i/r_i)` and cavity volume
//! `V_i = π r_i² h_i`. The inverse solves a quadratic in the neck radius:
//!
//! ```text
//! (ρ₀ R_i/√(2ηρ₀)) a_i² − (8ρ₀β_i/(3 r_i π²) + M_i) a_i + 16ρ₀/(3π²) = 0
//! ```
//!
//! then recovers `l_i = π R_i a_i³ / √(2ηρ₀)` and `h_i = C_i ρ₀ c₀²/(π r_i²)`.
//! Both quadratic roots, when real, reproduce the input (R_i, M_i) exactly:
//! the forward map is two-to-one wherever both roots are physical. Root
//! selection is therefore a policy, not an inference; see [`eep_to_gp`].

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::format;
use core::f64::consts::PI;

use crate::constants::PhysicalConstants;
use crate::{Error, Result};

/// Number of neck-and-cavity orders in the resonator.
pub const ORDERS: usize = 2;

/// Relative tolerance used to confirm that a quadratic root reproduces the
/// input parameters when re-run through the forward formulas.
const ROOT_MATCH_RTOL: f64 = 1e-6;

/// Physical dimensions of a two-order resonator, SI units (m).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeometricParams {
    /// Neck radii a_i.
    pub neck_radius: [f64; ORDERS],
    /// Neck lengths l_i.
    pub neck_length: [f64; ORDERS],
    /// Cavity radii r_i.
    pub cavity_radius: [f64; ORDERS],
    /// Cavity lengths h_i.
    pub cavity_length: [f64; ORDERS],
}

impl GeometricParams {
    /// Cavity volume V_i = π r_i² h_i.
    pub fn cavity_volume(&self, order: usize) -> f64 {
        PI * self.cavity_radius[order] * self.cavity_radius[order] * self.cavity_length[order]
    }

    /// Neck end correction δ_i = (8a_i/3π)(2 − β_i a_i/r_i).
    pub fn end_correction(&self, order: usize, pc: &PhysicalConstants) -> f64 {
        let a = self.neck_radius[order];
        let r = self.cavity_radius[order];
        (8.0 * a / (3.0 * PI)) * (2.0 - pc.beta(order) * a / r)
    }

    /// The six free dimensions in sampling order: a₁, l₁, h₁, a₂, l₂, h₂.
    pub fn free_dimensions(&self) -> [f64; 6] {
        [
            self.neck_radius[0],
            self.neck_length[0],
            self.cavity_length[0],
            self.neck_radius[1],
            self.neck_length[1],
            self.cavity_length[1],
        ]
    }

    /// Rebuild from the six free dimensions plus per-order cavity radii.
    pub fn from_free_dimensions(free: [f64; 6], cavity_radius: [f64; ORDERS]) -> Self {
        Self {
            neck_radius: [free[0], free[3]],
            neck_length: [free[1], free[4]],
            cavity_radius,
            cavity_length: [free[2], free[5]],
        }
    }

    /// Checks strict positivity and a_i < r_i.
    pub fn validate(&self) -> Result<()> {
        for i in 0..ORDERS {
            let (a, l, r, h) = (
                self.neck_radius[i],
                self.neck_length[i],
                self.cavity_radius[i],
                self.cavity_length[i],
            );
            for (name, v) in [("a", a), ("l", l), ("r", r), ("h", h)] {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidGeometry(format!(
                        "{name}_{} = {v} must be strictly positive",
                        i + 1
                    )));
                }
            }
            if a >= r {
                return Err(Error::InvalidGeometry(format!(
                    "neck radius a_{} = {a} must be smaller than cavity radius r_{} = {r}",
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Design ranges for the free dimensions; cavity radii are fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GpRanges {
    /// (min, max) for a_i (m).
    pub neck_radius: (f64, f64),
    /// (min, max) for l_i (m).
    pub neck_length: (f64, f64),
    /// (min, max) for h_i (m).
    pub cavity_length: (f64, f64),
    /// Fixed cavity radius r₁ = r₂ (m).
    pub cavity_radius: f64,
}

impl Default for GpRanges {
    fn default() -> Self {
        Self {
            neck_radius: (0.001, 0.025),
            neck_length: (0.001, 0.05),
            cavity_length: (0.001, 0.127),
            cavity_radius: 0.05,
        }
    }
}

impl GpRanges {
    pub fn contains(&self, gp: &GeometricParams) -> bool {
        (0..ORDERS).all(|i| {
            in_open_range(gp.neck_radius[i], self.neck_radius)
                && in_open_range(gp.neck_length[i], self.neck_length)
                && in_open_range(gp.cavity_length[i], self.cavity_length)
        })
    }

    /// Bounds of the six free dimensions in sampling order.
    pub fn free_bounds(&self) -> [(f64, f64); 6] {
        [
            self.neck_radius,
            self.neck_length,
            self.cavity_length,
            self.neck_radius,
            self.neck_length,
            self.cavity_length,
        ]
    }
}

fn in_open_range(v: f64, (lo, hi): (f64, f64)) -> bool {
    v > lo && v < hi
}

/// Acoustic-circuit equivalents per order. `resistance[i]` is the coefficient
/// R_i such that R_i·√ω is the acoustic resistance (SI); `inertance[i]` is
/// M_i (kg/m⁴); `compliance[i]` is C_i (m³/Pa).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquivalentElectricalParams {
    pub resistance: [f64; ORDERS],
    pub inertance: [f64; ORDERS],
    pub compliance: [f64; ORDERS],
}

impl EquivalentElectricalParams {
    /// Flattens to `[R₁, M₁, C₁, R₂, M₂, C₂]`.
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.resistance[0],
            self.inertance[0],
            self.compliance[0],
            self.resistance[1],
            self.inertance[1],
            self.compliance[1],
        ]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            resistance: [v[0], v[3]],
            inertance: [v[1], v[4]],
            compliance: [v[2], v[5]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for v in self.to_array() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "equivalent electrical parameters must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Valid ranges of the equivalent electrical parameters, applied per order.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EepRanges {
    pub resistance: (f64, f64),
    pub inertance: (f64, f64),
    pub compliance: (f64, f64),
}

impl Default for EepRanges {
    fn default() -> Self {
        Self {
            resistance: (1.0, 170.0),
            inertance: (1.0, 300.0),
            compliance: (7e-10, 7e-9),
        }
    }
}

impl EepRanges {
    pub fn contains(&self, eep: &EquivalentElectricalParams) -> bool {
        (0..ORDERS).all(|i| {
            in_open_range(eep.resistance[i], self.resistance)
                && in_open_range(eep.inertance[i], self.inertance)
                && in_open_range(eep.compliance[i], self.compliance)
        })
    }

    /// Bounds in the flattened `[R₁, M₁, C₁, R₂, M₂, C₂]` order.
    pub fn bounds(&self) -> [(f64, f64); 6] {
        [
            self.resistance,
            self.inertance,
            self.compliance,
            self.resistance,
            self.inertance,
            self.compliance,
        ]
    }

    /// Maps each component onto [0, 1] by its configured range.
    pub fn normalize(&self, eep: &EquivalentElectricalParams) -> [f64; 6] {
        let mut out = eep.to_array();
        for (v, (lo, hi)) in out.iter_mut().zip(self.bounds()) {
            *v = (*v - lo) / (hi - lo);
        }
        out
    }

    /// Inverse of [`Self::normalize`], clipping into the configured ranges.
    pub fn denormalize_clipped(&self, unit: [f64; 6]) -> EquivalentElectricalParams {
        let mut out = [0.0; 6];
        for (o, (u, (lo, hi))) in out.iter_mut().zip(unit.iter().zip(self.bounds())) {
            *o = (lo + u * (hi - lo)).clamp(lo, hi);
        }
        EquivalentElectricalParams::from_array(out)
    }
}

fn sqrt_2_eta_rho(pc: &PhysicalConstants) -> f64 {
    (2.0 * pc.air_viscosity * pc.air_density).sqrt()
}

/// Forward map: geometry → equivalent electrical parameters.
pub fn gp_to_eep(
    gp: &GeometricParams,
    pc: &PhysicalConstants,
) -> Result<EquivalentElectricalParams> {
    gp.validate()?;
    let s = sqrt_2_eta_rho(pc);
    let mut eep = EquivalentElectricalParams {
        resistance: [0.0; ORDERS],
        inertance: [0.0; ORDERS],
        compliance: [0.0; ORDERS],
    };
    for i in 0..ORDERS {
        let a = gp.neck_radius[i];
        let l = gp.neck_length[i];
        eep.resistance[i] = l * s / (PI * a * a * a);
        eep.inertance[i] = pc.air_density * (l + gp.end_correction(i, pc)) / (PI * a * a);
        eep.compliance[i] =
            gp.cavity_volume(i) / (pc.air_density * pc.sound_speed * pc.sound_speed);
    }
    Ok(eep)
}

/// Coefficients (A, B, C) of the neck-radius quadratic `A a² − B a + C = 0`
/// for one order.
pub fn neck_quadratic(
    resistance: f64,
    inertance: f64,
    cavity_radius: f64,
    order: usize,
    pc: &PhysicalConstants,
) -> (f64, f64, f64) {
    let a = pc.air_density * resistance / sqrt_2_eta_rho(pc);
    let b = 8.0 * pc.air_density * pc.beta(order) / (3.0 * cavity_radius * PI * PI) + inertance;
    let c = 16.0 * pc.air_density / (3.0 * PI * PI);
    (a, b, c)
}

/// Residual of the neck-radius quadratic at `a`; exact roots give ≈ 0.
pub fn neck_quadratic_residual(
    eep: &EquivalentElectricalParams,
    order: usize,
    a: f64,
    cavity_radius: f64,
    pc: &PhysicalConstants,
) -> f64 {
    let (qa, qb, qc) = neck_quadratic(
        eep.resistance[order],
        eep.inertance[order],
        cavity_radius,
        order,
        pc,
    );
    qa * a * a - qb * a + qc
}

/// Inverse map: equivalent electrical parameters → geometry with the given
/// per-order cavity radii.
///
/// Both quadratic roots reproduce the input exactly whenever they are real;
/// the root whose forward re-evaluation matches is kept, preferring a root
/// whose neck radius and length both fall inside the configured ranges,
/// then one with an in-range radius, breaking ties toward the smaller
/// radius. Where both roots give fully in-range geometry the choice is thus
/// a convention: the smaller-necked of the two equivalent geometries is
/// returned.
///
/// With `accept_out_of_range` the result may violate `ranges` (it always
/// satisfies physical validity); otherwise out-of-range geometry is an error.
pub fn eep_to_gp(
    eep: &EquivalentElectricalParams,
    cavity_radius: [f64; ORDERS],
    pc: &PhysicalConstants,
    ranges: &GpRanges,
    accept_out_of_range: bool,
) -> Result<GeometricParams> {
    eep.validate()?;
    let s = sqrt_2_eta_rho(pc);
    let mut gp = GeometricParams {
        neck_radius: [0.0; ORDERS],
        neck_length: [0.0; ORDERS],
        cavity_radius,
        cavity_length: [0.0; ORDERS],
    };
    for i in 0..ORDERS {
        let r = cavity_radius[i];
        if !(r > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "cavity radius r_{} must be positive",
                i + 1
            )));
        }
        let (qa, qb, qc) = neck_quadratic(eep.resistance[i], eep.inertance[i], r, i, pc);
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return Err(Error::NoPhysicalNeckRadius {
                order: i + 1,
                discriminant: disc,
            });
        }
        // qb > 0, so computing the larger root first and the smaller from
        // the root product avoids cancellation.
        let larger = (qb + disc.sqrt()) / (2.0 * qa);
        // Ascending, so the in-range filter below tie-breaks to the smaller.
        let roots = [qc / (qa * larger), larger];

        // Preference: a fully in-range (a, l) pair, then an in-range neck
        // radius alone, then anything that reproduces the input; ties go to
        // the smaller radius (roots are ascending). Full-range preference
        // keeps the out-of-range error meaning "no root yields in-range
        // geometry".
        let mut chosen: Option<(f64, f64, u8)> = None;
        for &a in &roots {
            let l = PI * eep.resistance[i] * a * a * a / s;
            if !forward_matches(a, l, r, i, eep, pc) {
                continue;
            }
            let rank = if in_open_range(a, ranges.neck_radius)
                && in_open_range(l, ranges.neck_length)
            {
                2
            } else if in_open_range(a, ranges.neck_radius) {
                1
            } else {
                0
            };
            if chosen.is_none_or(|(_, _, best)| rank > best) {
                chosen = Some((a, l, rank));
            }
        }
        let (a, l, _) = chosen.ok_or(Error::NoPhysicalNeckRadius {
            order: i + 1,
            discriminant: disc,
        })?;
        gp.neck_radius[i] = a;
        gp.neck_length[i] = l;
        gp.cavity_length[i] =
            eep.compliance[i] * pc.air_density * pc.sound_speed * pc.sound_speed / (PI * r * r);
    }
    gp.validate()?;
    if !accept_out_of_range && !ranges.contains(&gp) {
        return Err(Error::GeometryOutOfRange);
    }
    Ok(gp)
}

/// The other geometry with identical (R_i, M_i): the conjugate quadratic
/// root, `a′ = 16 a²/(3π l)` with `l′ = l (a′/a)³`. Exposes the two-to-one
/// structure of the forward map for diagnostics and tests.
pub fn conjugate_neck(a: f64, l: f64) -> (f64, f64) {
    let a2 = 16.0 * a * a / (3.0 * PI * l);
    let l2 = l * (a2 / a) * (a2 / a) * (a2 / a);
    (a2, l2)
}

fn forward_matches(
    a: f64,
    l: f64,
    r: f64,
    order: usize,
    eep: &EquivalentElectricalParams,
    pc: &PhysicalConstants,
) -> bool {
    if !(a > 0.0) || !(l > 0.0) || !a.is_finite() || !l.is_finite() {
        return false;
    }
    let s = sqrt_2_eta_rho(pc);
    let resistance = l * s / (PI * a * a * a);
    let delta = (8.0 * a / (3.0 * PI)) * (2.0 - pc.beta(order) * a / r);
    let inertance = pc.air_density * (l + delta) / (PI * a * a);
    relative_error(resistance, eep.resistance[order]) < ROOT_MATCH_RTOL
        && relative_error(inertance, eep.inertance[order]) < ROOT_MATCH_RTOL
}

/// |x − y| / max(|x|, |y|), 0 when both are 0.
pub fn relative_error(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pc() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn example_gp() -> GeometricParams {
        GeometricParams {
            neck_radius: [0.01; 2],
            neck_length: [0.02; 2],
            cavity_radius: [0.05; 2],
            cavity_length: [0.06; 2],
        }
    }

    // Frozen from direct evaluation of the forward formulas with
    // ρ₀ = 1.21, c₀ = 343, η = 1.81e-5, β = (0.75, 1.05).
    #[test]
    fn forward_example_values() {
        let eep = gp_to_eep(&example_gp(), &pc()).unwrap();
        assert!(relative_error(eep.resistance[0], 42.13345694766418) < 1e-12);
        assert!(relative_error(eep.resistance[1], 42.13345694766418) < 1e-12);
        assert!(relative_error(eep.inertance[0], 137.51298434537682) < 1e-12);
        assert!(relative_error(eep.inertance[1], 135.5514062300612) < 1e-12);
        assert!(relative_error(eep.compliance[0], 3.3103012753405168e-9) < 1e-12);
        assert!(relative_error(eep.compliance[1], 3.3103012753405168e-9) < 1e-12);
    }

    #[test]
    fn forward_is_positive_on_positive_input() {
        let mut gp = example_gp();
        for (a, l, h) in [(0.0011, 0.049, 0.126), (0.0249, 0.0011, 0.0011)] {
            gp.neck_radius = [a; 2];
            gp.neck_length = [l; 2];
            gp.cavity_length = [h; 2];
            let eep = gp_to_eep(&gp, &pc()).unwrap();
            assert!(eep.to_array().iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn doubling_cavity_length_doubles_compliance_only() {
        let gp = example_gp();
        let mut doubled = gp;
        doubled.cavity_length = [0.12; 2];
        let e1 = gp_to_eep(&gp, &pc()).unwrap();
        let e2 = gp_to_eep(&doubled, &pc()).unwrap();
        for i in 0..ORDERS {
            assert_eq!(e1.resistance[i], e2.resistance[i]);
            assert_eq!(e1.inertance[i], e2.inertance[i]);
            assert!(relative_error(2.0 * e1.compliance[i], e2.compliance[i]) < 1e-15);
        }
    }

    #[test]
    fn rejects_invalid_geometry() {
        let mut gp = example_gp();
        gp.neck_length[0] = 0.0;
        assert!(matches!(
            gp_to_eep(&gp, &pc()),
            Err(Error::InvalidGeometry(_))
        ));
        let mut gp = example_gp();
        gp.neck_radius[1] = 0.05; // a == r
        assert!(matches!(
            gp_to_eep(&gp, &pc()),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn inverse_recovers_a_branch_of_the_example() {
        // For this geometry the conjugate root (a ≈ 8.488 mm) is also
        // in-range and smaller, so the selection convention returns it;
        // both branches carry identical electrical parameters.
        let eep = gp_to_eep(&example_gp(), &pc()).unwrap();
        let gp = eep_to_gp(&eep, [0.05; 2], &pc(), &GpRanges::default(), false).unwrap();
        let back = gp_to_eep(&gp, &pc()).unwrap();
        for (x, y) in back.to_array().iter().zip(eep.to_array()) {
            assert!(relative_error(*x, y) < 1e-12);
        }
        let (a_conj, l_conj) = conjugate_neck(0.01, 0.02);
        for i in 0..ORDERS {
            assert!(relative_error(gp.neck_radius[i], a_conj) < 1e-9);
            assert!(relative_error(gp.neck_length[i], l_conj) < 1e-9);
            assert!(relative_error(gp.cavity_length[i], 0.06) < 1e-12);
        }
        // 0.01 m is one of the two quadratic roots.
        let (qa, qb, qc) = neck_quadratic(eep.resistance[0], eep.inertance[0], 0.05, 0, &pc());
        let sq = (qb * qb - 4.0 * qa * qc).sqrt();
        let larger = (qb + sq) / (2.0 * qa);
        assert!(relative_error(larger, 0.01) < 1e-9);
    }

    #[test]
    fn negative_discriminant_is_an_error() {
        // Large R with small M pushes 4AC above B².
        let eep = EquivalentElectricalParams {
            resistance: [170.0; 2],
            inertance: [1.0; 2],
            compliance: [3e-9; 2],
        };
        match eep_to_gp(&eep, [0.05; 2], &pc(), &GpRanges::default(), true) {
            Err(Error::NoPhysicalNeckRadius { discriminant, .. }) => {
                assert!(discriminant < 0.0)
            }
            other => panic!("expected NoPhysicalNeckRadius, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_geometry_is_gated_by_flag() {
        // In-range eep values can still invert to out-of-range geometry.
        let eep = EquivalentElectricalParams {
            resistance: [2.0; 2],
            inertance: [250.0; 2],
            compliance: [6.9e-9; 2],
        };
        let ranges = GpRanges::default();
        let gp = eep_to_gp(&eep, [0.05; 2], &pc(), &ranges, true).unwrap();
        assert!(!ranges.contains(&gp));
        assert_eq!(
            eep_to_gp(&eep, [0.05; 2], &pc(), &ranges, false),
            Err(Error::GeometryOutOfRange)
        );
    }

    #[test]
    fn normalization_maps_range_endpoints_to_unit_interval() {
        let ranges = EepRanges::default();
        let eep = EquivalentElectricalParams {
            resistance: [1.0, 170.0],
            inertance: [1.0, 300.0],
            compliance: [7e-10, 7e-9],
        };
        let unit = ranges.normalize(&eep);
        assert_eq!(unit[0], 0.0);
        assert_eq!(unit[2], 0.0);
        assert_eq!(unit[3], 1.0);
        assert_eq!(unit[5], 1.0);
        let back = ranges.denormalize_clipped(unit);
        for (x, y) in back.to_array().iter().zip(eep.to_array()) {
            assert!(relative_error(*x, y) < 1e-12);
        }
    }
}
