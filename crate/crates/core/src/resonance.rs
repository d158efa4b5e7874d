//! Resonance finding on the branch reactance, the degree-six resonance
//! polynomial, and the average resonant-frequency error.
//!
//! Transmission loss peaks where the branch reactance X_b crosses zero with
//! |Z_b| at a local minimum; the zero between the two peaks is the
//! anti-resonance (|Z_b| locally maximal, STL ≈ 0). Zeros are located by a
//! 0.1 Hz sign-change scan refined by bisection, which is robust where
//! closed-form root finding of the degree-six polynomial is not; the
//! polynomial is kept as an independent residual cross-check.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;

use crate::branch::{impedance, stl_from_impedance};
use crate::constants::PhysicalConstants;
use crate::geometry::{gp_to_eep, EquivalentElectricalParams, GeometricParams, ORDERS};
use crate::{Error, Result};

/// Scan resolution of the sign-change search (Hz).
pub const SCAN_STEP_HZ: f64 = 0.1;
/// Bisection terminates once the bracket is narrower than this (Hz).
pub const BISECTION_TOL_HZ: f64 = 1e-4;

/// Frequency band under analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Band {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Default for Band {
    fn default() -> Self {
        Self {
            lo_hz: 101.0,
            hi_hz: 600.0,
        }
    }
}

impl Band {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo_hz > 0.0) || !(self.hi_hz > self.lo_hz) {
            return Err(Error::InvalidConfig(alloc::format!(
                "band must satisfy 0 < lo < hi, got [{}, {}]",
                self.lo_hz,
                self.hi_hz
            )));
        }
        Ok(())
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo_hz && f <= self.hi_hz
    }
}

/// The two resonances of a two-order resonator, ascending, with the
/// transmission loss evaluated exactly at each.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResonanceReport {
    /// f₁ < f₂ (Hz).
    pub frequencies: [f64; ORDERS],
    /// STL at f₁ and f₂ (dB).
    pub stl_db: [f64; ORDERS],
}

impl ResonanceReport {
    /// Angular frequency ω = 2πf of resonance `i`.
    pub fn angular(&self, i: usize) -> f64 {
        2.0 * core::f64::consts::PI * self.frequencies[i]
    }
}

/// Locates the two resonances of `eep` inside `band`.
///
/// Scans X_b at [`SCAN_STEP_HZ`], bisects each sign change to
/// [`BISECTION_TOL_HZ`], then classifies each zero by comparing |Z_b| against
/// its value 1 Hz to either side: a local minimum is a resonance, a local
/// maximum the anti-resonance. Returns an error when fewer than two
/// resonances fall inside the band.
pub fn resonant_frequencies(
    eep: &EquivalentElectricalParams,
    cross_section: f64,
    pc: &PhysicalConstants,
    band: Band,
) -> Result<ResonanceReport> {
    band.validate()?;
    let reactance = |f: f64| impedance(eep, f).reactance;

    let steps = ((band.hi_hz - band.lo_hz) / SCAN_STEP_HZ).ceil() as usize;
    let mut resonances: Vec<f64> = Vec::new();
    let mut prev_f = band.lo_hz;
    let mut prev_x = reactance(prev_f);
    for i in 1..=steps {
        let f = (band.lo_hz + i as f64 * SCAN_STEP_HZ).min(band.hi_hz);
        let x = reactance(f);
        if prev_x == 0.0 {
            if is_resonance(eep, prev_f) {
                resonances.push(prev_f);
            }
        } else if prev_x * x < 0.0 {
            let zero = bisect_zero(&reactance, prev_f, f);
            if is_resonance(eep, zero) {
                resonances.push(zero);
            }
        }
        prev_f = f;
        prev_x = x;
    }

    if resonances.len() < ORDERS {
        return Err(Error::ResonancesOutOfBand {
            lo: band.lo_hz,
            hi: band.hi_hz,
        });
    }
    let frequencies = [resonances[0], resonances[1]];
    let stl_db = frequencies
        .map(|f| stl_from_impedance(&impedance(eep, f), cross_section, pc));
    Ok(ResonanceReport {
        frequencies,
        stl_db,
    })
}

fn bisect_zero(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..64 {
        if hi - lo < BISECTION_TOL_HZ {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if flo * fmid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    0.5 * (lo + hi)
}

/// A zero of X_b is a resonance when |Z_b| is locally minimal there.
fn is_resonance(eep: &EquivalentElectricalParams, f: f64) -> bool {
    let here = impedance(eep, f).magnitude();
    let below = impedance(eep, (f - 1.0).max(f * 0.5)).magnitude();
    let above = impedance(eep, f + 1.0).magnitude();
    here < below && here < above
}

/// Coefficients `c[k]` of the resonance polynomial Σ c[k]·ω^k (k = 0..=6).
///
/// Setting X_b = 0 and clearing denominators yields
///
/// ```text
/// M₁C₁²M₂²ω⁶ + M₁C₁²R₂²ω⁵ − C₁M₂(2M₁(C₁+C₂)/C₂ + M₂)ω⁴ − C₁R₂²ω³
///   + [M₁(C₁/C₂)² + 2(M₁+M₂)C₁/C₂ + M₁ + M₂]ω² − (C₁+C₂)/C₂² = 0 .
/// ```
///
/// Every zero of X_b (resonances and the anti-resonance alike) is a root.
pub fn eq4_coefficients(eep: &EquivalentElectricalParams) -> [f64; 7] {
    let [m1, m2] = eep.inertance;
    let [c1, c2] = eep.compliance;
    let r2 = eep.resistance[1];
    [
        -(c1 + c2) / (c2 * c2),
        0.0,
        m1 * (c1 / c2) * (c1 / c2) + 2.0 * (m1 + m2) * c1 / c2 + m1 + m2,
        -c1 * r2 * r2,
        -c1 * m2 * (2.0 * m1 * (c1 + c2) / c2 + m2),
        m1 * c1 * c1 * r2 * r2,
        m1 * c1 * c1 * m2 * m2,
    ]
}

/// Horner evaluation of the resonance polynomial at angular frequency `omega0`.
///
/// This is a documentation-level cross-check of the numerical zero search,
/// not a root-finding path: compare the residual against
/// [`eq4_term_scale`] at the same ω.
pub fn eq4_residual(eep: &EquivalentElectricalParams, omega0: f64) -> f64 {
    assert!(omega0 > 0.0, "eq4_residual requires ω > 0");
    let c = eq4_coefficients(eep);
    let mut acc = 0.0;
    for &ck in c.iter().rev() {
        acc = acc * omega0 + ck;
    }
    acc
}

/// Magnitude of the largest monomial |c_k·ω^k|; the natural scale against
/// which to judge an [`eq4_residual`] value.
pub fn eq4_term_scale(eep: &EquivalentElectricalParams, omega0: f64) -> f64 {
    let c = eq4_coefficients(eep);
    let mut scale = 0.0f64;
    let mut pow = 1.0;
    for &ck in c.iter() {
        scale = scale.max((ck * pow).abs());
        pow *= omega0;
    }
    scale
}

/// Average error of the resonant frequency against a target pair:
/// (|f₁ − f₁ᵗ| + |f₂ − f₂ᵗ|)/2.
///
/// Geometries whose resonances do not both fall inside `band` propagate
/// [`Error::ResonancesOutOfBand`]; callers that need a penalty value must
/// map the error explicitly rather than receive a silent number.
pub fn aerf(
    gp: &GeometricParams,
    targets: [f64; 2],
    cross_section: f64,
    pc: &PhysicalConstants,
    band: Band,
) -> Result<f64> {
    let eep = gp_to_eep(gp, pc)?;
    let report = resonant_frequencies(&eep, cross_section, pc, band)?;
    Ok(((report.frequencies[0] - targets[0]).abs() + (report.frequencies[1] - targets[1]).abs())
        / 2.0)
}
