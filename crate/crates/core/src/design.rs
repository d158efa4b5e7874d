//! Surrogate-driven inverse design: synthesize plausible target spectra,
//! query the predictor, invert to geometry, and keep only what independent
//! forward evaluation confirms.
//!
//! Candidate curves are sums of two Lorentzian lines centered on the target
//! frequencies — the line shape of a side-branch resonance near its
//! reactance zero — with randomized heights and widths. Most candidates
//! have no exactly corresponding structure; the predictor maps each to the
//! nearest parameter set it knows, and every realized metric reported here
//! comes from the physics model, never from the predictor itself.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::branch::{stl_side_branch, FrequencyGrid, StlSpectrum};
use crate::constants::{PhysicalConstants, DEFAULT_CROSS_SECTION_M2};
use crate::geometry::{
    eep_to_gp, gp_to_eep, EquivalentElectricalParams, GeometricParams, GpRanges,
};
use crate::nn::EepPredictor;
use crate::resonance::{resonant_frequencies, Band};
use crate::{Error, Result};

/// ChaCha stream used for candidate-spectrum synthesis.
const SYNTHESIS_STREAM: u64 = 500;

/// Sampling ranges of the Lorentzian candidate family.
const PEAK_HEIGHT_MAX_DB: f64 = 30.0;
const HALF_WIDTH_RANGE_HZ: (f64, f64) = (2.0, 10.0);

/// What the design should achieve: two resonances and a floor on the
/// transmission loss at each.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignTarget {
    pub f1_hz: f64,
    pub f2_hz: f64,
    pub min_stl_db: f64,
}

impl DesignTarget {
    pub fn new(f1_hz: f64, f2_hz: f64) -> Self {
        Self {
            f1_hz,
            f2_hz,
            min_stl_db: 10.0,
        }
    }

    pub fn targets(&self) -> [f64; 2] {
        [self.f1_hz, self.f2_hz]
    }

    /// Targets must be ordered and lie inside the analysis band.
    pub fn validate(&self, band: Band) -> Result<()> {
        if !(self.f1_hz < self.f2_hz)
            || !band.contains(self.f1_hz)
            || !band.contains(self.f2_hz)
            || !(self.min_stl_db > 0.0)
        {
            return Err(Error::InvalidConfig(alloc::format!(
                "design target must satisfy {} < f1 < f2 < {} with a positive threshold, got {self:?}",
                band.lo_hz,
                band.hi_hz
            )));
        }
        Ok(())
    }
}

/// One synthesized target curve plus the parameters that generated it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CandidateSpectrum {
    pub spectrum: StlSpectrum,
    /// Peak heights A₁, A₂ (dB).
    pub peak_heights_db: [f64; 2],
    /// Half-widths w₁, w₂ (Hz).
    pub half_widths_hz: [f64; 2],
}

/// Draws `count` candidate spectra on `grid`:
/// t(f) = Σᵢ Aᵢ wᵢ²/((f − fᵢᵗ)² + wᵢ²) with Aᵢ ~ U[threshold, 30] dB and
/// wᵢ ~ U[2, 10] Hz, deterministically seeded.
pub fn synthesize_targets(
    target: &DesignTarget,
    count: usize,
    grid: FrequencyGrid,
    seed: u64,
) -> Result<Vec<CandidateSpectrum>> {
    if count == 0 {
        return Err(Error::InvalidConfig("candidate count must be ≥ 1".into()));
    }
    grid.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SYNTHESIS_STREAM);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let heights = [
            rng.gen_range(target.min_stl_db..PEAK_HEIGHT_MAX_DB),
            rng.gen_range(target.min_stl_db..PEAK_HEIGHT_MAX_DB),
        ];
        let widths = [
            rng.gen_range(HALF_WIDTH_RANGE_HZ.0..HALF_WIDTH_RANGE_HZ.1),
            rng.gen_range(HALF_WIDTH_RANGE_HZ.0..HALF_WIDTH_RANGE_HZ.1),
        ];
        let spectrum = StlSpectrum::from_fn(grid, |f| {
            lorentzian(f, target.f1_hz, heights[0], widths[0])
                + lorentzian(f, target.f2_hz, heights[1], widths[1])
        });
        out.push(CandidateSpectrum {
            spectrum,
            peak_heights_db: heights,
            half_widths_hz: widths,
        });
    }
    Ok(out)
}

fn lorentzian(f: f64, center: f64, height: f64, width: f64) -> f64 {
    let d = f - center;
    height * width * width / (d * d + width * width)
}

/// Forward-model metrics of one realized candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RealizedMetrics {
    /// Resonances of the recovered structure (Hz).
    pub frequencies: [f64; 2],
    /// Transmission loss at the two target frequencies (dB).
    pub stl_at_targets_db: [f64; 2],
    /// Mean absolute resonance error against the targets (Hz).
    pub aerf_hz: f64,
}

impl RealizedMetrics {
    pub fn mean_target_stl_db(&self) -> f64 {
        (self.stl_at_targets_db[0] + self.stl_at_targets_db[1]) / 2.0
    }
}

/// Everything known about one candidate after the pipeline ran.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignResult {
    pub candidate_index: usize,
    pub peak_heights_db: [f64; 2],
    pub half_widths_hz: [f64; 2],
    pub predicted_eep: EquivalentElectricalParams,
    /// Recovered geometry; `None` when inversion failed.
    pub gp: Option<GeometricParams>,
    /// Forward re-evaluation of `gp`, as provenance that realized metrics
    /// never come from the predictor.
    pub recomputed_eep: Option<EquivalentElectricalParams>,
    pub gp_in_range: bool,
    pub realized: Option<RealizedMetrics>,
    /// Both realized STL values meet the target threshold.
    pub feasible: bool,
    /// Why inversion or forward evaluation failed, when it did.
    pub failure: Option<Error>,
}

/// Knobs of a design run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignConfig {
    pub candidate_count: usize,
    pub cross_section: f64,
    pub gp_ranges: GpRanges,
    pub band: Band,
    pub grid: FrequencyGrid,
    pub seed: u64,
}

impl DesignConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            candidate_count: 100,
            cross_section: DEFAULT_CROSS_SECTION_M2,
            gp_ranges: GpRanges::default(),
            band: Band::default(),
            grid: FrequencyGrid::default(),
            seed,
        }
    }
}

/// Runs the full pipeline and ranks the outcomes: feasible before
/// infeasible, in-range geometry before out-of-range, then ascending
/// resonance error, then descending mean target STL, ties broken by
/// candidate index. Errors only when no candidate at all could be realized.
pub fn design(
    target: &DesignTarget,
    predictor: &dyn EepPredictor,
    cfg: &DesignConfig,
    pc: &PhysicalConstants,
) -> Result<Vec<DesignResult>> {
    target.validate(cfg.band)?;
    let candidates = synthesize_targets(target, cfg.candidate_count, cfg.grid, cfg.seed)?;
    let mut results: Vec<DesignResult> = candidates
        .iter()
        .enumerate()
        .map(|(index, cand)| evaluate_candidate(index, cand, target, predictor, cfg, pc))
        .collect::<Result<_>>()?;

    if results.iter().all(|r| r.realized.is_none()) {
        return Err(Error::NoRealizableDesign {
            candidates: cfg.candidate_count,
        });
    }

    results.sort_by(|a, b| rank_key(a).partial_cmp(&rank_key(b)).expect("finite keys"));
    Ok(results)
}

fn rank_key(r: &DesignResult) -> (u8, u8, f64, f64, usize) {
    let aerf = r.realized.map_or(f64::INFINITY, |m| m.aerf_hz);
    let mean_stl = r
        .realized
        .map_or(f64::NEG_INFINITY, |m| m.mean_target_stl_db());
    (
        u8::from(!r.feasible),
        u8::from(!r.gp_in_range),
        aerf,
        -mean_stl,
        r.candidate_index,
    )
}

fn evaluate_candidate(
    index: usize,
    cand: &CandidateSpectrum,
    target: &DesignTarget,
    predictor: &dyn EepPredictor,
    cfg: &DesignConfig,
    pc: &PhysicalConstants,
) -> Result<DesignResult> {
    let predicted = predictor.predict_eep(&cand.spectrum)?;
    let mut result = DesignResult {
        candidate_index: index,
        peak_heights_db: cand.peak_heights_db,
        half_widths_hz: cand.half_widths_hz,
        predicted_eep: predicted,
        gp: None,
        recomputed_eep: None,
        gp_in_range: false,
        realized: None,
        feasible: false,
        failure: None,
    };
    // Out-of-range geometry is kept (flagged) — a slightly out-of-range
    // structure can still be useful — but inversion failures cannot be.
    let gp = match eep_to_gp(
        &predicted,
        [cfg.gp_ranges.cavity_radius; 2],
        pc,
        &cfg.gp_ranges,
        true,
    ) {
        Ok(gp) => gp,
        Err(err) => {
            result.failure = Some(err);
            return Ok(result);
        }
    };
    result.gp_in_range = cfg.gp_ranges.contains(&gp);
    let recomputed = gp_to_eep(&gp, pc).expect("inverted geometry is valid");
    result.gp = Some(gp);
    result.recomputed_eep = Some(recomputed);
    match resonant_frequencies(&recomputed, cfg.cross_section, pc, cfg.band) {
        Ok(report) => {
            let stl_at_targets = target
                .targets()
                .map(|f| stl_side_branch(&recomputed, f, cfg.cross_section, pc));
            let aerf = ((report.frequencies[0] - target.f1_hz).abs()
                + (report.frequencies[1] - target.f2_hz).abs())
                / 2.0;
            result.feasible = stl_at_targets.iter().all(|&t| t >= target.min_stl_db);
            result.realized = Some(RealizedMetrics {
                frequencies: report.frequencies,
                stl_at_targets_db: stl_at_targets,
                aerf_hz: aerf,
            });
        }
        Err(err) => result.failure = Some(err),
    }
    Ok(result)
}

/// A sensitivity map of the resonance error around a design: the two neck
/// radii are scaled over [1 − range, 1 + range] on an n×n grid while all
/// other dimensions stay fixed. `None` marks cells whose geometry is
/// invalid (a_i ≥ r_i) or whose resonances leave the band.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SensitivityMap {
    /// Shared normalized-radius axis for both necks.
    pub scales: Vec<f64>,
    /// Row-major: `aerf[i * n + j]` scales a₁ by `scales[i]`, a₂ by
    /// `scales[j]`.
    pub aerf_hz: Vec<Option<f64>>,
}

impl SensitivityMap {
    pub fn size(&self) -> usize {
        self.scales.len()
    }

    pub fn at(&self, i: usize, j: usize) -> Option<f64> {
        self.aerf_hz[i * self.size() + j]
    }

    /// Value of the unperturbed center cell (odd sizes only).
    pub fn center(&self) -> Option<f64> {
        let mid = self.size() / 2;
        self.at(mid, mid)
    }
}

pub fn sensitivity_map(
    gp: &GeometricParams,
    target: &DesignTarget,
    steps: usize,
    rel_range: f64,
    cross_section: f64,
    pc: &PhysicalConstants,
    band: Band,
) -> Result<SensitivityMap> {
    if steps < 2 {
        return Err(Error::InvalidConfig(
            "sensitivity map needs at least a 2x2 grid".into(),
        ));
    }
    let mut scales: Vec<f64> = (0..steps)
        .map(|i| 1.0 - rel_range + 2.0 * rel_range * i as f64 / (steps - 1) as f64)
        .collect();
    if steps % 2 == 1 {
        // Keep the center cell bit-exact on the unperturbed design.
        scales[steps / 2] = 1.0;
    }
    let mut aerf_hz = Vec::with_capacity(steps * steps);
    for &s1 in &scales {
        for &s2 in &scales {
            let mut perturbed = *gp;
            perturbed.neck_radius[0] *= s1;
            perturbed.neck_radius[1] *= s2;
            let cell = if perturbed.validate().is_err() {
                None
            } else {
                crate::resonance::aerf(&perturbed, target.targets(), cross_section, pc, band).ok()
            };
            aerf_hz.push(cell);
        }
    }
    Ok(SensitivityMap { scales, aerf_hz })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pc() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn candidates_peak_at_the_targets_and_are_seeded() {
        let target = DesignTarget::new(150.0, 250.0);
        let grid = FrequencyGrid::default();
        let a = synthesize_targets(&target, 20, grid, 5).unwrap();
        let b = synthesize_targets(&target, 20, grid, 5).unwrap();
        assert_eq!(a, b);
        let c = synthesize_targets(&target, 20, grid, 6).unwrap();
        assert_ne!(a, c);
        for cand in &a {
            assert!(cand.spectrum.values.iter().all(|&v| v >= 0.0));
            // Within a window around each target the curve peaks on it.
            for t in [150.0, 250.0] {
                let lo = ((t - 25.0 - grid.start_hz) / grid.step_hz) as usize;
                let hi = ((t + 25.0 - grid.start_hz) / grid.step_hz) as usize;
                let local = (lo..=hi)
                    .max_by(|&x, &y| {
                        cand.spectrum.values[x]
                            .partial_cmp(&cand.spectrum.values[y])
                            .unwrap()
                    })
                    .unwrap();
                assert!((grid.frequency(local) - t).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn symmetric_parameters_give_a_symmetric_template() {
        // Symmetric targets on a grid symmetric about their midpoint.
        let target = DesignTarget::new(200.0, 300.0);
        let grid = FrequencyGrid {
            start_hz: 150.0,
            step_hz: 1.0,
            count: 201,
        };
        let spectrum = StlSpectrum::from_fn(grid, |f| {
            lorentzian(f, target.f1_hz, 20.0, 5.0) + lorentzian(f, target.f2_hz, 20.0, 5.0)
        });
        for k in 0..grid.count {
            let mirrored = grid.count - 1 - k;
            assert!((spectrum.values[k] - spectrum.values[mirrored]).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_out_of_band_targets() {
        let target = DesignTarget::new(50.0, 250.0);
        assert!(target.validate(Band::default()).is_err());
        let inverted = DesignTarget::new(250.0, 150.0);
        assert!(inverted.validate(Band::default()).is_err());
    }

    /// Predictor stub that always returns one fixed parameter set.
    struct FixedPredictor(EquivalentElectricalParams);

    impl EepPredictor for FixedPredictor {
        fn predict_eep(&self, _spectrum: &StlSpectrum) -> Result<EquivalentElectricalParams> {
            Ok(self.0)
        }
    }

    fn workable_eep() -> EquivalentElectricalParams {
        let gp = GeometricParams {
            neck_radius: [0.01; 2],
            neck_length: [0.02; 2],
            cavity_radius: [0.05; 2],
            cavity_length: [0.06; 2],
        };
        gp_to_eep(&gp, &pc()).unwrap()
    }

    #[test]
    fn design_reports_are_ranked_and_forward_validated() {
        let target = DesignTarget::new(150.0, 250.0);
        let predictor = FixedPredictor(workable_eep());
        let mut cfg = DesignConfig::new(3);
        cfg.candidate_count = 5;
        let results = design(&target, &predictor, &cfg, &pc()).unwrap();
        assert_eq!(results.len(), 5);
        for r in &results {
            let m = r.realized.as_ref().expect("fixed predictor is invertible");
            let recomputed = r.recomputed_eep.unwrap();
            // Realized metrics come from the forward model of the geometry.
            let direct = crate::resonance::resonant_frequencies(
                &recomputed,
                cfg.cross_section,
                &pc(),
                cfg.band,
            )
            .unwrap();
            assert_eq!(m.frequencies, direct.frequencies);
            for (x, y) in recomputed.to_array().iter().zip(r.predicted_eep.to_array()) {
                assert!(crate::geometry::relative_error(*x, y) < 1e-9);
            }
        }
        // Identical candidates: ranking falls back to the candidate index.
        let indices: Vec<usize> = results.iter().map(|r| r.candidate_index).collect();
        assert_eq!(indices, alloc::vec![0, 1, 2, 3, 4]);
        // Feasible results outrank infeasible ones.
        for pair in results.windows(2) {
            assert!(pair[0].feasible >= pair[1].feasible);
        }
    }

    #[test]
    fn single_candidate_ranking_is_singleton() {
        let target = DesignTarget::new(150.0, 250.0);
        let predictor = FixedPredictor(workable_eep());
        let mut cfg = DesignConfig::new(3);
        cfg.candidate_count = 1;
        let results = design(&target, &predictor, &cfg, &pc()).unwrap();
        assert_eq!(results.len(), 1);
    }

    #[test]
    fn unrealizable_predictions_error_out() {
        // This resistance/inertance pair has no physical neck.
        let predictor = FixedPredictor(EquivalentElectricalParams {
            resistance: [170.0; 2],
            inertance: [1.0; 2],
            compliance: [3e-9; 2],
        });
        let target = DesignTarget::new(150.0, 250.0);
        let mut cfg = DesignConfig::new(3);
        cfg.candidate_count = 4;
        assert_eq!(
            design(&target, &predictor, &cfg, &pc()),
            Err(Error::NoRealizableDesign { candidates: 4 })
        );
    }

    #[test]
    fn sensitivity_map_center_matches_direct_aerf() {
        let gp = GeometricParams {
            neck_radius: [0.01; 2],
            neck_length: [0.02; 2],
            cavity_radius: [0.05; 2],
            cavity_length: [0.06; 2],
        };
        let eep = gp_to_eep(&gp, &pc()).unwrap();
        let report = crate::resonance::resonant_frequencies(
            &eep,
            DEFAULT_CROSS_SECTION_M2,
            &pc(),
            Band::default(),
        )
        .unwrap();
        let target = DesignTarget::new(report.frequencies[0], report.frequencies[1]);
        let map = sensitivity_map(
            &gp,
            &target,
            5,
            0.1,
            DEFAULT_CROSS_SECTION_M2,
            &pc(),
            Band::default(),
        )
        .unwrap();
        assert_eq!(map.center(), Some(0.0));
        // Every cell agrees with a direct evaluation.
        for (i, &s1) in map.scales.iter().enumerate() {
            for (j, &s2) in map.scales.iter().enumerate() {
                let mut p = gp;
                p.neck_radius[0] *= s1;
                p.neck_radius[1] *= s2;
                let direct = crate::resonance::aerf(
                    &p,
                    target.targets(),
                    DEFAULT_CROSS_SECTION_M2,
                    &pc(),
                    Band::default(),
                )
                .ok();
                assert_eq!(map.at(i, j), direct);
            }
        }
        // A ±10% neck perturbation moves the resonances by several hertz,
        // so the unperturbed design sits in the lowest decile of its map.
        let mut values: Vec<f64> = map.aerf_hz.iter().flatten().copied().collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let decile = values[(values.len() - 1) / 10];
        assert!(map.center().unwrap() <= decile);
    }
}
