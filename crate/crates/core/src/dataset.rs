//! Deterministic generation of the (STL spectrum → EEP) training corpus:
//! rejection sampling, resonance binning, splitting, and input normalization.
//!
//! Candidate geometries are drawn uniformly inside the design ranges, one
//! ChaCha stream per candidate index, so generation is reproducible and
//! order-independent regardless of how evaluation is parallelized. A
//! candidate is kept when its electrical parameters sit inside the
//! configured ranges, both resonances fall inside the analysis band, and the
//! transmission loss at each resonance clears the threshold. Accepted
//! samples are binned by their (f₁, f₂) band pair so the corpus covers the
//! band uniformly rather than where random geometry happens to cluster.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::branch::{stl_spectrum, FrequencyGrid, StlSpectrum};
use crate::constants::{PhysicalConstants, DEFAULT_CROSS_SECTION_M2};
use crate::geometry::{
    gp_to_eep, EepRanges, EquivalentElectricalParams, GeometricParams, GpRanges,
};
use crate::resonance::{resonant_frequencies, Band, ResonanceReport};
use crate::{Error, Result};

/// Standard deviations are clamped to this before dividing, so constant
/// input features normalize to zero instead of NaN.
pub const STD_EPSILON: f64 = 1e-8;

/// One accepted corpus entry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    pub gp: GeometricParams,
    pub eep: EquivalentElectricalParams,
    pub resonances: ResonanceReport,
    pub spectrum: StlSpectrum,
}

/// Resonance-band binning and per-group quotas.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinSpec {
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    pub band_width_hz: f64,
    /// Quota per (f₁-band, f₂-band) group.
    pub samples_per_group: usize,
    /// Attempt budget, scaled by the number of groups.
    pub max_attempts_per_group: u64,
}

impl Default for BinSpec {
    fn default() -> Self {
        Self {
            band_lo_hz: 100.0,
            band_hi_hz: 600.0,
            band_width_hz: 50.0,
            samples_per_group: 5000,
            max_attempts_per_group: 200_000,
        }
    }
}

impl BinSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.band_width_hz > 0.0)
            || !(self.band_hi_hz > self.band_lo_hz)
            || self.samples_per_group == 0
            || self.max_attempts_per_group == 0
        {
            return Err(Error::InvalidConfig(format!("invalid bin spec {self:?}")));
        }
        if self.num_bands() < 2 {
            return Err(Error::InvalidConfig(
                "binning needs at least two bands so that f\u{2081} and f\u{2082} can occupy distinct bands"
                    .into(),
            ));
        }
        Ok(())
    }

    pub fn num_bands(&self) -> usize {
        ((self.band_hi_hz - self.band_lo_hz) / self.band_width_hz).round() as usize
    }

    /// Ordered band pairs (b₁ < b₂).
    pub fn group_count(&self) -> usize {
        let n = self.num_bands();
        n * (n - 1) / 2
    }

    pub fn band_index(&self, f: f64) -> Option<usize> {
        if f < self.band_lo_hz || f > self.band_hi_hz {
            return None;
        }
        let idx = ((f - self.band_lo_hz) / self.band_width_hz) as usize;
        Some(idx.min(self.num_bands() - 1))
    }

    pub fn band_bounds(&self, index: usize) -> (f64, f64) {
        (
            self.band_lo_hz + index as f64 * self.band_width_hz,
            self.band_lo_hz + (index + 1) as f64 * self.band_width_hz,
        )
    }

    /// Flat index of the ordered pair (b₁, b₂), b₁ < b₂.
    pub fn group_index(&self, b1: usize, b2: usize) -> usize {
        debug_assert!(b1 < b2 && b2 < self.num_bands());
        let n = self.num_bands();
        b1 * n - b1 * (b1 + 1) / 2 + (b2 - b1 - 1)
    }

    /// Inverse of [`Self::group_index`].
    pub fn group_bands(&self, mut group: usize) -> (usize, usize) {
        let n = self.num_bands();
        for b1 in 0..n {
            let row = n - b1 - 1;
            if group < row {
                return (b1, b1 + 1 + group);
            }
            group -= row;
        }
        unreachable!("group index out of range");
    }
}

/// Why a candidate was rejected by [`filter_sample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Rejection {
    EepOutOfRange,
    ResonanceOutOfBand,
    StlBelowThreshold,
}

/// Accept/reject decision for a candidate whose electrical parameters and
/// resonances (`None` marks a resonance-out-of-band candidate) are already
/// computed.
pub fn filter_sample(
    eep: &EquivalentElectricalParams,
    resonances: Option<&ResonanceReport>,
    eep_ranges: &EepRanges,
    threshold_db: f64,
) -> core::result::Result<(), Rejection> {
    if !eep_ranges.contains(eep) {
        return Err(Rejection::EepOutOfRange);
    }
    let report = resonances.ok_or(Rejection::ResonanceOutOfBand)?;
    if report.stl_db.iter().any(|&t| t <= threshold_db) {
        return Err(Rejection::StlBelowThreshold);
    }
    Ok(())
}

/// Full configuration of a generation run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenerationConfig {
    pub gp_ranges: GpRanges,
    pub eep_ranges: EepRanges,
    pub bins: BinSpec,
    pub band: Band,
    pub grid: FrequencyGrid,
    pub stl_threshold_db: f64,
    pub cross_section: f64,
    /// Stop once this many samples are accepted, even with groups unfilled.
    pub target_total: Option<usize>,
    pub seed: u64,
    /// Worker threads for candidate evaluation; results are identical for
    /// any value.
    pub threads: usize,
}

impl GenerationConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            gp_ranges: GpRanges::default(),
            eep_ranges: EepRanges::default(),
            bins: BinSpec::default(),
            band: Band::default(),
            grid: FrequencyGrid::default(),
            stl_threshold_db: 10.0,
            cross_section: DEFAULT_CROSS_SECTION_M2,
            target_total: None,
            seed,
            threads: 1,
        }
    }

    /// Desk-scale preset: 1000-sample group quotas, stopping at 20k total.
    pub fn desk(seed: u64) -> Self {
        let mut cfg = Self::new(seed);
        cfg.bins.samples_per_group = 1000;
        cfg.bins.max_attempts_per_group = 40_000;
        cfg.target_total = Some(20_000);
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.bins.validate()?;
        self.band.validate()?;
        self.grid.validate()?;
        if !(self.stl_threshold_db > 0.0) || !(self.cross_section > 0.0) {
            return Err(Error::InvalidConfig(
                "threshold and cross section must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Uniform geometry draw for candidate `index`: an independent ChaCha
/// stream per index, so draws do not depend on evaluation order.
/// Dimensions are drawn in the order a₁, l₁, h₁, a₂, l₂, h₂.
pub fn sample_gp(seed: u64, index: u64, ranges: &GpRanges) -> GeometricParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut free = [0.0; 6];
    for (v, (lo, hi)) in free.iter_mut().zip(ranges.free_bounds()) {
        *v = rng.gen_range(lo..hi);
    }
    GeometricParams::from_free_dimensions(free, [ranges.cavity_radius; 2])
}

/// Forward-evaluates one candidate geometry and applies the filter.
pub fn evaluate_candidate(
    gp: GeometricParams,
    cfg: &GenerationConfig,
    pc: &PhysicalConstants,
) -> core::result::Result<Sample, Rejection> {
    let eep = gp_to_eep(&gp, pc).expect("sampled geometry is valid");
    // Range check first: it is free, the resonance scan is not.
    if !cfg.eep_ranges.contains(&eep) {
        return Err(Rejection::EepOutOfRange);
    }
    let resonances = resonant_frequencies(&eep, cfg.cross_section, pc, cfg.band).ok();
    filter_sample(&eep, resonances.as_ref(), &cfg.eep_ranges, cfg.stl_threshold_db)?;
    let resonances = resonances.expect("filter passed");
    let spectrum = stl_spectrum(&eep, cfg.cross_section, pc, cfg.grid)
        .expect("grid validated by the generation config");
    Ok(Sample {
        gp,
        eep,
        resonances,
        spectrum,
    })
}

/// Counts of every rejection cause seen during generation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RejectionCounts {
    pub eep_out_of_range: u64,
    pub resonance_out_of_band: u64,
    pub stl_below_threshold: u64,
    /// Both resonances fell inside the same band; no group accepts it.
    pub same_band: u64,
    /// The (f₁, f₂) group had already met its quota.
    pub group_full: u64,
}

/// Fill state of one (f₁-band, f₂-band) group.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupFill {
    pub f1_band: (f64, f64),
    pub f2_band: (f64, f64),
    pub count: usize,
    pub filled: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenerationReport {
    pub seed: u64,
    pub attempts: u64,
    pub accepted: usize,
    pub rejections: RejectionCounts,
    pub groups: Vec<GroupFill>,
    /// Groups with zero accepted samples when generation stopped.
    pub empty_groups: usize,
}

/// Candidates evaluated per scheduling block; fixed so that thread count
/// cannot influence which candidates are considered.
const EVALUATION_BLOCK: usize = 1024;

/// Rejection-samples until every group meets its quota, the optional total
/// target is reached, or the attempt budget is exhausted. Deterministic in
/// (seed, config).
pub fn generate_dataset(
    cfg: &GenerationConfig,
    pc: &PhysicalConstants,
) -> Result<(Vec<Sample>, GenerationReport)> {
    cfg.validate()?;
    pc.validate()?;

    let group_count = cfg.bins.group_count();
    let budget = cfg.bins.max_attempts_per_group * group_count as u64;
    let quota = cfg.bins.samples_per_group;

    let mut fills = alloc::vec![0usize; group_count];
    let mut rejections = RejectionCounts::default();
    // (group, candidate index, sample) triples for the stable final order.
    let mut accepted: Vec<(usize, u64, Sample)> = Vec::new();
    let mut attempts: u64 = 0;
    let mut done = false;

    while !done && attempts < budget {
        let block_len = EVALUATION_BLOCK.min((budget - attempts) as usize);
        let outcomes = evaluate_block(cfg, pc, attempts, block_len);
        for (offset, outcome) in outcomes.into_iter().enumerate() {
            let index = attempts + offset as u64;
            match outcome {
                Err(Rejection::EepOutOfRange) => rejections.eep_out_of_range += 1,
                Err(Rejection::ResonanceOutOfBand) => rejections.resonance_out_of_band += 1,
                Err(Rejection::StlBelowThreshold) => rejections.stl_below_threshold += 1,
                Ok(sample) => {
                    let b1 = cfg.bins.band_index(sample.resonances.frequencies[0]);
                    let b2 = cfg.bins.band_index(sample.resonances.frequencies[1]);
                    let (b1, b2) = match (b1, b2) {
                        (Some(b1), Some(b2)) if b1 < b2 => (b1, b2),
                        (Some(_), Some(_)) => {
                            rejections.same_band += 1;
                            continue;
                        }
                        // Analysis band wider than the binning range.
                        _ => {
                            rejections.resonance_out_of_band += 1;
                            continue;
                        }
                    };
                    let group = cfg.bins.group_index(b1, b2);
                    if fills[group] >= quota {
                        rejections.group_full += 1;
                        continue;
                    }
                    fills[group] += 1;
                    accepted.push((group, index, sample));
                    let total = accepted.len();
                    if fills.iter().all(|&c| c >= quota)
                        || cfg.target_total.is_some_and(|t| total >= t)
                    {
                        attempts = index + 1;
                        done = true;
                        break;
                    }
                }
            }
        }
        if !done {
            attempts += block_len as u64;
        }
    }

    accepted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let groups = (0..group_count)
        .map(|g| {
            let (b1, b2) = cfg.bins.group_bands(g);
            GroupFill {
                f1_band: cfg.bins.band_bounds(b1),
                f2_band: cfg.bins.band_bounds(b2),
                count: fills[g],
                filled: fills[g] >= quota,
            }
        })
        .collect::<Vec<_>>();
    let report = GenerationReport {
        seed: cfg.seed,
        attempts,
        accepted: accepted.len(),
        rejections,
        empty_groups: fills.iter().filter(|&&c| c == 0).count(),
        groups,
    };
    let samples = accepted.into_iter().map(|(_, _, s)| s).collect();
    Ok((samples, report))
}

#[cfg(feature = "std")]
fn evaluate_block(
    cfg: &GenerationConfig,
    pc: &PhysicalConstants,
    first_index: u64,
    len: usize,
) -> Vec<core::result::Result<Sample, Rejection>> {
    let workers = cfg.threads.max(1).min(len.max(1));
    if workers <= 1 {
        return (0..len)
            .map(|i| {
                let gp = sample_gp(cfg.seed, first_index + i as u64, &cfg.gp_ranges);
                evaluate_candidate(gp, cfg, pc)
            })
            .collect();
    }
    let mut outcomes: Vec<Option<core::result::Result<Sample, Rejection>>> =
        alloc::vec![None; len];
    let chunk = len.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slot) in outcomes.chunks_mut(chunk).enumerate() {
            let base = first_index + (w * chunk) as u64;
            scope.spawn(move || {
                for (i, out) in slot.iter_mut().enumerate() {
                    let gp = sample_gp(cfg.seed, base + i as u64, &cfg.gp_ranges);
                    *out = Some(evaluate_candidate(gp, cfg, pc));
                }
            });
        }
    });
    outcomes.into_iter().map(|o| o.expect("worker filled slot")).collect()
}

#[cfg(not(feature = "std"))]
fn evaluate_block(
    cfg: &GenerationConfig,
    pc: &PhysicalConstants,
    first_index: u64,
    len: usize,
) -> Vec<core::result::Result<Sample, Rejection>> {
    (0..len)
        .map(|i| {
            let gp = sample_gp(cfg.seed, first_index + i as u64, &cfg.gp_ranges);
            evaluate_candidate(gp, cfg, pc)
        })
        .collect()
}

/// Shuffle-then-partition fractions for train/validation/test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DatasetSplit {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for DatasetSplit {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            val_fraction: 0.1,
            test_fraction: 0.1,
            seed: 42,
        }
    }
}

impl DatasetSplit {
    pub fn validate(&self) -> Result<()> {
        let sum = self.train_fraction + self.val_fraction + self.test_fraction;
        let all_nonneg =
            self.train_fraction >= 0.0 && self.val_fraction >= 0.0 && self.test_fraction >= 0.0;
        if !all_nonneg || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "split fractions must be non-negative and sum to 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Deterministic shuffle followed by a contiguous partition. Validation and
/// test sizes are floored; the remainder goes to the training part.
pub fn split_dataset(
    samples: Vec<Sample>,
    split: &DatasetSplit,
) -> Result<(Vec<Sample>, Vec<Sample>, Vec<Sample>)> {
    split.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyDataset(String::from("nothing to split")));
    }
    let n = samples.len();
    let n_val = (split.val_fraction * n as f64).floor() as usize;
    let n_test = (split.test_fraction * n as f64).floor() as usize;
    let n_train = n - n_val - n_test;

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(split.seed);
    order.shuffle(&mut rng);

    let mut slots: Vec<Option<Sample>> = samples.into_iter().map(Some).collect();
    let mut take = |indices: &[usize]| -> Vec<Sample> {
        indices
            .iter()
            .map(|&i| slots[i].take().expect("each index taken once"))
            .collect()
    };
    let train = take(&order[..n_train]);
    let val = take(&order[n_train..n_train + n_val]);
    let test = take(&order[n_train + n_val..]);
    Ok((train, val, test))
}

/// Input z-scoring statistics plus the fixed output range map.
///
/// Inputs (spectrum bins) are z-scored with statistics measured on the
/// training part; outputs are mapped onto [0, 1] by the configured
/// electrical-parameter ranges, not by the data.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormalizationStats {
    pub grid: FrequencyGrid,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub output_ranges: EepRanges,
}

impl NormalizationStats {
    pub fn normalize_spectrum(&self, spectrum: &StlSpectrum) -> Result<Vec<f64>> {
        if spectrum.grid != self.grid {
            return Err(Error::GridMismatch(format!(
                "expected {:?}, got {:?}",
                self.grid, spectrum.grid
            )));
        }
        Ok(spectrum
            .values
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn normalize_output(&self, eep: &EquivalentElectricalParams) -> [f64; 6] {
        self.output_ranges.normalize(eep)
    }

    pub fn denormalize_output(&self, unit: [f64; 6]) -> EquivalentElectricalParams {
        self.output_ranges.denormalize_clipped(unit)
    }
}

/// Per-bin mean and standard deviation (population) over the training part.
pub fn compute_normalization(
    train: &[Sample],
    output_ranges: EepRanges,
) -> Result<NormalizationStats> {
    let first = train
        .first()
        .ok_or_else(|| Error::EmptyDataset(String::from("normalization needs training data")))?;
    let grid = first.spectrum.grid;
    let dim = grid.count;
    let n = train.len() as f64;

    let mut mean = alloc::vec![0.0; dim];
    for s in train {
        if s.spectrum.grid != grid {
            return Err(Error::GridMismatch(
                "training spectra sampled on different grids".into(),
            ));
        }
        for (acc, v) in mean.iter_mut().zip(&s.spectrum.values) {
            *acc += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = alloc::vec![0.0; dim];
    for s in train {
        for ((acc, v), m) in var.iter_mut().zip(&s.spectrum.values).zip(&mean) {
            let d = v - m;
            *acc += d * d;
        }
    }
    let std = var
        .into_iter()
        .map(|v| (v / n).sqrt().max(STD_EPSILON))
        .collect();
    Ok(NormalizationStats {
        grid,
        mean,
        std,
        output_ranges,
    })
}
