//! Real-coded genetic optimizer for the transmission-loss objective
//! J = −[t(f₁ᵗ) + t(f₂ᵗ)], with constraint handling by penalty and optional
//! surrogate-designed elites in the initial population.
//!
//! Constraint shortfalls are penalized rather than culled so early
//! infeasible populations still feel selection pressure toward the
//! threshold. Elitism carries the best individuals through unchanged, which
//! makes the best-penalized-fitness trace non-increasing by construction.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::branch::stl_side_branch;
use crate::constants::{PhysicalConstants, DEFAULT_CROSS_SECTION_M2};
use crate::design::{design, DesignConfig, DesignTarget};
use crate::geometry::{gp_to_eep, GeometricParams, GpRanges};
use crate::nn::EepPredictor;
use crate::{Error, Result};

/// ChaCha streams: initial-population draws, evolution, and the elite
/// design run are independent, so a seeded and an unseeded run with the
/// same seed share their random individuals and their variation sequence.
const INIT_STREAM: u64 = 1;
const EVOLVE_STREAM: u64 = 2;

/// What the optimizer maximizes transmission loss at.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectiveSpec {
    pub targets: [f64; 2],
    pub threshold_db: f64,
    pub cross_section: f64,
}

impl ObjectiveSpec {
    pub fn new(f1: f64, f2: f64) -> Self {
        Self {
            targets: [f1, f2],
            threshold_db: 10.0,
            cross_section: DEFAULT_CROSS_SECTION_M2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Surrogate-designed individuals injected into the initial population.
    pub elite_seed_count: usize,
    pub tournament_size: usize,
    pub crossover_prob: f64,
    /// Per-gene mutation probability.
    pub mutation_prob: f64,
    /// Gaussian mutation σ as a fraction of each gene's range width.
    pub mutation_scale: f64,
    /// Best individuals carried through unchanged each generation.
    pub elitism: usize,
    /// Penalty weight per dB of constraint shortfall.
    pub penalty_weight: f64,
    pub seed: u64,
}

impl GaConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            population_size: 50,
            generations: 50,
            elite_seed_count: 0,
            tournament_size: 3,
            crossover_prob: 0.9,
            mutation_prob: 0.1,
            mutation_scale: 0.05,
            elitism: 2,
            penalty_weight: 1000.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs_ok = (0.0..=1.0).contains(&self.crossover_prob)
            && (0.0..=1.0).contains(&self.mutation_prob);
        if self.population_size < 2
            || self.generations == 0
            || self.elite_seed_count > self.population_size
            || self.tournament_size == 0
            || self.elitism > self.population_size
            || !probs_ok
            || self.mutation_scale < 0.0
            || self.penalty_weight < 0.0
        {
            return Err(Error::InvalidConfig(alloc::format!(
                "invalid optimizer configuration {self:?}"
            )));
        }
        Ok(())
    }
}

/// One candidate with its cached evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Individual {
    /// a₁, l₁, h₁, a₂, l₂, h₂ in SI, always inside the configured ranges.
    pub genome: [f64; 6],
    /// Transmission loss at the two target frequencies (dB).
    pub stl_at_targets_db: [f64; 2],
    /// Raw objective J = −(t₁ + t₂).
    pub objective: f64,
    /// J plus the weighted constraint shortfall.
    pub penalized: f64,
}

impl Individual {
    pub fn geometry(&self, ranges: &GpRanges) -> GeometricParams {
        GeometricParams::from_free_dimensions(self.genome, [ranges.cavity_radius; 2])
    }

    pub fn feasible(&self, threshold_db: f64) -> bool {
        self.stl_at_targets_db.iter().all(|&t| t > threshold_db)
    }

    pub fn mean_target_stl_db(&self) -> f64 {
        (self.stl_at_targets_db[0] + self.stl_at_targets_db[1]) / 2.0
    }
}

/// Objective J = −[t(f₁ᵗ) + t(f₂ᵗ)] and the two constraint values.
pub fn objective_j(
    gp: &GeometricParams,
    spec: &ObjectiveSpec,
    pc: &PhysicalConstants,
) -> Result<(f64, [f64; 2])> {
    let eep = gp_to_eep(gp, pc)?;
    let stl = spec
        .targets
        .map(|f| stl_side_branch(&eep, f, spec.cross_section, pc));
    Ok((-(stl[0] + stl[1]), stl))
}

/// Penalized fitness: J + weight · Σ max(0, threshold − tᵢ).
pub fn penalized_fitness(objective: f64, stl: [f64; 2], spec: &ObjectiveSpec, weight: f64) -> f64 {
    let shortfall: f64 = stl
        .iter()
        .map(|&t| (spec.threshold_db - t).max(0.0))
        .sum();
    objective + weight * shortfall
}

fn evaluate(
    genome: [f64; 6],
    spec: &ObjectiveSpec,
    ranges: &GpRanges,
    cfg: &GaConfig,
    pc: &PhysicalConstants,
) -> Result<Individual> {
    let gp = GeometricParams::from_free_dimensions(genome, [ranges.cavity_radius; 2]);
    let (objective, stl) = objective_j(&gp, spec, pc)?;
    Ok(Individual {
        genome,
        stl_at_targets_db: stl,
        objective,
        penalized: penalized_fitness(objective, stl, spec, cfg.penalty_weight),
    })
}

fn clamp_genome(genome: &mut [f64; 6], ranges: &GpRanges) {
    for (g, (lo, hi)) in genome.iter_mut().zip(ranges.free_bounds()) {
        // Strictly inside the open range, matching the geometry invariants.
        let margin = (hi - lo) * 1e-9;
        *g = g.clamp(lo + margin, hi - margin);
    }
}

/// Builds the initial population: `elite_seed_count` surrogate-designed
/// individuals (requires a predictor) plus uniformly random ones. Random
/// draws use the same stream whether or not seeding is enabled, so paired
/// seeded/unseeded runs share their random individuals.
pub fn init_population(
    cfg: &GaConfig,
    spec: &ObjectiveSpec,
    ranges: &GpRanges,
    pc: &PhysicalConstants,
    predictor: Option<&dyn EepPredictor>,
) -> Result<Vec<Individual>> {
    cfg.validate()?;
    let elites = match (cfg.elite_seed_count, predictor) {
        (0, _) => Vec::new(),
        (_, None) => {
            return Err(Error::InvalidConfig(
                "elite seeding requires a trained surrogate".into(),
            ))
        }
        (count, Some(model)) => {
            let mut design_cfg = DesignConfig::new(cfg.seed);
            design_cfg.candidate_count = count;
            design_cfg.cross_section = spec.cross_section;
            design_cfg.gp_ranges = *ranges;
            let target = DesignTarget {
                f1_hz: spec.targets[0],
                f2_hz: spec.targets[1],
                min_stl_db: spec.threshold_db,
            };
            let mut results = design(&target, model, &design_cfg, pc)?;
            // Keep the top candidates by mean transmission loss at the targets.
            results.sort_by(|a, b| {
                let ka = a.realized.map_or(f64::NEG_INFINITY, |m| m.mean_target_stl_db());
                let kb = b.realized.map_or(f64::NEG_INFINITY, |m| m.mean_target_stl_db());
                kb.partial_cmp(&ka)
                    .expect("finite")
                    .then(a.candidate_index.cmp(&b.candidate_index))
            });
            results
                .into_iter()
                .filter_map(|r| r.gp.map(|gp| gp.free_dimensions()))
                .take(count)
                .collect()
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(INIT_STREAM);
    let mut genomes: Vec<[f64; 6]> = Vec::with_capacity(cfg.population_size);
    let random_count = cfg.population_size - elites.len();
    for _ in 0..random_count {
        let mut genome = [0.0; 6];
        for (g, (lo, hi)) in genome.iter_mut().zip(ranges.free_bounds()) {
            *g = rng.gen_range(lo..hi);
        }
        genomes.push(genome);
    }
    for mut genome in elites {
        clamp_genome(&mut genome, ranges);
        genomes.push(genome);
    }
    genomes
        .into_iter()
        .map(|g| evaluate(g, spec, ranges, cfg, pc))
        .collect()
}

/// One row of the evolution trace.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenerationTrace {
    pub generation: usize,
    /// Best penalized fitness in the population (non-increasing).
    pub best_penalized: f64,
    /// Mean target STL of that best individual (dB).
    pub best_mean_target_stl_db: f64,
    /// Fraction of the population meeting both constraints.
    pub feasible_fraction: f64,
}

fn trace_row(generation: usize, pop: &[Individual], spec: &ObjectiveSpec) -> GenerationTrace {
    let best = best_index(pop);
    let feasible = pop.iter().filter(|i| i.feasible(spec.threshold_db)).count();
    GenerationTrace {
        generation,
        best_penalized: pop[best].penalized,
        best_mean_target_stl_db: pop[best].mean_target_stl_db(),
        feasible_fraction: feasible as f64 / pop.len() as f64,
    }
}

fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate() {
        if ind.penalized < pop[best].penalized {
            best = i;
        }
    }
    best
}

fn tournament(pop: &[Individual], k: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.gen_range(0..pop.len());
    for _ in 1..k {
        let challenger = rng.gen_range(0..pop.len());
        if pop[challenger].penalized < pop[winner].penalized {
            winner = challenger;
        }
    }
    winner
}

/// Standard normal via Box–Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Evolves the population: tournament selection, uniform crossover,
/// range-relative Gaussian mutation, clamping, and elitism. Returns the
/// final population and the per-generation trace (generation 0 is the
/// initial population).
pub fn evolve(
    mut pop: Vec<Individual>,
    cfg: &GaConfig,
    spec: &ObjectiveSpec,
    ranges: &GpRanges,
    pc: &PhysicalConstants,
) -> Result<(Vec<Individual>, Vec<GenerationTrace>)> {
    cfg.validate()?;
    if pop.len() != cfg.population_size {
        return Err(Error::InvalidConfig(
            "population size disagrees with the configuration".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(EVOLVE_STREAM);

    let mut trace = Vec::with_capacity(cfg.generations + 1);
    trace.push(trace_row(0, &pop, spec));

    let bounds = ranges.free_bounds();
    for generation in 1..=cfg.generations {
        let mut next: Vec<Individual> = Vec::with_capacity(cfg.population_size);
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| {
            pop[a]
                .penalized
                .partial_cmp(&pop[b].penalized)
                .expect("finite fitness")
                .then(a.cmp(&b))
        });
        for &i in order.iter().take(cfg.elitism) {
            next.push(pop[i]);
        }
        while next.len() < cfg.population_size {
            let a = pop[tournament(&pop, cfg.tournament_size, &mut rng)];
            let b = pop[tournament(&pop, cfg.tournament_size, &mut rng)];
            let (mut c1, mut c2) = (a.genome, b.genome);
            if rng.gen_bool(cfg.crossover_prob) {
                for g in 0..6 {
                    if rng.gen_bool(0.5) {
                        core::mem::swap(&mut c1[g], &mut c2[g]);
                    }
                }
            }
            for child in [&mut c1, &mut c2] {
                for (g, (lo, hi)) in child.iter_mut().zip(bounds) {
                    if rng.gen_bool(cfg.mutation_prob) {
                        *g += gaussian(&mut rng) * cfg.mutation_scale * (hi - lo);
                    }
                }
                clamp_genome(child, ranges);
            }
            next.push(evaluate(c1, spec, ranges, cfg, pc)?);
            if next.len() < cfg.population_size {
                next.push(evaluate(c2, spec, ranges, cfg, pc)?);
            }
        }
        pop = next;
        trace.push(trace_row(generation, &pop, spec));
    }
    Ok((pop, trace))
}

/// Outcome of a full optimizer run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaRun {
    pub best: Individual,
    pub final_population: Vec<Individual>,
    pub trace: Vec<GenerationTrace>,
}

/// Initializes (optionally surrogate-seeded) and evolves in one call.
pub fn run_ga(
    cfg: &GaConfig,
    spec: &ObjectiveSpec,
    ranges: &GpRanges,
    pc: &PhysicalConstants,
    predictor: Option<&dyn EepPredictor>,
) -> Result<GaRun> {
    let pop = init_population(cfg, spec, ranges, pc, predictor)?;
    let (final_population, trace) = evolve(pop, cfg, spec, ranges, pc)?;
    let best = final_population[best_index(&final_population)];
    Ok(GaRun {
        best,
        final_population,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pc() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn spec() -> ObjectiveSpec {
        ObjectiveSpec::new(150.0, 250.0)
    }

    #[test]
    fn objective_matches_direct_stl_sum() {
        let gp = GeometricParams {
            neck_radius: [0.01; 2],
            neck_length: [0.02; 2],
            cavity_radius: [0.05; 2],
            cavity_length: [0.06; 2],
        };
        let (j, stl) = objective_j(&gp, &spec(), &pc()).unwrap();
        let eep = gp_to_eep(&gp, &pc()).unwrap();
        let t1 = stl_side_branch(&eep, 150.0, spec().cross_section, &pc());
        let t2 = stl_side_branch(&eep, 250.0, spec().cross_section, &pc());
        assert_eq!(stl, [t1, t2]);
        assert_eq!(j, -(t1 + t2));
    }

    #[test]
    fn boundary_constraint_values_are_not_penalized() {
        // Exactly at the threshold: J = −20 and no penalty.
        let j = -20.0;
        let p = penalized_fitness(j, [10.0, 10.0], &spec(), 1000.0);
        assert_eq!(p, j);
        // One dB short on one constraint costs the full weight.
        let p = penalized_fitness(j, [9.0, 10.0], &spec(), 1000.0);
        assert_eq!(p, j + 1000.0);
    }

    #[test]
    fn trace_is_non_increasing_and_deterministic() {
        let mut cfg = GaConfig::new(11);
        cfg.population_size = 20;
        cfg.generations = 12;
        let ranges = GpRanges::default();
        let run1 = run_ga(&cfg, &spec(), &ranges, &pc(), None).unwrap();
        let run2 = run_ga(&cfg, &spec(), &ranges, &pc(), None).unwrap();
        assert_eq!(run1, run2);
        for pair in run1.trace.windows(2) {
            assert!(pair[1].best_penalized <= pair[0].best_penalized);
        }
        assert_eq!(run1.trace.len(), cfg.generations + 1);
    }

    #[test]
    fn genomes_stay_inside_ranges() {
        let mut cfg = GaConfig::new(5);
        cfg.population_size = 16;
        cfg.generations = 8;
        cfg.mutation_scale = 0.5; // aggressive, to stress the clamp
        let ranges = GpRanges::default();
        let run = run_ga(&cfg, &spec(), &ranges, &pc(), None).unwrap();
        for ind in &run.final_population {
            for (g, (lo, hi)) in ind.genome.iter().zip(ranges.free_bounds()) {
                assert!(*g > lo && *g < hi);
            }
        }
    }

    #[test]
    fn no_variation_keeps_the_initial_best() {
        let mut cfg = GaConfig::new(9);
        cfg.population_size = 12;
        cfg.generations = 6;
        cfg.crossover_prob = 0.0;
        cfg.mutation_prob = 0.0;
        let ranges = GpRanges::default();
        let pop = init_population(&cfg, &spec(), &ranges, &pc(), None).unwrap();
        let initial_best = pop[best_index(&pop)];
        let (final_pop, trace) = evolve(pop, &cfg, &spec(), &ranges, &pc()).unwrap();
        let final_best = final_pop[best_index(&final_pop)];
        assert_eq!(initial_best, final_best);
        assert_eq!(trace[0].best_penalized, trace[cfg.generations].best_penalized);
    }

    #[test]
    fn cached_fitness_is_coherent() {
        let mut cfg = GaConfig::new(3);
        cfg.population_size = 10;
        cfg.generations = 5;
        let ranges = GpRanges::default();
        let run = run_ga(&cfg, &spec(), &ranges, &pc(), None).unwrap();
        for ind in &run.final_population {
            let re = evaluate(ind.genome, &spec(), &ranges, &cfg, &pc()).unwrap();
            assert_eq!(re, *ind);
        }
    }

    #[test]
    fn elite_seeding_without_model_is_a_configuration_error() {
        let mut cfg = GaConfig::new(3);
        cfg.elite_seed_count = 5;
        let err = init_population(&cfg, &spec(), &GpRanges::default(), &pc(), None);
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn zero_elites_matches_unseeded_run_exactly() {
        // With elite_seed_count = 0 a predictor must not change anything.
        struct Never;
        impl EepPredictor for Never {
            fn predict_eep(
                &self,
                _s: &crate::branch::StlSpectrum,
            ) -> Result<crate::geometry::EquivalentElectricalParams> {
                unreachable!("predictor must not be queried")
            }
        }
        let mut cfg = GaConfig::new(21);
        cfg.population_size = 14;
        cfg.generations = 4;
        let ranges = GpRanges::default();
        let seeded = run_ga(&cfg, &spec(), &ranges, &pc(), Some(&Never)).unwrap();
        let unseeded = run_ga(&cfg, &spec(), &ranges, &pc(), None).unwrap();
        assert_eq!(seeded, unseeded);
    }
}
