//! `thr optimize` — the genetic optimizer, with or without surrogate
//! elites, plus the paired seeded-vs-unseeded comparison harness.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thr_core::ga::{run_ga, GaConfig, GaRun, GenerationTrace, Individual, ObjectiveSpec};
use thr_core::geometry::GpRanges;
use thr_core::nn::{EepPredictor, MlpModel};

use crate::config::{parse_float_list, Resolved};
use crate::error::CliError;
use crate::formats::{model_file, write_json};
use crate::ReportHeader;

#[derive(Debug, clap::Args)]
pub struct OptimizeArgs {
    /// Target resonances f1,f2 (Hz).
    #[arg(long)]
    pub targets: String,

    #[arg(long, default_value_t = 50)]
    pub pop: usize,

    #[arg(long, default_value_t = 50)]
    pub generations: usize,

    /// Surrogate-designed individuals in the initial population
    /// (requires --model).
    #[arg(long, default_value_t = 0)]
    pub elites: usize,

    /// Trained model file for elite seeding.
    #[arg(long)]
    pub model: Option<PathBuf>,

    /// Run this many seeded/unseeded pairs and write a comparison summary.
    #[arg(long)]
    pub paired: Option<usize>,

    /// Minimum transmission loss constraint (dB).
    #[arg(long, default_value_t = 10.0)]
    pub threshold: f64,

    /// Duct cross section in cm².
    #[arg(long, default_value_t = 100.0)]
    pub cross_section_cm2: f64,
}

#[derive(Debug, Serialize)]
struct BestSummary {
    genome_cm: [f64; 6],
    stl_at_targets_db: [f64; 2],
    mean_target_stl_db: f64,
    objective: f64,
    penalized: f64,
}

impl BestSummary {
    fn new(ind: &Individual) -> Self {
        Self {
            genome_cm: ind.genome.map(|v| v * 100.0),
            stl_at_targets_db: ind.stl_at_targets_db,
            mean_target_stl_db: ind.mean_target_stl_db(),
            objective: ind.objective,
            penalized: ind.penalized,
        }
    }
}

#[derive(Debug, Serialize)]
struct OptimizeReport {
    #[serde(flatten)]
    header: ReportHeader,
    spec: ObjectiveSpec,
    config: GaConfig,
    best: BestSummary,
    trace_file: PathBuf,
}

#[derive(Debug, Serialize)]
struct PairOutcome {
    pair: usize,
    seed: u64,
    seeded_best: BestSummary,
    unseeded_best: BestSummary,
    /// Seeded best-penalized trace ≤ unseeded at every generation.
    seeded_dominates: bool,
}

#[derive(Debug, Serialize)]
struct PairedReport {
    #[serde(flatten)]
    header: ReportHeader,
    spec: ObjectiveSpec,
    config: GaConfig,
    pairs: Vec<PairOutcome>,
    /// Of the per-generation medians over pairs: seeded ≤ unseeded
    /// everywhere.
    median_seeded_dominates: bool,
    seeded_final_better_count: usize,
    median_seeded_trace: Vec<f64>,
    median_unseeded_trace: Vec<f64>,
}

fn write_trace_csv(path: &Path, trace: &[GenerationTrace]) -> Result<(), CliError> {
    let mut out =
        String::from("generation,best_penalized_j,best_mean_target_stl_db,feasible_fraction\n");
    for t in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.generation, t.best_penalized, t.best_mean_target_stl_db, t.feasible_fraction
        ));
    }
    crate::error::write_file(&path.to_path_buf(), out.as_bytes())
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

pub fn run(resolved: &Resolved, args: OptimizeArgs) -> Result<(), CliError> {
    let targets = parse_float_list::<2>(&args.targets, "--targets")?;
    let spec = ObjectiveSpec {
        targets,
        threshold_db: args.threshold,
        cross_section: args.cross_section_cm2 * 1e-4,
    };
    let model: Option<MlpModel> = match &args.model {
        Some(path) => Some(model_file::load_model(path)?.model),
        None => None,
    };
    if args.elites > 0 && model.is_none() && args.paired.is_none() {
        return Err(CliError::Validation(
            "--elites needs --model (elite individuals come from the surrogate)".into(),
        ));
    }
    let mut cfg = GaConfig::new(resolved.seed);
    cfg.population_size = args.pop;
    cfg.generations = args.generations;
    cfg.elite_seed_count = args.elites;
    let ranges = GpRanges::default();

    match args.paired {
        None => {
            let predictor = model.as_ref().map(|m| m as &dyn EepPredictor);
            let run = run_ga(&cfg, &spec, &ranges, &resolved.constants, predictor)?;
            let trace_file = resolved.out("trace.csv");
            write_trace_csv(&trace_file, &run.trace)?;
            println!(
                "best after {} generations: mean target STL {:.2} dB (J = {:.2})",
                cfg.generations,
                run.best.mean_target_stl_db(),
                run.best.objective
            );
            let report = OptimizeReport {
                header: ReportHeader::new("optimize", resolved, cfg.seed),
                spec,
                config: cfg,
                best: BestSummary::new(&run.best),
                trace_file,
            };
            write_json(&resolved.out("ga_report.json"), &report)
        }
        Some(pairs) => {
            if pairs == 0 {
                return Err(CliError::Validation("--paired must be ≥ 1".into()));
            }
            let model = model.ok_or_else(|| {
                CliError::Validation("--paired needs --model for the seeded arm".into())
            })?;
            if cfg.elite_seed_count == 0 {
                cfg.elite_seed_count = 5;
            }
            run_paired(resolved, spec, cfg, pairs, &model, &ranges)
        }
    }
}

fn run_paired(
    resolved: &Resolved,
    spec: ObjectiveSpec,
    cfg: GaConfig,
    pairs: usize,
    model: &MlpModel,
    ranges: &GpRanges,
) -> Result<(), CliError> {
    // Both arms of pair i share seed base+i; their random individuals and
    // variation streams coincide, isolating the effect of the elites.
    let mut outcomes = Vec::with_capacity(pairs);
    for pair in 0..pairs {
        let mut pair_cfg = cfg;
        pair_cfg.seed = cfg.seed + pair as u64;
        let seeded = {
            let mut c = pair_cfg;
            c.elite_seed_count = cfg.elite_seed_count;
            run_ga(&c, &spec, ranges, &resolved.constants, Some(model))?
        };
        let unseeded = {
            let mut c = pair_cfg;
            c.elite_seed_count = 0;
            run_ga(&c, &spec, ranges, &resolved.constants, None)?
        };
        write_trace_csv(
            &resolved.out(&format!("trace_seeded_{pair}.csv")),
            &seeded.trace,
        )?;
        write_trace_csv(
            &resolved.out(&format!("trace_unseeded_{pair}.csv")),
            &unseeded.trace,
        )?;
        let dominates = seeded
            .trace
            .iter()
            .zip(&unseeded.trace)
            .all(|(s, u)| s.best_penalized <= u.best_penalized);
        outcomes.push((pair, pair_cfg.seed, seeded, unseeded, dominates));
    }

    let generations = cfg.generations + 1;
    let mut median_seeded = Vec::with_capacity(generations);
    let mut median_unseeded = Vec::with_capacity(generations);
    for g in 0..generations {
        let mut s: Vec<f64> = outcomes
            .iter()
            .map(|(_, _, run, _, _)| run.trace[g].best_penalized)
            .collect();
        let mut u: Vec<f64> = outcomes
            .iter()
            .map(|(_, _, _, run, _)| run.trace[g].best_penalized)
            .collect();
        median_seeded.push(median(&mut s));
        median_unseeded.push(median(&mut u));
    }
    let median_dominates = median_seeded
        .iter()
        .zip(&median_unseeded)
        .all(|(s, u)| s <= u);
    let better = outcomes
        .iter()
        .filter(|(_, _, s, u, _)| {
            s.best.mean_target_stl_db() > u.best.mean_target_stl_db()
        })
        .count();
    println!(
        "paired runs: median seeded trace dominates: {median_dominates}; seeded final better in {better}/{pairs}"
    );

    let pair_outcomes: Vec<PairOutcome> = outcomes
        .iter()
        .map(|(pair, seed, s, u, dom)| PairOutcome {
            pair: *pair,
            seed: *seed,
            seeded_best: BestSummary::new(&s.best),
            unseeded_best: BestSummary::new(&u.best),
            seeded_dominates: *dom,
        })
        .collect();
    let report = PairedReport {
        header: ReportHeader::new("optimize", resolved, cfg.seed),
        spec,
        config: cfg,
        pairs: pair_outcomes,
        median_seeded_dominates: median_dominates,
        seeded_final_better_count: better,
        median_seeded_trace: median_seeded,
        median_unseeded_trace: median_unseeded,
    };
    write_json(&resolved.out("paired_summary.json"), &report)
}

/// Exposed for the acceptance suite: a single GA run result.
pub fn single_run(
    resolved: &Resolved,
    spec: ObjectiveSpec,
    cfg: GaConfig,
    model: Option<&MlpModel>,
) -> Result<GaRun, CliError> {
    let predictor = model.map(|m| m as &dyn EepPredictor);
    Ok(run_ga(
        &cfg,
        &spec,
        &GpRanges::default(),
        &resolved.constants,
        predictor,
    )?)
}
