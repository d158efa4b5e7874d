//! `thr gen-data` — corpus generation with per-group quotas.

use serde::Serialize;
use thr_core::dataset::{generate_dataset, GenerationConfig, GenerationReport};

use crate::config::Resolved;
use crate::error::CliError;
use crate::formats::{dataset_csv, write_json};
use crate::ReportHeader;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenPreset {
    /// 1000 samples per group, ~990k attempt budget: ≥ 20k samples in
    /// minutes on one core.
    Desk,
    /// 5000 samples per group: hours of compute, full-scale corpus.
    Paper,
}

#[derive(Debug, clap::Args)]
pub struct GenDataArgs {
    #[arg(long, value_enum, default_value_t = GenPreset::Desk)]
    pub preset: GenPreset,

    /// Override the per-group quota.
    #[arg(long)]
    pub samples_per_group: Option<usize>,

    /// Override the attempt budget per group.
    #[arg(long)]
    pub max_attempts_per_group: Option<u64>,

    /// Stop once this many samples were accepted.
    #[arg(long)]
    pub target_total: Option<usize>,

    /// Resonance band width used for grouping (Hz).
    #[arg(long)]
    pub band_width: Option<f64>,

    /// Minimum transmission loss at both resonances (dB).
    #[arg(long, default_value_t = 10.0)]
    pub stl_threshold: f64,
}

#[derive(Debug, Serialize)]
struct GenReport {
    #[serde(flatten)]
    header: ReportHeader,
    config: GenerationConfig,
    outcome: GenerationReport,
}

pub fn run(resolved: &Resolved, args: GenDataArgs) -> Result<(), CliError> {
    let mut cfg = match args.preset {
        GenPreset::Desk => GenerationConfig::desk(resolved.seed),
        GenPreset::Paper => GenerationConfig::new(resolved.seed),
    };
    cfg.threads = resolved.threads;
    cfg.stl_threshold_db = args.stl_threshold;
    if let Some(v) = args.samples_per_group {
        cfg.bins.samples_per_group = v;
    }
    if let Some(v) = args.max_attempts_per_group {
        cfg.bins.max_attempts_per_group = v;
    }
    if let Some(v) = args.target_total {
        cfg.target_total = Some(v);
    }
    if let Some(v) = args.band_width {
        cfg.bins.band_width_hz = v;
    }

    let (samples, outcome) = generate_dataset(&cfg, &resolved.constants)?;
    if samples.is_empty() {
        return Err(CliError::Validation(
            "no feasible samples under this configuration".into(),
        ));
    }
    dataset_csv::write_dataset(&resolved.out("dataset.csv"), &samples)?;
    let filled = outcome.groups.iter().filter(|g| g.filled).count();
    println!(
        "accepted {} samples over {} attempts ({} of {} groups filled, {} empty)",
        outcome.accepted,
        outcome.attempts,
        filled,
        outcome.groups.len(),
        outcome.empty_groups
    );
    let report = GenReport {
        header: ReportHeader::new("gen-data", resolved, resolved.seed),
        config: cfg,
        outcome,
    };
    write_json(&resolved.out("gen_report.json"), &report)
}
