//! `thr train` — surrogate training from a dataset file.
//!
//! There is no checkpoint/resume support: training is deterministic and
//! cheap enough to re-run from scratch, and a fresh run is the only way to
//! guarantee the reproducibility contract.

use std::path::PathBuf;

use serde::Serialize;
use thr_core::dataset::{split_dataset, DatasetSplit};
use thr_core::geometry::EepRanges;
use thr_core::nn::{train_surrogate, TrainConfig};

use crate::config::{parse_float_list, Resolved};
use crate::error::CliError;
use crate::formats::{dataset_csv, model_file, write_curve_csv, write_json};
use crate::ReportHeader;

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    /// Dataset CSV produced by gen-data.
    #[arg(long)]
    pub data: PathBuf,

    /// Output model file.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Learning-curve CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,

    /// Train/validation/test fractions.
    #[arg(long, default_value = "0.8,0.1,0.1")]
    pub split: String,

    /// Shuffle seed of the split (kept separate from the training seed so
    /// evaluations can reconstruct the exact partitions).
    #[arg(long, default_value_t = 42)]
    pub split_seed: u64,

    /// Hidden layer widths.
    #[arg(long, default_value = "450,250,220", value_delimiter = ',')]
    pub hidden: Vec<usize>,

    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,

    #[arg(long, default_value_t = 500)]
    pub max_epochs: usize,

    #[arg(long, default_value_t = 20)]
    pub patience: usize,

    #[arg(long, default_value_t = 0.001)]
    pub learning_rate: f64,

    #[arg(long, default_value_t = 0.1)]
    pub dropout: f64,
}

#[derive(Debug, Serialize)]
struct TrainReport {
    #[serde(flatten)]
    header: ReportHeader,
    data: PathBuf,
    split: DatasetSplit,
    train_config: TrainConfig,
    samples: (usize, usize, usize),
    epochs_run: usize,
    best_val_mse: f64,
    parameter_count: usize,
    model_file: PathBuf,
}

pub fn run(resolved: &Resolved, args: TrainArgs) -> Result<(), CliError> {
    let fractions = parse_float_list::<3>(&args.split, "--split")?;
    let split = DatasetSplit {
        train_fraction: fractions[0],
        val_fraction: fractions[1],
        test_fraction: fractions[2],
        seed: args.split_seed,
    };
    let ranges = EepRanges::default();
    let samples = dataset_csv::read_dataset(&args.data, 0.05)?;
    let total = samples.len();
    let (train, val, _test) = split_dataset(samples, &split)?;
    println!(
        "training on {} samples, validating on {} (of {total})",
        train.len(),
        val.len()
    );

    let cfg = TrainConfig {
        hidden: args.hidden.clone(),
        batch_size: args.batch_size,
        max_epochs: args.max_epochs,
        patience: args.patience,
        learning_rate: args.learning_rate,
        dropout_rate: args.dropout,
        seed: resolved.seed,
        ..TrainConfig::default()
    };
    let (model, curve) = train_surrogate(&train, &val, ranges, &cfg)?;
    let best_val = curve.iter().map(|e| e.val_mse).fold(f64::INFINITY, f64::min);
    println!(
        "trained {} epochs, best validation MSE {best_val:.3e}",
        curve.len()
    );

    let model_path = args.out.unwrap_or_else(|| resolved.out("model.json"));
    model_file::save_model(&model_path, &model, &cfg)?;
    let curve_path = args.curve.unwrap_or_else(|| resolved.out("curve.csv"));
    write_curve_csv(&curve_path, &curve)?;
    let report = TrainReport {
        header: ReportHeader::new("train", resolved, cfg.seed),
        data: args.data,
        split,
        samples: (train.len(), val.len(), total - train.len() - val.len()),
        epochs_run: curve.len(),
        best_val_mse: best_val,
        parameter_count: model.network.parameter_count(),
        model_file: model_path,
        train_config: cfg,
    };
    write_json(&resolved.out("train_report.json"), &report)
}
