//! File formats: the dataset CSV, the model checkpoint, the duct-network
//! description, and small CSV/JSON writers shared by the commands.

pub mod dataset_csv;
pub mod model_file;
pub mod network_file;

use std::path::Path;

use serde::Serialize;
use thr_core::branch::StlSpectrum;

use crate::error::{write_file, CliError};

/// Writes a spectrum as `frequency_hz,stl_db` rows.
pub fn write_spectrum_csv(path: &Path, spectrum: &StlSpectrum) -> Result<(), CliError> {
    let mut out = String::from("frequency_hz,stl_db\n");
    for (f, v) in spectrum.grid.frequencies().zip(&spectrum.values) {
        out.push_str(&format!("{f},{v}\n"));
    }
    write_file(&path.to_path_buf(), out.as_bytes())
}

/// Compact JSON writer for reports; field order is struct order, so output
/// is byte-stable run to run.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let bytes = serde_json::to_vec(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(&path.to_path_buf(), &bytes)
}

/// Writes the learning curve as `epoch,train_mse,val_mse` rows.
pub fn write_curve_csv(
    path: &Path,
    curve: &[thr_core::nn::EpochStats],
) -> Result<(), CliError> {
    let mut out = String::from("epoch,train_mse,val_mse\n");
    for e in curve {
        out.push_str(&format!("{},{},{}\n", e.epoch, e.train_mse, e.val_mse));
    }
    write_file(&path.to_path_buf(), out.as_bytes())
}
