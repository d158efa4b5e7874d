//! The dataset file: one CSV row per sample.
//!
//! Layout (516 columns at the default 500-point grid):
//!
//! ```text
//! # thr-dataset v1
//! a1_cm,l1_cm,h1_cm,a2_cm,l2_cm,h2_cm,r1,m1,c1,r2,m2,c2,
//! f1_hz,f2_hz,stl_f1_db,stl_f2_db,s101,s102,…,s600
//! ```
//!
//! Geometry columns are centimeters (the presentation unit); electrical
//! parameters are SI; `s<f>` columns are the transmission loss in dB at
//! `<f>` Hz, from which the reader reconstructs the grid. Floats are
//! written shortest-round-trip, so read → write is byte-stable.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use thr_core::branch::{FrequencyGrid, StlSpectrum};
use thr_core::dataset::Sample;
use thr_core::geometry::{EquivalentElectricalParams, GeometricParams};
use thr_core::resonance::ResonanceReport;

use crate::error::CliError;

const FORMAT_LINE: &str = "# thr-dataset v1";
const FIXED_COLUMNS: usize = 16;
const M_PER_CM: f64 = 0.01;

pub fn write_dataset(path: &Path, samples: &[Sample]) -> Result<(), CliError> {
    let grid = samples
        .first()
        .map(|s| s.spectrum.grid)
        .unwrap_or_default();
    let mut out = Vec::new();
    writeln!(out, "{FORMAT_LINE}").expect("vec write");

    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "a1_cm", "l1_cm", "h1_cm", "a2_cm", "l2_cm", "h2_cm", "r1", "m1", "c1", "r2", "m2",
        "c2", "f1_hz", "f2_hz", "stl_f1_db", "stl_f2_db",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(grid.frequencies().map(|f| format!("s{f}")));
    writer
        .write_record(&header)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    for s in samples {
        let mut record: Vec<String> = Vec::with_capacity(FIXED_COLUMNS + grid.count);
        for v in s.gp.free_dimensions() {
            record.push(format!("{}", v / M_PER_CM));
        }
        for v in s.eep.to_array() {
            record.push(format!("{v}"));
        }
        for v in s.resonances.frequencies {
            record.push(format!("{v}"));
        }
        for v in s.resonances.stl_db {
            record.push(format!("{v}"));
        }
        for v in &s.spectrum.values {
            record.push(format!("{v}"));
        }
        writer
            .write_record(&record)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    crate::error::write_file(&path.to_path_buf(), &bytes)
}

pub fn read_dataset(path: &Path, cavity_radius: f64) -> Result<Vec<Sample>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_dataset_from(BufReader::new(file), path, cavity_radius)
}

fn read_dataset_from<R: Read>(
    mut reader: BufReader<R>,
    path: &Path,
    cavity_radius: f64,
) -> Result<Vec<Sample>, CliError> {
    let mut format_line = String::new();
    reader
        .read_line(&mut format_line)
        .map_err(|e| CliError::io(path, e))?;
    if format_line.trim_end() != FORMAT_LINE {
        return Err(CliError::malformed(
            path,
            format!(
                "line 1: expected format marker \"{FORMAT_LINE}\", found \"{}\"",
                format_line.trim_end()
            ),
        ));
    }

    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| CliError::malformed(path, format!("line 2: {e}")))?
        .clone();
    if headers.len() < FIXED_COLUMNS + 2 {
        return Err(CliError::malformed(
            path,
            format!("line 2: expected at least {} columns", FIXED_COLUMNS + 2),
        ));
    }
    let mut grid_freqs: Vec<f64> = Vec::new();
    for (i, name) in headers.iter().enumerate().skip(FIXED_COLUMNS) {
        let freq = name.strip_prefix('s').and_then(|f| f.parse::<f64>().ok());
        match freq {
            Some(f) => grid_freqs.push(f),
            None => {
                return Err(CliError::malformed(
                    path,
                    format!("line 2: column {} (\"{name}\") is not a spectrum column", i + 1),
                ))
            }
        }
    }
    let step = if grid_freqs.len() > 1 {
        grid_freqs[1] - grid_freqs[0]
    } else {
        1.0
    };
    let grid = FrequencyGrid {
        start_hz: grid_freqs[0],
        step_hz: step,
        count: grid_freqs.len(),
    };

    let mut samples = Vec::new();
    for (i, record) in csv_reader.records().enumerate() {
        let line = i + 3; // format marker + header
        let record = record.map_err(|e| CliError::malformed(path, format!("line {line}: {e}")))?;
        if record.len() != headers.len() {
            return Err(CliError::malformed(
                path,
                format!(
                    "line {line}: expected {} fields, found {}",
                    headers.len(),
                    record.len()
                ),
            ));
        }
        let field = |idx: usize| -> Result<f64, CliError> {
            record[idx].parse::<f64>().map_err(|e| {
                CliError::malformed(
                    path,
                    format!("line {line}, column {} (\"{}\"): {e}", idx + 1, &record[idx]),
                )
            })
        };
        let mut free = [0.0; 6];
        for (k, v) in free.iter_mut().enumerate() {
            *v = field(k)? * M_PER_CM;
        }
        let mut eep = [0.0; 6];
        for (k, v) in eep.iter_mut().enumerate() {
            *v = field(6 + k)?;
        }
        let resonances = ResonanceReport {
            frequencies: [field(12)?, field(13)?],
            stl_db: [field(14)?, field(15)?],
        };
        let mut values = Vec::with_capacity(grid.count);
        for k in 0..grid.count {
            values.push(field(FIXED_COLUMNS + k)?);
        }
        samples.push(Sample {
            gp: GeometricParams::from_free_dimensions(free, [cavity_radius; 2]),
            eep: EquivalentElectricalParams::from_array(eep),
            resonances,
            spectrum: StlSpectrum { grid, values },
        });
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use thr_core::constants::PhysicalConstants;
    use thr_core::dataset::{generate_dataset, GenerationConfig};

    fn tiny_samples() -> Vec<Sample> {
        let mut cfg = GenerationConfig::new(17);
        cfg.bins.samples_per_group = 2;
        cfg.bins.max_attempts_per_group = 20;
        cfg.target_total = Some(12);
        let (samples, _) = generate_dataset(&cfg, &PhysicalConstants::default()).unwrap();
        assert!(!samples.is_empty());
        samples
    }

    #[test]
    fn round_trips_samples_exactly() {
        let samples = tiny_samples();
        let dir = std::env::temp_dir().join("thr-dataset-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("dataset.csv");
        write_dataset(&path, &samples).unwrap();
        let back = read_dataset(&path, 0.05).unwrap();
        assert_eq!(samples.len(), back.len());
        for (a, b) in samples.iter().zip(&back) {
            assert_eq!(a.eep, b.eep);
            assert_eq!(a.resonances, b.resonances);
            assert_eq!(a.spectrum, b.spectrum);
            for (x, y) in a.gp.free_dimensions().iter().zip(b.gp.free_dimensions()) {
                // One cm↔m conversion each way.
                assert!(thr_core::geometry::relative_error(*x, y) < 1e-15);
            }
        }
        // Write → read → write is byte-stable.
        let path2 = dir.join("dataset2.csv");
        write_dataset(&path2, &back).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn reports_line_numbers_for_malformed_input() {
        let dir = std::env::temp_dir().join("thr-dataset-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("broken.csv");
        std::fs::write(&path, "# thr-dataset v1\na1_cm,b\n1.0,oops\n").unwrap();
        let err = read_dataset(&path, 0.05).unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
        assert!(err.to_string().contains("line 2"), "{err}");

        std::fs::write(&path, "not a dataset\n").unwrap();
        let err = read_dataset(&path, 0.05).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }
}
