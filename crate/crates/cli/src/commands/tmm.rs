//! `thr tmm` — transmission loss of a duct network from its description
//! file.

use std::path::PathBuf;

use serde::Serialize;
use thr_core::branch::FrequencyGrid;
use thr_core::tmm::network_spectrum;

use crate::config::{parse_float_list, Resolved};
use crate::error::CliError;
use crate::formats::{network_file, write_json};
use crate::ReportHeader;

#[derive(Debug, clap::Args)]
pub struct TmmArgs {
    /// Network description (TOML).
    #[arg(long)]
    pub network: PathBuf,

    /// Sampling grid as start,step,count.
    #[arg(long, default_value = "101,1,500")]
    pub grid: String,

    /// Report local maxima above this floor (dB).
    #[arg(long, default_value_t = 3.0)]
    pub peak_floor: f64,
}

#[derive(Debug, Serialize)]
struct Peak {
    frequency_hz: f64,
    stl_db: f64,
}

#[derive(Debug, Serialize)]
struct TmmReport {
    #[serde(flatten)]
    header: ReportHeader,
    network_file: PathBuf,
    cross_section_m2: f64,
    elements: usize,
    grid: FrequencyGrid,
    peaks: Vec<Peak>,
}

pub fn run(resolved: &Resolved, args: TmmArgs) -> Result<(), CliError> {
    let network = network_file::read_network(&args.network, &resolved.constants)?;
    let grid_vals = parse_float_list::<3>(&args.grid, "--grid")?;
    let grid = FrequencyGrid {
        start_hz: grid_vals[0],
        step_hz: grid_vals[1],
        count: grid_vals[2] as usize,
    };
    let spectrum = network_spectrum(&network, grid, &resolved.constants)?;
    super::stl::write_spectrum(resolved, "tmm_spectrum", &spectrum)?;

    let mut peaks = Vec::new();
    for i in 1..spectrum.values.len().saturating_sub(1) {
        let v = spectrum.values[i];
        if v > args.peak_floor && v > spectrum.values[i - 1] && v > spectrum.values[i + 1] {
            peaks.push(Peak {
                frequency_hz: grid.frequency(i),
                stl_db: v,
            });
        }
    }
    print!("{} peaks:", peaks.len());
    for p in &peaks {
        print!(" {:.0} Hz ({:.1} dB)", p.frequency_hz, p.stl_db);
    }
    println!();

    let report = TmmReport {
        header: ReportHeader::new("tmm", resolved, resolved.seed),
        network_file: args.network,
        cross_section_m2: network.cross_section,
        elements: network.elements.len(),
        grid,
        peaks,
    };
    write_json(&resolved.out("tmm_report.json"), &report)
}
