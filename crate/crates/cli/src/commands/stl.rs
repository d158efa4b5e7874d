//! `thr stl` — forward spectrum and resonances of one resonator.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thr_core::branch::{stl_spectrum, FrequencyGrid, StlSpectrum};
use thr_core::geometry::{gp_to_eep, EquivalentElectricalParams, GeometricParams};
use thr_core::resonance::{resonant_frequencies, Band, ResonanceReport};

use crate::config::{parse_float_list, OutputFormat, Resolved};
use crate::error::CliError;
use crate::formats::{write_json, write_spectrum_csv};
use crate::ReportHeader;

#[derive(Debug, clap::Args)]
pub struct StlArgs {
    /// Geometry as a1,l1,h1,a2,l2,h2 in centimeters (cavity radius 5 cm).
    #[arg(long, conflicts_with_all = ["eep", "input"])]
    pub gp_cm: Option<String>,

    /// Electrical parameters as R1,M1,C1,R2,M2,C2 (SI).
    #[arg(long, conflicts_with = "input")]
    pub eep: Option<String>,

    /// TOML file with a `gp_cm = […]` or `eep = […]` entry.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Cavity radius in centimeters when giving geometry.
    #[arg(long, default_value_t = 5.0)]
    pub cavity_radius_cm: f64,

    /// Sampling grid as start,step,count (Hz, Hz, points).
    #[arg(long, default_value = "101,1,500")]
    pub grid: String,

    /// Duct cross section in cm².
    #[arg(long, default_value_t = 100.0)]
    pub cross_section_cm2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputFile {
    gp_cm: Option<Vec<f64>>,
    eep: Option<Vec<f64>>,
    cavity_radius_cm: Option<f64>,
}

#[derive(Debug, Serialize)]
struct StlReport {
    #[serde(flatten)]
    header: ReportHeader,
    cross_section_m2: f64,
    grid: FrequencyGrid,
    eep: EquivalentElectricalParams,
    gp: Option<GeometricParams>,
    resonances: Option<ResonanceReport>,
}

#[derive(Debug, Serialize)]
struct SpectrumJson<'a> {
    grid: FrequencyGrid,
    stl_db: &'a [f64],
}

/// Resolves the resonator parameters from whichever input form was given.
fn resolve_input(
    args: &StlArgs,
    resolved: &Resolved,
) -> Result<(EquivalentElectricalParams, Option<GeometricParams>), CliError> {
    let from_gp = |free_cm: [f64; 6], r_cm: f64| -> Result<_, CliError> {
        let gp = GeometricParams::from_free_dimensions(free_cm.map(|v| v * 0.01), [r_cm * 0.01; 2]);
        let eep = gp_to_eep(&gp, &resolved.constants)?;
        Ok((eep, Some(gp)))
    };
    if let Some(s) = &args.gp_cm {
        return from_gp(parse_float_list::<6>(s, "--gp-cm")?, args.cavity_radius_cm);
    }
    if let Some(s) = &args.eep {
        let eep = EquivalentElectricalParams::from_array(parse_float_list::<6>(s, "--eep")?);
        eep.validate()?;
        return Ok((eep, None));
    }
    if let Some(path) = &args.input {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let input: InputFile = toml::from_str(&text).map_err(|e| CliError::malformed(path, e))?;
        return match (input.gp_cm, input.eep) {
            (Some(gp), None) => {
                let arr: [f64; 6] = gp
                    .as_slice()
                    .try_into()
                    .map_err(|_| CliError::malformed(path, "gp_cm needs 6 values"))?;
                from_gp(arr, input.cavity_radius_cm.unwrap_or(args.cavity_radius_cm))
            }
            (None, Some(eep)) => {
                let arr: [f64; 6] = eep
                    .as_slice()
                    .try_into()
                    .map_err(|_| CliError::malformed(path, "eep needs 6 values"))?;
                let eep = EquivalentElectricalParams::from_array(arr);
                eep.validate()?;
                Ok((eep, None))
            }
            _ => Err(CliError::malformed(path, "give exactly one of gp_cm or eep")),
        };
    }
    Err(CliError::Validation(
        "give the resonator as --gp-cm, --eep or --input".into(),
    ))
}

pub fn run(resolved: &Resolved, args: StlArgs) -> Result<(), CliError> {
    let (eep, gp) = resolve_input(&args, resolved)?;
    let grid_vals = parse_float_list::<3>(&args.grid, "--grid")?;
    let grid = FrequencyGrid {
        start_hz: grid_vals[0],
        step_hz: grid_vals[1],
        count: grid_vals[2] as usize,
    };
    if args.cross_section_cm2 <= 0.0 {
        return Err(CliError::Validation(
            "--cross-section-cm2 must be positive".into(),
        ));
    }
    let cross_section = args.cross_section_cm2 * 1e-4;
    let spectrum = stl_spectrum(&eep, cross_section, &resolved.constants, grid)?;
    let band = Band {
        lo_hz: grid.start_hz,
        hi_hz: grid.end_hz(),
    };
    let resonances = resonant_frequencies(&eep, cross_section, &resolved.constants, band).ok();

    write_spectrum(resolved, "stl_spectrum", &spectrum)?;
    let report = StlReport {
        header: ReportHeader::new("stl", resolved, resolved.seed),
        cross_section_m2: cross_section,
        grid,
        eep,
        gp,
        resonances,
    };
    write_json(&resolved.out("stl_report.json"), &report)?;
    match &report.resonances {
        Some(r) => println!(
            "resonances: {:.2} Hz ({:.2} dB), {:.2} Hz ({:.2} dB)",
            r.frequencies[0], r.stl_db[0], r.frequencies[1], r.stl_db[1]
        ),
        None => println!("fewer than two resonances inside the sampled band"),
    }
    Ok(())
}

/// Writes a spectrum as CSV or JSON per the global format flag. Both carry
/// the same numbers.
pub fn write_spectrum(
    resolved: &Resolved,
    stem: &str,
    spectrum: &StlSpectrum,
) -> Result<(), CliError> {
    match resolved.format {
        OutputFormat::Csv => {
            write_spectrum_csv(&resolved.out(&format!("{stem}.csv")), spectrum)
        }
        OutputFormat::Json => write_json(
            &resolved.out(&format!("{stem}.json")),
            &SpectrumJson {
                grid: spectrum.grid,
                stl_db: &spectrum.values,
            },
        ),
    }
}
