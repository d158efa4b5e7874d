//! `thr design` — the surrogate inverse-design pipeline plus the
//! neck-radius sensitivity map of the winning structure.

use std::path::PathBuf;

use serde::Serialize;
use thr_core::branch::stl_spectrum;
use thr_core::design::{design, sensitivity_map, DesignConfig, DesignResult, DesignTarget};
use thr_core::geometry::gp_to_eep;

use crate::config::{parse_float_list, Resolved};
use crate::error::CliError;
use crate::formats::{model_file, write_json};
use crate::ReportHeader;

#[derive(Debug, clap::Args)]
pub struct DesignArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,

    /// Target resonances f1,f2 (Hz).
    #[arg(long)]
    pub targets: String,

    /// Number of synthesized candidate spectra.
    #[arg(long, default_value_t = 100)]
    pub count: usize,

    /// Minimum transmission loss at the targets (dB).
    #[arg(long, default_value_t = 10.0)]
    pub threshold: f64,

    /// Duct cross section in cm².
    #[arg(long, default_value_t = 100.0)]
    pub cross_section_cm2: f64,

    /// Grid size of the ±10% neck-radius sensitivity map (0 disables).
    #[arg(long, default_value_t = 21)]
    pub map_steps: usize,
}

#[derive(Debug, Serialize)]
struct DesignReport {
    #[serde(flatten)]
    header: ReportHeader,
    target: DesignTarget,
    config: DesignConfig,
    model_file: PathBuf,
    /// Ranked results with full provenance, best first.
    results: Vec<DesignResult>,
}

pub fn run(resolved: &Resolved, args: DesignArgs) -> Result<(), CliError> {
    let targets = parse_float_list::<2>(&args.targets, "--targets")?;
    let target = DesignTarget {
        f1_hz: targets[0],
        f2_hz: targets[1],
        min_stl_db: args.threshold,
    };
    let payload = model_file::load_model(&args.model)?;
    let model = payload.model;
    let mut cfg = DesignConfig::new(resolved.seed);
    cfg.candidate_count = args.count;
    cfg.cross_section = args.cross_section_cm2 * 1e-4;
    cfg.grid = model.norm.grid;

    let results = design(&target, &model, &cfg, &resolved.constants)?;
    let top = &results[0];
    match &top.realized {
        Some(m) => println!(
            "top design: resonances {:.2}/{:.2} Hz, STL at targets {:.2}/{:.2} dB, error {:.2} Hz{}",
            m.frequencies[0],
            m.frequencies[1],
            m.stl_at_targets_db[0],
            m.stl_at_targets_db[1],
            m.aerf_hz,
            if top.feasible { "" } else { " (infeasible)" }
        ),
        None => println!("top candidate could not be realized"),
    }

    // The winner's realized spectrum, from independent forward evaluation.
    if let Some(gp) = &top.gp {
        let eep = gp_to_eep(gp, &resolved.constants)?;
        let spectrum = stl_spectrum(&eep, cfg.cross_section, &resolved.constants, cfg.grid)?;
        super::stl::write_spectrum(resolved, "design_spectrum", &spectrum)?;
        if args.map_steps >= 2 {
            let map = sensitivity_map(
                gp,
                &target,
                args.map_steps,
                0.10,
                cfg.cross_section,
                &resolved.constants,
                cfg.band,
            )?;
            let mut csv = String::from("a1_scale,a2_scale,aerf_hz\n");
            for (i, s1) in map.scales.iter().enumerate() {
                for (j, s2) in map.scales.iter().enumerate() {
                    match map.at(i, j) {
                        Some(v) => csv.push_str(&format!("{s1},{s2},{v}\n")),
                        None => csv.push_str(&format!("{s1},{s2},\n")),
                    }
                }
            }
            crate::error::write_file(&resolved.out("design_sensitivity.csv"), csv.as_bytes())?;
        }
    }

    let report = DesignReport {
        header: ReportHeader::new("design", resolved, cfg.seed),
        target,
        config: cfg,
        model_file: args.model,
        results,
    };
    write_json(&resolved.out("design_report.json"), &report)
}
