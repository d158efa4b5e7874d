//! The duct-network description file (TOML).
//!
//! ```toml
//! cross_section_m2 = 0.01
//!
//! [[element]]
//! kind = "segment"
//! length_m = 0.1
//!
//! [[element]]
//! kind = "branch"
//! eep = [42.1, 137.5, 3.31e-9, 42.1, 135.6, 3.31e-9]   # R1 M1 C1 R2 M2 C2
//!
//! [[element]]
//! kind = "branch"
//! gp_cm = [1.0, 2.0, 6.0, 1.0, 2.0, 6.0]               # a1 l1 h1 a2 l2 h2
//! cavity_radius_cm = 5.0                                # optional, default 5
//! ```
//!
//! A branch takes either electrical parameters directly (`eep`) or a
//! geometry in centimeters (`gp_cm`), which is converted through the
//! forward model. Elements apply in file order, source side first.

use std::path::Path;

use serde::Deserialize;
use thr_core::constants::PhysicalConstants;
use thr_core::geometry::{gp_to_eep, EquivalentElectricalParams, GeometricParams};
use thr_core::tmm::{DuctElement, DuctNetwork};

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    cross_section_m2: f64,
    #[serde(default)]
    element: Vec<ElementSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementSpec {
    kind: String,
    length_m: Option<f64>,
    eep: Option<Vec<f64>>,
    gp_cm: Option<Vec<f64>>,
    cavity_radius_cm: Option<f64>,
}

pub fn read_network(path: &Path, pc: &PhysicalConstants) -> Result<DuctNetwork, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: NetworkFile = toml::from_str(&text).map_err(|e| CliError::malformed(path, e))?;
    if file.element.is_empty() {
        return Err(CliError::malformed(
            path,
            "network needs at least one [[element]]",
        ));
    }
    let mut elements = Vec::with_capacity(file.element.len());
    for (i, el) in file.element.iter().enumerate() {
        let n = i + 1;
        let element = match el.kind.as_str() {
            "segment" => {
                let length = el.length_m.ok_or_else(|| {
                    CliError::malformed(path, format!("element {n}: segment needs length_m"))
                })?;
                DuctElement::StraightSegment { length }
            }
            "branch" => {
                let eep = branch_parameters(el, pc)
                    .map_err(|detail| CliError::malformed(path, format!("element {n}: {detail}")))?;
                DuctElement::SideBranch { eep }
            }
            other => {
                return Err(CliError::malformed(
                    path,
                    format!("element {n}: unknown kind \"{other}\" (segment | branch)"),
                ))
            }
        };
        elements.push(element);
    }
    let network = DuctNetwork {
        cross_section: file.cross_section_m2,
        elements,
    };
    network
        .validate()
        .map_err(|e| CliError::malformed(path, e))?;
    Ok(network)
}

fn branch_parameters(
    el: &ElementSpec,
    pc: &PhysicalConstants,
) -> Result<EquivalentElectricalParams, String> {
    match (&el.eep, &el.gp_cm) {
        (Some(_), Some(_)) => Err("give either eep or gp_cm, not both".into()),
        (Some(values), None) => {
            let arr: [f64; 6] = values
                .as_slice()
                .try_into()
                .map_err(|_| format!("eep needs 6 values, got {}", values.len()))?;
            let eep = EquivalentElectricalParams::from_array(arr);
            eep.validate().map_err(|e| e.to_string())?;
            Ok(eep)
        }
        (None, Some(values)) => {
            let arr: [f64; 6] = values
                .as_slice()
                .try_into()
                .map_err(|_| format!("gp_cm needs 6 values, got {}", values.len()))?;
            let r = el.cavity_radius_cm.unwrap_or(5.0) * 0.01;
            let free = arr.map(|v| v * 0.01);
            let gp = GeometricParams::from_free_dimensions(free, [r; 2]);
            gp_to_eep(&gp, pc).map_err(|e| e.to_string())
        }
        (None, None) => Err("branch needs eep or gp_cm".into()),
    }
}
