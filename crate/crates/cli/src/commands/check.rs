//! `thr check` — on-demand verification suites: gradient correctness,
//! inversion exactness, and resonance classification.
//!
//! `--expect-fail` injects a deliberate fault into each selected suite and
//! succeeds only if the suite catches it, demonstrating that the checks
//! can actually fail.

use thr_core::branch::{impedance, stl_side_branch, FrequencyGrid, StlSpectrum};
use thr_core::constants::DEFAULT_CROSS_SECTION_M2;
use thr_core::dataset::{evaluate_candidate, sample_gp, GenerationConfig};
use thr_core::geometry::{
    eep_to_gp, gp_to_eep, neck_quadratic, neck_quadratic_residual, relative_error, GpRanges,
};
use thr_core::nn::random_tiny_network_check;

use crate::config::Resolved;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CheckSuite {
    Gradients,
    Roundtrip,
    Resonance,
    All,
}

#[derive(Debug, clap::Args)]
pub struct CheckArgs {
    #[arg(value_enum, default_value_t = CheckSuite::All)]
    pub suite: CheckSuite,

    /// Inject a fault and succeed only if the suite detects it.
    #[arg(long)]
    pub expect_fail: bool,
}

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

pub fn run(resolved: &Resolved, args: CheckArgs) -> Result<(), CliError> {
    let fault = args.expect_fail;
    let mut outcomes = Vec::new();
    let wants = |s: CheckSuite| args.suite == CheckSuite::All || args.suite == s;
    if wants(CheckSuite::Gradients) {
        outcomes.push(check_gradients(resolved.seed, fault)?);
    }
    if wants(CheckSuite::Roundtrip) {
        outcomes.push(check_roundtrip(resolved, fault));
    }
    if wants(CheckSuite::Resonance) {
        outcomes.push(check_resonance(resolved, fault));
    }

    let mut failed = 0;
    for o in &outcomes {
        let verdict = if o.passed { "pass" } else { "FAIL" };
        println!("{verdict}  {}: {}", o.name, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    if fault {
        // Detection means every suite flagged its injected fault.
        if failed == outcomes.len() {
            println!("fault injection detected by all {} suites", outcomes.len());
            Ok(())
        } else {
            Err(CliError::CheckFailed {
                failed: outcomes.len() - failed,
                total: outcomes.len(),
            })
        }
    } else if failed > 0 {
        Err(CliError::CheckFailed {
            failed,
            total: outcomes.len(),
        })
    } else {
        Ok(())
    }
}

fn check_gradients(seed: u64, fault: bool) -> Result<Outcome, CliError> {
    let configurations = 100;
    let report = if fault {
        // One network with a corrupted analytic gradient component.
        use thr_core::nn::{finite_difference_check, Network, Tensor};
        let network = Network::mlp(4, &[3], 2, &thr_core::nn::MlpOptions::default(), seed);
        let x = Tensor::from_fn(3, 4, |r, c| ((r + c) as f64).sin());
        let y = Tensor::zeros(3, 2);
        finite_difference_check(&network, &x, &y, seed, 1e-5, 1e-4, true)?
    } else {
        random_tiny_network_check(seed, configurations, 1e-5, 1e-4)?
    };
    Ok(Outcome {
        name: "gradients",
        passed: report.passed(),
        detail: format!(
            "{} parameters checked, {} failures, max relative error {:.2e}",
            report.checked, report.failures, report.max_rel_err
        ),
    })
}

fn check_roundtrip(resolved: &Resolved, fault: bool) -> Outcome {
    let ranges = GpRanges::default();
    let pc = &resolved.constants;
    let n = 2000;
    let mut failures = 0;
    let mut max_err: f64 = 0.0;
    for k in 0..n {
        let gp = sample_gp(resolved.seed, k, &ranges);
        let eep = gp_to_eep(&gp, pc).expect("sampled geometry is valid");
        let Ok(mut recovered) = eep_to_gp(&eep, [ranges.cavity_radius; 2], pc, &ranges, true)
        else {
            failures += 1;
            continue;
        };
        if fault && k % 7 == 0 {
            recovered.neck_radius[0] *= 1.0 + 1e-4;
        }
        let back = gp_to_eep(&recovered, pc).expect("recovered geometry is valid");
        for (x, y) in back.to_array().iter().zip(eep.to_array()) {
            max_err = max_err.max(relative_error(*x, y));
        }
        let electrically_exact = back
            .to_array()
            .iter()
            .zip(eep.to_array())
            .all(|(x, y)| relative_error(*x, y) < 1e-9);
        let quadratic_ok = (0..2).all(|i| {
            let a = recovered.neck_radius[i];
            let (qa, qb, qc) =
                neck_quadratic(eep.resistance[i], eep.inertance[i], ranges.cavity_radius, i, pc);
            let scale = (qa * a * a).abs().max((qb * a).abs()).max(qc.abs());
            neck_quadratic_residual(&eep, i, a, ranges.cavity_radius, pc).abs() < 1e-9 * scale
        });
        if !electrically_exact || !quadratic_ok {
            failures += 1;
        }
    }
    Outcome {
        name: "roundtrip",
        passed: failures == 0,
        detail: format!(
            "{n} inversions, {failures} failures, max parameter error {max_err:.2e}"
        ),
    }
}

fn check_resonance(resolved: &Resolved, fault: bool) -> Outcome {
    let cfg = GenerationConfig::new(resolved.seed);
    let pc = &resolved.constants;
    let z0 = pc.characteristic_impedance();
    let wanted = 50;
    let mut matched = 0;
    let mut total = 0;
    let mut k = 0u64;
    while total < wanted && k < 100_000 {
        let gp = sample_gp(cfg.seed, k, &cfg.gp_ranges);
        k += 1;
        let Ok(sample) = evaluate_candidate(gp, &cfg, pc) else {
            continue;
        };
        total += 1;
        let mut ok = true;
        for (f0, t) in sample
            .resonances
            .frequencies
            .iter()
            .zip(sample.resonances.stl_db)
        {
            let f0 = if fault { f0 + 0.5 } else { *f0 };
            let grid = FrequencyGrid {
                start_hz: (f0 - 2.0).max(cfg.band.lo_hz),
                step_hz: 0.01,
                count: 401,
            };
            let sweep = StlSpectrum::from_fn(grid, |f| {
                stl_side_branch(&sample.eep, f, DEFAULT_CROSS_SECTION_M2, pc)
            });
            let peak = grid.frequency(sweep.argmax());
            if (peak - f0).abs() > 0.1 {
                ok = false;
            }
            let rb = impedance(&sample.eep, f0).resistance;
            let specialized = 20.0 * (1.0 + z0 / (2.0 * DEFAULT_CROSS_SECTION_M2 * rb)).log10();
            if (t - specialized).abs() > 1e-6 {
                ok = false;
            }
        }
        if ok {
            matched += 1;
        }
    }
    Outcome {
        name: "resonance",
        passed: total == wanted && matched * 100 >= total * 99,
        detail: format!("{matched}/{total} samples matched the dense-sweep oracle"),
    }
}
