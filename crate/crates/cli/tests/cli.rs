//! End-to-end tests of the `thr` binary: argument validation, file
//! formats, determinism, and cross-command consistency on small workloads.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn thr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thr"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn thr");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_code(cmd: &mut Command, expected: i32) -> Output {
    let out = cmd.output().expect("spawn thr");
    assert_eq!(
        out.status.code(),
        Some(expected),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn stl_formats_carry_identical_numbers() {
    let dir = tmp_dir("stl-formats");
    run_ok(thr()
        .args(["stl", "--gp-cm", "1,2,6,1,2,6", "--format", "csv", "--output-dir"])
        .arg(&dir));
    run_ok(thr()
        .args(["stl", "--gp-cm", "1,2,6,1,2,6", "--format", "json", "--output-dir"])
        .arg(&dir));

    let csv_text = std::fs::read_to_string(dir.join("stl_spectrum.csv")).unwrap();
    let json = read_json(&dir.join("stl_spectrum.json"));
    let values = json["stl_db"].as_array().unwrap();
    let mut csv_lines = csv_text.lines();
    assert_eq!(csv_lines.next(), Some("frequency_hz,stl_db"));
    let mut count = 0;
    for (line, value) in csv_lines.zip(values) {
        let v = line.split(',').nth(1).unwrap();
        assert_eq!(v.parse::<f64>().unwrap(), value.as_f64().unwrap());
        count += 1;
    }
    assert_eq!(count, 500);

    // The report carries resonances and the resolved configuration.
    let report = read_json(&dir.join("stl_report.json"));
    assert_eq!(report["tool"], "thr");
    assert!(report["constants"]["air_density"].as_f64().unwrap() > 1.0);
    let f = report["resonances"]["frequencies"].as_array().unwrap();
    assert!(f[0].as_f64().unwrap() < f[1].as_f64().unwrap());
}

#[test]
fn stl_rejects_malformed_inputs_with_line_numbers() {
    let dir = tmp_dir("stl-malformed");
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "gp_cm = [1, 2\n").unwrap();
    let out = run_code(
        thr().args(["stl", "--input"]).arg(&bad).arg("--output-dir").arg(&dir),
        1,
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 1"), "stderr: {stderr}");

    run_code(thr().args(["stl", "--gp-cm", "1,2,3"]).arg("--output-dir").arg(&dir), 1);
    run_code(thr().args(["stl"]).arg("--output-dir").arg(&dir), 1);
}

#[test]
fn gen_data_is_deterministic_and_validates() {
    let dir_a = tmp_dir("gen-a");
    let dir_b = tmp_dir("gen-b");
    let args = [
        "gen-data",
        "--samples-per-group",
        "2",
        "--max-attempts-per-group",
        "40",
        "--target-total",
        "25",
        "--seed",
        "9",
    ];
    run_ok(thr().args(args).arg("--output-dir").arg(&dir_a));
    run_ok(thr().args(args).arg("--output-dir").arg(&dir_b));
    let a = std::fs::read(dir_a.join("dataset.csv")).unwrap();
    let b = std::fs::read(dir_b.join("dataset.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "same seed must give byte-identical datasets");
    assert_eq!(
        std::fs::read(dir_a.join("gen_report.json")).unwrap(),
        std::fs::read(dir_b.join("gen_report.json")).unwrap()
    );

    // Zero feasible groups: band too narrow to hold two distinct bands.
    run_code(
        thr()
            .args(["gen-data", "--band-width", "600", "--seed", "9"])
            .arg("--output-dir")
            .arg(&dir_a),
        1,
    );
}

/// One tiny dataset + model shared by the train/design/optimize tests.
fn trained_fixture() -> (PathBuf, PathBuf) {
    static FIXTURE: std::sync::OnceLock<(PathBuf, PathBuf)> = std::sync::OnceLock::new();
    FIXTURE
        .get_or_init(|| {
            let dir = tmp_dir("fixture");
            run_ok(thr()
                .args([
                    "gen-data",
                    "--samples-per-group",
                    "40",
                    "--max-attempts-per-group",
                    "1500",
                    "--seed",
                    "11",
                ])
                .arg("--output-dir")
                .arg(&dir));
            let data = dir.join("dataset.csv");
            run_ok(thr()
                .args([
                    "train",
                    "--hidden",
                    "24,16",
                    "--batch-size",
                    "64",
                    "--max-epochs",
                    "8",
                    "--patience",
                    "8",
                    "--seed",
                    "7",
                ])
                .arg("--data")
                .arg(&data)
                .arg("--output-dir")
                .arg(&dir));
            (dir.clone(), dir.join("model.json"))
        })
        .clone()
}

#[test]
fn train_is_reproducible_bit_for_bit() {
    let (dir, model_path) = trained_fixture();
    let rerun = tmp_dir("train-rerun");
    run_ok(thr()
        .args([
            "train", "--hidden", "24,16", "--batch-size", "64", "--max-epochs", "8",
            "--patience", "8", "--seed", "7",
        ])
        .arg("--data")
        .arg(dir.join("dataset.csv"))
        .arg("--output-dir")
        .arg(&rerun));
    assert_eq!(
        std::fs::read(&model_path).unwrap(),
        std::fs::read(rerun.join("model.json")).unwrap(),
        "deterministic training must reproduce the model file exactly"
    );
    assert_eq!(
        std::fs::read(dir.join("curve.csv")).unwrap(),
        std::fs::read(rerun.join("curve.csv")).unwrap()
    );
    // Learning curve is epoch,train,val with a header.
    let curve = std::fs::read_to_string(dir.join("curve.csv")).unwrap();
    assert!(curve.starts_with("epoch,train_mse,val_mse\n"));
    assert_eq!(curve.lines().count(), 9);
}

#[test]
fn design_validates_targets_and_reports_provenance() {
    let (_dir, model_path) = trained_fixture();
    let out_dir = tmp_dir("design-out");
    // Out-of-band target.
    run_code(
        thr()
            .args(["design", "--targets", "150,700"])
            .arg("--model")
            .arg(&model_path)
            .arg("--output-dir")
            .arg(&out_dir),
        1,
    );
    run_ok(thr()
        .args(["design", "--targets", "200,400", "--count", "12", "--seed", "3"])
        .arg("--model")
        .arg(&model_path)
        .arg("--output-dir")
        .arg(&out_dir));
    let report = read_json(&out_dir.join("design_report.json"));
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 12);
    for r in results {
        // Full provenance: candidate parameters and the prediction chain.
        assert!(r["candidate_index"].is_u64());
        assert!(r["peak_heights_db"].is_array());
        assert!(r["half_widths_hz"].is_array());
        assert!(r["predicted_eep"].is_object());
    }
    // Feasible results (if any) rank strictly above infeasible ones.
    let feasibles: Vec<bool> = results
        .iter()
        .map(|r| r["feasible"].as_bool().unwrap())
        .collect();
    let mut sorted = feasibles.clone();
    sorted.sort_by(|a, b| b.cmp(a));
    assert_eq!(feasibles, sorted);
}

#[test]
fn optimize_validates_flags_and_trace_is_monotone() {
    let out_dir = tmp_dir("optimize-out");
    // Elite seeding without a model is a configuration error.
    run_code(
        thr()
            .args(["optimize", "--targets", "150,250", "--elites", "5"])
            .arg("--output-dir")
            .arg(&out_dir),
        1,
    );
    run_ok(thr()
        .args([
            "optimize", "--targets", "150,250", "--pop", "16", "--generations", "10",
            "--seed", "5",
        ])
        .arg("--output-dir")
        .arg(&out_dir));
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next(),
        Some("generation,best_penalized_j,best_mean_target_stl_db,feasible_fraction")
    );
    let best: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(best.len(), 11);
    for pair in best.windows(2) {
        assert!(pair[1] <= pair[0], "best-J column must be non-increasing");
    }
    let report = read_json(&out_dir.join("ga_report.json"));
    assert!(report["best"]["penalized"].is_f64());
}

#[test]
fn tmm_single_branch_matches_stl_command() {
    let dir = tmp_dir("tmm-vs-stl");
    run_ok(thr()
        .args(["stl", "--gp-cm", "1,2,6,1,2,6"])
        .arg("--output-dir")
        .arg(&dir));
    let net = dir.join("net.toml");
    std::fs::write(
        &net,
        "cross_section_m2 = 0.01\n[[element]]\nkind = \"branch\"\ngp_cm = [1, 2, 6, 1, 2, 6]\n",
    )
    .unwrap();
    run_ok(thr().args(["tmm"]).arg("--network").arg(&net).arg("--output-dir").arg(&dir));
    let stl = std::fs::read_to_string(dir.join("stl_spectrum.csv")).unwrap();
    let tmm = std::fs::read_to_string(dir.join("tmm_spectrum.csv")).unwrap();
    for (a, b) in stl.lines().skip(1).zip(tmm.lines().skip(1)) {
        let (fa, va) = a.split_once(',').unwrap();
        let (fb, vb) = b.split_once(',').unwrap();
        assert_eq!(fa, fb);
        let (va, vb): (f64, f64) = (va.parse().unwrap(), vb.parse().unwrap());
        assert!((va - vb).abs() < 1e-9, "{va} vs {vb} at {fa} Hz");
    }

    // Empty network file: validation error.
    std::fs::write(&net, "cross_section_m2 = 0.01\n").unwrap();
    run_code(thr().args(["tmm"]).arg("--network").arg(&net).arg("--output-dir").arg(&dir), 1);
}

#[test]
fn config_file_keys_are_overridden_by_flags() {
    let dir = tmp_dir("config-file");
    let cfg = dir.join("thr.toml");
    std::fs::write(
        &cfg,
        format!(
            "[global]\nseed = 5\noutput_dir = \"{}\"\nformat = \"json\"\n",
            dir.display()
        ),
    )
    .unwrap();
    // format json comes from the file; spectrum lands in output_dir.
    run_ok(thr().args(["stl", "--gp-cm", "1,2,6,1,2,6", "--config"]).arg(&cfg));
    assert!(dir.join("stl_spectrum.json").exists());
    // The flag wins over the file.
    run_ok(thr()
        .args(["stl", "--gp-cm", "1,2,6,1,2,6", "--format", "csv", "--config"])
        .arg(&cfg));
    assert!(dir.join("stl_spectrum.csv").exists());
}

#[test]
fn check_command_passes_and_detects_injected_faults() {
    let dir = tmp_dir("check");
    let out = run_ok(thr().args(["check", "roundtrip", "--seed", "3"]).arg("--output-dir").arg(&dir));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("pass  roundtrip"), "{stdout}");

    // Injected faults must be detected (exit 0 under --expect-fail)…
    run_ok(thr()
        .args(["check", "roundtrip", "--expect-fail", "--seed", "3"])
        .arg("--output-dir")
        .arg(&dir));
    run_ok(thr()
        .args(["check", "gradients", "--expect-fail", "--seed", "3"])
        .arg("--output-dir")
        .arg(&dir));
    run_ok(thr()
        .args(["check", "resonance", "--expect-fail", "--seed", "3"])
        .arg("--output-dir")
        .arg(&dir));
}
