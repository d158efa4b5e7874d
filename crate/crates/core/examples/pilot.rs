// Desk-scale pilot: generation rates, training speed, surrogate quality.
use std::time::Instant;
use thr_core::constants::{PhysicalConstants, DEFAULT_CROSS_SECTION_M2};
use thr_core::dataset::{generate_dataset, split_dataset, DatasetSplit, GenerationConfig};
use thr_core::design::{design, DesignConfig, DesignTarget};
use thr_core::geometry::{eep_to_gp, EepRanges, GpRanges};
use thr_core::nn::{train_surrogate, TrainConfig};
use thr_core::resonance::{resonant_frequencies, Band};

fn main() {
    let pc = PhysicalConstants::default();
    let t0 = Instant::now();
    let mut gen_cfg = GenerationConfig::new(11);
    gen_cfg.bins.samples_per_group = 1000;
    gen_cfg.bins.max_attempts_per_group = 88_000;
    gen_cfg.target_total = None;
    let (samples, report) = generate_dataset(&gen_cfg, &pc).unwrap();
    println!(
        "generation: {} samples in {:.1}s, {} attempts, {} empty groups",
        samples.len(),
        t0.elapsed().as_secs_f64(),
        report.attempts,
        report.empty_groups
    );
    for (i, g) in report.groups.iter().enumerate() {
        if g.count > 0 {
            println!("  group {i}: [{:.0},{:.0})x[{:.0},{:.0}) -> {}", g.f1_band.0, g.f1_band.1, g.f2_band.0, g.f2_band.1, g.count);
        }
    }

    let (train, val, test) = split_dataset(samples, &DatasetSplit::default()).unwrap();
    println!("split: {}/{}/{}", train.len(), val.len(), test.len());

    let cfg = TrainConfig {
        max_epochs: 150,
        patience: 20,
        seed: 7,
        ..TrainConfig::default()
    };
    let t1 = Instant::now();
    let (model, curve) = train_surrogate(&train, &val, EepRanges::default(), &cfg).unwrap();
    let dt = t1.elapsed().as_secs_f64();
    println!("training: {} epochs in {:.1}s ({:.2}s/epoch)", curve.len(), dt, dt / curve.len() as f64);
    for e in &curve {
        if e.epoch % 5 == 0 || e.epoch + 1 == curve.len() {
            println!("  epoch {}: train {:.3e} val {:.3e}", e.epoch, e.train_mse, e.val_mse);
        }
    }

    // Criterion-5 style evaluation on 500 held-out samples.
    let ranges = GpRanges::default();
    let mut aerfs: Vec<f64> = Vec::new();
    let mut realized = 0usize;
    let n_eval = 500.min(test.len());
    for s in test.iter().take(n_eval) {
        let Ok(pred) = model.predict(&s.spectrum) else { continue };
        let Ok(gp) = eep_to_gp(&pred, [0.05; 2], &pc, &ranges, true) else { continue };
        let eep2 = thr_core::geometry::gp_to_eep(&gp, &pc).unwrap();
        let Ok(rep) = resonant_frequencies(&eep2, DEFAULT_CROSS_SECTION_M2, &pc, Band::default()) else { continue };
        realized += 1;
        let aerf = ((rep.frequencies[0] - s.resonances.frequencies[0]).abs()
            + (rep.frequencies[1] - s.resonances.frequencies[1]).abs()) / 2.0;
        aerfs.push(aerf);
    }
    aerfs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "surrogate eval: {}/{} realized ({:.1}%), median AERF {:.2} Hz, p90 {:.2} Hz",
        realized, n_eval, 100.0 * realized as f64 / n_eval as f64,
        aerfs.get(aerfs.len() / 2).copied().unwrap_or(f64::NAN),
        aerfs.get(aerfs.len() * 9 / 10).copied().unwrap_or(f64::NAN),
    );

    // Criterion-6/8 style design checks.
    for (t, k) in [((150.0, 250.0), 100), ((150.0, 250.0), 400), ((200.0, 300.0), 400)] {
        let target = DesignTarget::new(t.0, t.1);
        let mut dcfg = DesignConfig::new(3);
        dcfg.candidate_count = k;
        match design(&target, &model, &dcfg, &pc) {
            Ok(results) => {
                let top = &results[0];
                let n_realized = results.iter().filter(|r| r.realized.is_some()).count();
                println!(
                    "design {t:?} K={k}: top aerf {:?} stl {:?} feasible {} in_range {} ({}/{} realized)",
                    top.realized.map(|m| m.aerf_hz),
                    top.realized.map(|m| m.stl_at_targets_db),
                    top.feasible,
                    top.gp_in_range,
                    n_realized,
                    k
                );
                for r in results.iter().take(8) {
                    println!(
                        "    cand {} A=[{:.1},{:.1}] w=[{:.1},{:.1}] -> aerf {:?} f {:?}",
                        r.candidate_index,
                        r.peak_heights_db[0], r.peak_heights_db[1],
                        r.half_widths_hz[0], r.half_widths_hz[1],
                        r.realized.map(|m| (m.aerf_hz * 100.0).round() / 100.0),
                        r.realized.map(|m| [(m.frequencies[0]*10.0).round()/10.0, (m.frequencies[1]*10.0).round()/10.0]),
                    );
                }
            }
            Err(e) => println!("design {t:?} K={k}: ERROR {e}"),
        }
    }
}
