//! Behavior of the training loop: convergence bookkeeping, early stopping,
//! determinism, and failure modes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thr_core::nn::{fit, MlpOptions, Network, Tensor, TrainConfig};

/// A small synthetic regression task: targets are a fixed linear map of the
/// inputs squashed through a soft nonlinearity.
fn synthetic_task(n: usize, seed: u64) -> (Tensor, Tensor) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..12 * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = Tensor::from_fn(n, 12, |_, _| rng.gen_range(-1.0..1.0));
    let y = Tensor::from_fn(n, 3, |r, c| {
        let dot: f64 = (0..12).map(|k| x.get(r, k) * weights[k * 3 + c]).sum();
        (dot * 0.7).tanh() * 0.5
    });
    (x, y)
}

fn small_config(max_epochs: usize, patience: usize) -> TrainConfig {
    TrainConfig {
        hidden: vec![16, 8],
        batch_size: 16,
        max_epochs,
        patience,
        learning_rate: 0.003,
        dropout_rate: 0.05,
        seed: 5,
        ..TrainConfig::default()
    }
}

fn build(cfg: &TrainConfig) -> Network {
    Network::mlp(
        12,
        &cfg.hidden,
        3,
        &MlpOptions {
            dropout_rate: cfg.dropout_rate,
            bn_epsilon: cfg.bn_epsilon,
            bn_momentum: cfg.bn_momentum,
        },
        cfg.seed,
    )
}

#[test]
fn validation_loss_improves_over_the_initial_epoch() {
    let (x, y) = synthetic_task(256, 1);
    let (xv, yv) = synthetic_task(64, 2);
    let cfg = small_config(60, 60);
    let (best, curve) = fit(build(&cfg), &x, &y, &xv, &yv, &cfg).unwrap();
    let best_val = curve.iter().map(|e| e.val_mse).fold(f64::INFINITY, f64::min);
    assert!(best_val < curve[0].val_mse, "no improvement: {curve:?}");
    // The returned network reproduces the best validation loss.
    let pred = best.forward_infer(&xv).unwrap();
    let (val, _) = thr_core::nn::mse_loss(&pred, &yv).unwrap();
    assert!((val - best_val).abs() < 1e-12);
}

#[test]
fn early_stopping_respects_patience() {
    let (x, y) = synthetic_task(128, 3);
    let (xv, yv) = synthetic_task(32, 4);
    let cfg = small_config(400, 5);
    let (_, curve) = fit(build(&cfg), &x, &y, &xv, &yv, &cfg).unwrap();
    assert!(
        curve.len() < 400,
        "training should stop early, ran {} epochs",
        curve.len()
    );
    // The tail of the curve contains exactly `patience` non-improving epochs.
    let best_epoch = curve
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.val_mse.partial_cmp(&b.1.val_mse).unwrap())
        .unwrap()
        .0;
    assert_eq!(curve.len() - 1 - best_epoch, cfg.patience);
}

#[test]
fn training_is_deterministic_end_to_end() {
    let (x, y) = synthetic_task(96, 7);
    let (xv, yv) = synthetic_task(24, 8);
    let cfg = small_config(12, 12);
    let (net_a, curve_a) = fit(build(&cfg), &x, &y, &xv, &yv, &cfg).unwrap();
    let (net_b, curve_b) = fit(build(&cfg), &x, &y, &xv, &yv, &cfg).unwrap();
    assert_eq!(curve_a, curve_b);
    assert_eq!(net_a, net_b);
    // A different seed changes the outcome.
    let other = TrainConfig { seed: 6, ..cfg };
    let (net_c, _) = fit(build(&other), &x, &y, &xv, &yv, &other).unwrap();
    assert_ne!(net_a, net_c);
}

#[test]
fn divergent_training_aborts_with_a_diagnostic() {
    let (x, y) = synthetic_task(64, 9);
    let cfg = TrainConfig {
        learning_rate: 1e300,
        ..small_config(20, 20)
    };
    let err = fit(build(&cfg), &x, &y, &x, &y, &cfg).unwrap_err();
    assert!(matches!(
        err,
        thr_core::Error::NonFiniteLoss { .. } | thr_core::Error::NonFiniteGradient { .. }
    ));
}

#[test]
fn empty_partitions_are_rejected() {
    let (x, y) = synthetic_task(32, 10);
    let empty_x = Tensor::zeros(0, 12);
    let empty_y = Tensor::zeros(0, 3);
    let cfg = small_config(5, 5);
    assert!(fit(build(&cfg), &empty_x, &empty_y, &x, &y, &cfg).is_err());
    assert!(fit(build(&cfg), &x, &y, &empty_x, &empty_y, &cfg).is_err());
}
