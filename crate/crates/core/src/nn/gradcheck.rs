//! Central finite-difference verification of the analytic gradients.
//!
//! This is the load-bearing correctness check for the whole network module:
//! every layer's backward pass, including the batch-statistics terms of
//! batch normalization and the sampled dropout masks, must reproduce the
//! numerical derivative of the loss. The check is exposed as a library
//! function so the command-line `check` subcommand and the test suites run
//! exactly the same verification.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layer::{BatchNorm, Dense, Dropout, Layer};
use super::model::Network;
use super::tensor::Tensor;
use super::train::mse_loss;
use crate::Result;

/// Outcome of a finite-difference sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GradCheckReport {
    /// Parameters compared.
    pub checked: usize,
    /// Largest relative error seen.
    pub max_rel_err: f64,
    /// Parameters whose error exceeded the tolerance.
    pub failures: usize,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn merge(&mut self, other: GradCheckReport) {
        self.checked += other.checked;
        self.max_rel_err = self.max_rel_err.max(other.max_rel_err);
        self.failures += other.failures;
    }
}

/// Gradients with magnitude below this are compared absolutely: central
/// differences carry ~1e-11 of round-off noise at unit loss scale, which
/// would dominate a relative comparison against a vanishing gradient.
const SMALL_GRADIENT: f64 = 1e-6;
const SMALL_GRADIENT_ATOL: f64 = 1e-9;

/// Compares every analytic parameter gradient of `network` on the given
/// batch against central finite differences with the given `step`.
///
/// Dropout masks are replayed identically for every loss evaluation by
/// reseeding the forward rng. `inject_fault` deliberately corrupts one
/// analytic gradient component so harness failure detection can itself be
/// exercised.
pub fn finite_difference_check(
    network: &Network,
    batch: &Tensor,
    targets: &Tensor,
    forward_seed: u64,
    step: f64,
    tolerance: f64,
    inject_fault: bool,
) -> Result<GradCheckReport> {
    let loss_of = |net: &Network| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(forward_seed);
        let (pred, _) = net.forward_train(batch, &mut rng)?;
        Ok(mse_loss(&pred, targets)?.0)
    };

    // Analytic gradients.
    let mut rng = ChaCha8Rng::seed_from_u64(forward_seed);
    let (pred, caches) = network.forward_train(batch, &mut rng)?;
    let (_, loss_grad) = mse_loss(&pred, targets)?;
    let grads = network.backward(&caches, &loss_grad)?;
    let mut analytic: Vec<Tensor> = grads
        .iter()
        .flat_map(|g| g.tensors().into_iter().cloned())
        .collect();
    if inject_fault {
        if let Some(first) = analytic.first_mut() {
            first.data_mut()[0] += 1e-2;
        }
    }

    let mut report = GradCheckReport {
        checked: 0,
        max_rel_err: 0.0,
        failures: 0,
    };
    let mut scratch = network.clone();
    let param_count = analytic.len();
    for p in 0..param_count {
        let len = analytic[p].data().len();
        for i in 0..len {
            let original = scratch.params_mut()[p].data()[i];
            scratch.params_mut()[p].data_mut()[i] = original + step;
            let plus = loss_of(&scratch)?;
            scratch.params_mut()[p].data_mut()[i] = original - step;
            let minus = loss_of(&scratch)?;
            scratch.params_mut()[p].data_mut()[i] = original;

            let numeric = (plus - minus) / (2.0 * step);
            let exact = analytic[p].data()[i];
            let scale = numeric.abs().max(exact.abs());
            let (err, failed) = if scale < SMALL_GRADIENT {
                let abs = (numeric - exact).abs();
                (abs, abs > SMALL_GRADIENT_ATOL)
            } else {
                let rel = (numeric - exact).abs() / scale;
                (rel, rel > tolerance)
            };
            report.checked += 1;
            report.max_rel_err = report.max_rel_err.max(err);
            if failed {
                report.failures += 1;
            }
        }
    }
    Ok(report)
}

/// Runs [`finite_difference_check`] over `configurations` randomized tiny
/// networks covering every layer type: random widths and batch sizes, with
/// and without batch normalization and dropout.
pub fn random_tiny_network_check(
    seed: u64,
    configurations: usize,
    step: f64,
    tolerance: f64,
) -> Result<GradCheckReport> {
    let mut total = GradCheckReport {
        checked: 0,
        max_rel_err: 0.0,
        failures: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..configurations {
        let inputs = rng.gen_range(2..6usize);
        let hidden = rng.gen_range(2..6usize);
        let outputs = rng.gen_range(1..4usize);
        let batch = rng.gen_range(2..6usize);
        let with_bn = rng.gen_bool(0.7);
        let with_dropout = rng.gen_bool(0.7);
        let dropout_rate = if with_dropout { 0.3 } else { 0.0 };

        let mut init = ChaCha8Rng::seed_from_u64(rng.gen());
        let mut layers = alloc::vec![Layer::Dense(Dense::init(inputs, hidden, &mut init))];
        if with_bn {
            layers.push(Layer::BatchNorm(randomized_batchnorm(hidden, &mut init)));
        }
        layers.push(Layer::Relu);
        layers.push(Layer::Dropout(Dropout { rate: dropout_rate }));
        layers.push(Layer::Dense(Dense::init(hidden, outputs, &mut init)));
        let network = Network { layers };

        let x = Tensor::from_fn(batch, inputs, |_, _| init.gen_range(-1.5..1.5));
        let y = Tensor::from_fn(batch, outputs, |_, _| init.gen_range(-1.0..1.0));
        let forward_seed = rng.gen();
        let report =
            finite_difference_check(&network, &x, &y, forward_seed, step, tolerance, false)?;
        total.merge(report);
    }
    Ok(total)
}

/// Batch-norm layer with non-trivial scale/shift so their gradients are
/// exercised away from the identity.
fn randomized_batchnorm(width: usize, rng: &mut ChaCha8Rng) -> BatchNorm {
    let mut bn = BatchNorm::new(width, 1e-5, 0.9);
    for g in bn.gamma.data_mut() {
        *g = rng.gen_range(0.5..1.5);
    }
    for b in bn.beta.data_mut() {
        *b = rng.gen_range(-0.5..0.5);
    }
    bn
}
