//! Mini-batch MSE training with Adam and early stopping.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{AdamConfig, AdamState};
use super::model::{MlpModel, MlpOptions, Network, MODEL_VERSION};
use super::tensor::Tensor;
use crate::dataset::{compute_normalization, Sample};
use crate::geometry::EepRanges;
use crate::{Error, Result};

/// ChaCha stream offsets: per-epoch shuffling and dropout draw streams are
/// disjoint from each other and from weight initialization.
const SHUFFLE_STREAM_BASE: u64 = 10_000;
const DROPOUT_STREAM_BASE: u64 = 20_000;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub learning_rate: f64,
    pub dropout_rate: f64,
    pub bn_epsilon: f64,
    pub bn_momentum: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: alloc::vec![450, 250, 220],
            batch_size: 256,
            max_epochs: 500,
            patience: 20,
            learning_rate: 0.001,
            dropout_rate: 0.1,
            bn_epsilon: 1e-5,
            bn_momentum: 0.9,
            seed: 7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty()
            || self.hidden.iter().any(|&w| w == 0)
            || self.batch_size == 0
            || self.max_epochs == 0
            || self.patience == 0
            || !(self.learning_rate > 0.0)
            || !(0.0..1.0).contains(&self.dropout_rate)
        {
            return Err(Error::InvalidConfig(alloc::format!(
                "invalid training configuration {self:?}"
            )));
        }
        Ok(())
    }

    pub fn options(&self) -> MlpOptions {
        MlpOptions {
            dropout_rate: self.dropout_rate,
            bn_epsilon: self.bn_epsilon,
            bn_momentum: self.bn_momentum,
        }
    }
}

/// One row of the learning curve.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

/// Mean squared error over every element, with the gradient w.r.t. `pred`:
/// 2(pred − target)/count.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if pred.shape() != target.shape() {
        let (er, ec) = target.shape();
        let (r, c) = pred.shape();
        return Err(Error::ShapeMismatch {
            expected_rows: er,
            expected_cols: ec,
            rows: r,
            cols: c,
        });
    }
    let count = pred.data().len() as f64;
    let mut grad = pred.clone();
    let mut loss = 0.0;
    for (g, t) in grad.data_mut().iter_mut().zip(target.data()) {
        let d = *g - t;
        loss += d * d;
        *g = 2.0 * d / count;
    }
    Ok((loss / count, grad))
}

/// Trains `network` on pre-normalized tensors, retaining the parameters of
/// the best validation epoch and stopping once validation loss has not
/// improved for `patience` epochs. Returns the best network and the learning
/// curve. Fully deterministic in (network, data, config seed).
pub fn fit(
    network: Network,
    x_train: &Tensor,
    y_train: &Tensor,
    x_val: &Tensor,
    y_val: &Tensor,
    cfg: &TrainConfig,
) -> Result<(Network, Vec<EpochStats>)> {
    cfg.validate()?;
    if x_train.rows() == 0 {
        return Err(Error::EmptyDataset("training part".into()));
    }
    if x_val.rows() == 0 {
        return Err(Error::EmptyDataset("validation part".into()));
    }
    if x_train.rows() != y_train.rows() || x_val.rows() != y_val.rows() {
        return Err(Error::InvalidConfig(
            "inputs and targets disagree on sample counts".into(),
        ));
    }

    let mut network = network;
    let mut adam = AdamState::new(
        AdamConfig {
            learning_rate: cfg.learning_rate,
            ..AdamConfig::default()
        },
        &network.param_shapes(),
    );

    let n = x_train.rows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut curve = Vec::new();
    let mut best: Option<(f64, Network)> = None;
    let mut best_epoch = 0usize;

    for epoch in 0..cfg.max_epochs {
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        shuffle_rng.set_stream(SHUFFLE_STREAM_BASE + epoch as u64);
        order.shuffle(&mut shuffle_rng);

        let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        dropout_rng.set_stream(DROPOUT_STREAM_BASE + epoch as u64);

        let mut train_sq_sum = 0.0;
        for batch_idx in order.chunks(cfg.batch_size) {
            let xb = x_train.gather_rows(batch_idx);
            let yb = y_train.gather_rows(batch_idx);
            let (pred, caches) = network.forward_train(&xb, &mut dropout_rng)?;
            let (loss, grad) = mse_loss(&pred, &yb)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            train_sq_sum += loss * batch_idx.len() as f64;
            let grads = network.backward(&caches, &grad)?;
            let grad_tensors: Vec<&Tensor> =
                grads.iter().flat_map(|g| g.tensors()).collect();
            let mut params = network.params_mut();
            adam.step(&mut params, &grad_tensors)?;
            network.update_running_stats(&caches);
        }
        let train_mse = train_sq_sum / n as f64;

        let val_pred = network.forward_infer(x_val)?;
        let (val_mse, _) = mse_loss(&val_pred, y_val)?;
        if !val_mse.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        curve.push(EpochStats {
            epoch,
            train_mse,
            val_mse,
        });

        let improved = best.as_ref().map_or(true, |(b, _)| val_mse < *b);
        if improved {
            best = Some((val_mse, network.clone()));
            best_epoch = epoch;
        } else if epoch - best_epoch >= cfg.patience {
            break;
        }
    }

    let (_, best_network) = best.expect("at least one epoch ran");
    Ok((best_network, curve))
}

/// End-to-end surrogate training over dataset samples: computes the input
/// normalization on the training part, builds tensors and the network, fits,
/// and wraps the result with its normalization contract.
pub fn train_surrogate(
    train: &[Sample],
    val: &[Sample],
    output_ranges: EepRanges,
    cfg: &TrainConfig,
) -> Result<(MlpModel, Vec<EpochStats>)> {
    cfg.validate()?;
    let norm = compute_normalization(train, output_ranges)?;
    let to_tensors = |part: &[Sample]| -> Result<(Tensor, Tensor)> {
        let mut x = Tensor::zeros(part.len(), norm.grid.count);
        let mut y = Tensor::zeros(part.len(), 6);
        for (i, s) in part.iter().enumerate() {
            let row = norm.normalize_spectrum(&s.spectrum)?;
            x.row_mut(i).copy_from_slice(&row);
            y.row_mut(i).copy_from_slice(&norm.normalize_output(&s.eep));
        }
        Ok((x, y))
    };
    let (x_train, y_train) = to_tensors(train)?;
    let (x_val, y_val) = to_tensors(val)?;
    let network = Network::mlp(norm.grid.count, &cfg.hidden, 6, &cfg.options(), cfg.seed);
    let (network, curve) = fit(network, &x_train, &y_train, &x_val, &y_val, cfg)?;
    Ok((
        MlpModel {
            network,
            norm,
            version: MODEL_VERSION,
        },
        curve,
    ))
}
