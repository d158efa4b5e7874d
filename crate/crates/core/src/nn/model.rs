//! The network container and the trained surrogate model.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layer::{BatchNorm, Dense, Dropout, Layer, LayerCache, LayerGrads};
use super::tensor::Tensor;
use crate::branch::StlSpectrum;
use crate::dataset::NormalizationStats;
use crate::geometry::EquivalentElectricalParams;
use crate::Result;

/// Serialized-model format version understood by this build.
pub const MODEL_VERSION: u32 = 1;

/// ChaCha stream offset for the per-dense-layer weight initialization.
const INIT_STREAM_BASE: u64 = 100;

/// Structural hyperparameters of the standard block stack.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpOptions {
    pub dropout_rate: f64,
    pub bn_epsilon: f64,
    pub bn_momentum: f64,
}

impl Default for MlpOptions {
    fn default() -> Self {
        Self {
            dropout_rate: 0.1,
            bn_epsilon: 1e-5,
            bn_momentum: 0.9,
        }
    }
}

/// An ordered layer stack.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Network {
    pub layers: Vec<Layer>,
}

impl Network {
    /// The standard stack: per hidden width a dense → batch-norm → ReLU →
    /// dropout block, then a linear output layer. Weights are seeded
    /// deterministically, one ChaCha stream per dense layer.
    pub fn mlp(
        input_width: usize,
        hidden: &[usize],
        output_width: usize,
        opts: &MlpOptions,
        seed: u64,
    ) -> Self {
        let mut layers = Vec::new();
        let mut width = input_width;
        let mut dense_index = 0u64;
        let rng_for = |idx: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(INIT_STREAM_BASE + idx);
            rng
        };
        for &h in hidden {
            layers.push(Layer::Dense(Dense::init(width, h, &mut rng_for(dense_index))));
            dense_index += 1;
            layers.push(Layer::BatchNorm(BatchNorm::new(
                h,
                opts.bn_epsilon,
                opts.bn_momentum,
            )));
            layers.push(Layer::Relu);
            layers.push(Layer::Dropout(Dropout {
                rate: opts.dropout_rate,
            }));
            width = h;
        }
        layers.push(Layer::Dense(Dense::init(
            width,
            output_width,
            &mut rng_for(dense_index),
        )));
        Self { layers }
    }

    pub fn input_width(&self) -> usize {
        match self.layers.first() {
            Some(Layer::Dense(d)) => d.weights.rows(),
            _ => 0,
        }
    }

    pub fn output_width(&self) -> usize {
        self.layers
            .iter()
            .fold(self.input_width(), |w, l| l.output_width(w))
    }

    /// Train-mode pass over the whole stack; the caches feed
    /// [`Self::backward`] and [`Self::update_running_stats`].
    pub fn forward_train(
        &self,
        batch: &Tensor,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Tensor, Vec<LayerCache>)> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for layer in &self.layers {
            let (y, cache) = layer.forward_train(&x, rng)?;
            caches.push(cache);
            x = y;
        }
        Ok((x, caches))
    }

    /// Inference-mode pass: running statistics, no dropout, no side effects.
    pub fn forward_infer(&self, batch: &Tensor) -> Result<Tensor> {
        let mut x = batch.clone();
        for layer in &self.layers {
            x = layer.forward_infer(&x)?;
        }
        Ok(x)
    }

    /// Reverse-mode gradients for every layer, outermost gradient first
    /// being `grad_output` of the loss.
    pub fn backward(
        &self,
        caches: &[LayerCache],
        grad_output: &Tensor,
    ) -> Result<Vec<LayerGrads>> {
        debug_assert_eq!(caches.len(), self.layers.len());
        let mut grads = alloc::vec![LayerGrads::None; self.layers.len()];
        let mut g = grad_output.clone();
        for (i, (layer, cache)) in self.layers.iter().zip(caches).enumerate().rev() {
            let (g_in, layer_grads) = layer.backward(cache, &g)?;
            grads[i] = layer_grads;
            g = g_in;
        }
        Ok(grads)
    }

    pub fn update_running_stats(&mut self, caches: &[LayerCache]) {
        for (layer, cache) in self.layers.iter_mut().zip(caches) {
            layer.update_running_stats(cache);
        }
    }

    /// Shapes of all learnable tensors, in optimizer order.
    pub fn param_shapes(&self) -> Vec<(usize, usize)> {
        self.layers
            .iter()
            .flat_map(|l| l.params().into_iter().map(|t| t.shape()))
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.params_mut())
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.params())
            .map(|t| t.data().len())
            .sum()
    }
}

/// Anything that maps an STL spectrum to equivalent electrical parameters;
/// lets the design pipeline and the optimizer take stub predictors in tests.
pub trait EepPredictor {
    fn predict_eep(&self, spectrum: &StlSpectrum) -> Result<EquivalentElectricalParams>;
}

/// A trained surrogate: the network plus the normalization contract it was
/// trained under.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpModel {
    pub network: Network,
    pub norm: NormalizationStats,
    pub version: u32,
}

impl MlpModel {
    /// Normalizes the spectrum with the stored statistics, runs an
    /// inference pass, maps the six outputs back through the configured
    /// parameter ranges and clips into them.
    pub fn predict(&self, spectrum: &StlSpectrum) -> Result<EquivalentElectricalParams> {
        let x = self.norm.normalize_spectrum(spectrum)?;
        let len = x.len();
        let out = self.network.forward_infer(&Tensor::from_vec(1, len, x)?)?;
        let mut unit = [0.0; 6];
        unit.copy_from_slice(&out.row(0)[..6]);
        Ok(self.norm.denormalize_output(unit))
    }
}

impl EepPredictor for MlpModel {
    fn predict_eep(&self, spectrum: &StlSpectrum) -> Result<EquivalentElectricalParams> {
        self.predict(spectrum)
    }
}
