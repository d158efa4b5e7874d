//! From-scratch dense/batch-norm/dropout network, Adam, and the MSE
//! training loop behind the spectrum → parameters surrogate.

pub mod adam;
pub mod gradcheck;
pub mod layer;
pub mod model;
pub mod tensor;
pub mod train;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{finite_difference_check, random_tiny_network_check, GradCheckReport};
pub use layer::{BatchNorm, Dense, Dropout, Layer, LayerCache, LayerGrads};
pub use model::{EepPredictor, MlpModel, MlpOptions, Network, MODEL_VERSION};
pub use tensor::Tensor;
pub use train::{fit, mse_loss, train_surrogate, EpochStats, TrainConfig};
