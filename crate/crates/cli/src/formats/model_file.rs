//! Versioned JSON model checkpoint with a whole-payload checksum.
//!
//! ```text
//! { "format": "thr-mlp", "version": 1, "sha256": "<hex>", "payload": … }
//! ```
//!
//! The checksum covers the canonical serialization of the payload (the
//! model plus the training configuration it was produced with). Loading
//! re-serializes the parsed payload and compares digests, so any field or
//! digit that changed on disk is rejected rather than silently loaded.
//! Floats are shortest-round-trip decimal: save → load is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thr_core::nn::{MlpModel, TrainConfig, MODEL_VERSION};

use crate::error::{write_file, CliError};

const FORMAT_NAME: &str = "thr-mlp";

#[derive(Debug, Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    sha256: String,
    payload: ModelPayload,
}

/// Everything the checksum covers.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelPayload {
    pub model: MlpModel,
    /// The configuration the model was trained with, for provenance.
    pub train_config: TrainConfig,
}

fn digest(payload: &ModelPayload) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(payload).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn save_model(
    path: &Path,
    model: &MlpModel,
    train_config: &TrainConfig,
) -> Result<(), CliError> {
    let payload = ModelPayload {
        model: model.clone(),
        train_config: train_config.clone(),
    };
    let envelope = Envelope {
        format: FORMAT_NAME.into(),
        version: MODEL_VERSION,
        sha256: digest(&payload)?,
        payload,
    };
    let bytes = serde_json::to_vec(&envelope).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(&path.to_path_buf(), &bytes)
}

pub fn load_model(path: &Path) -> Result<ModelPayload, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let envelope: Envelope =
        serde_json::from_slice(&bytes).map_err(|e| CliError::malformed(path, e))?;
    if envelope.format != FORMAT_NAME {
        return Err(CliError::malformed(
            path,
            format!("not a model file (format \"{}\")", envelope.format),
        ));
    }
    if envelope.version != MODEL_VERSION {
        return Err(CliError::malformed(
            path,
            format!(
                "unsupported model format version {} (this build reads version {MODEL_VERSION})",
                envelope.version
            ),
        ));
    }
    let expected = digest(&envelope.payload)?;
    if expected != envelope.sha256 {
        return Err(CliError::malformed(
            path,
            format!(
                "checksum mismatch: file says {}, payload hashes to {expected}",
                envelope.sha256
            ),
        ));
    }
    if envelope.payload.model.version != MODEL_VERSION {
        return Err(CliError::malformed(path, "inner model version mismatch"));
    }
    Ok(envelope.payload)
}
