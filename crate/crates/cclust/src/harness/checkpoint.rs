//! Versioned checkpoint: architecture, parameters, optimizer state, and the
//! seed bookkeeping needed to resume training bit-exactly. JSON with full
//! float round-tripping.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::network::{LayerSpec, MLPParams};
use crate::optim::OptimizerState;

use super::config::HarnessError;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Random-stream bookkeeping. Batch orders and oracle noise are derived
/// statelessly from (seed, epoch) and (seed, pair), so resuming only needs
/// the original seed and the next epoch index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub next_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub spec: LayerSpec,
    pub params: MLPParams,
    pub optimizer: OptimizerState,
    pub rng: RngState,
    pub config_fingerprint: String,
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<(), HarnessError> {
    let text = serde_json::to_string(checkpoint).map_err(|e| HarnessError::io(path, e))?;
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let checkpoint: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("checkpoint {}: {e}", path.display())))?;
    if checkpoint.version != CHECKPOINT_VERSION {
        return Err(HarnessError::Config(format!(
            "checkpoint {} has version {}, this build reads version {CHECKPOINT_VERSION}",
            path.display(),
            checkpoint.version
        )));
    }
    Ok(checkpoint)
}
