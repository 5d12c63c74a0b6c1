//! JSON checkpoints: architecture plus the flat weight vector.
//!
//! JSON numbers are written in shortest-round-trip form, so an `f64` vector
//! survives save/load bit-exactly; the round-trip test pins that down.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::MlpConfig;
use crate::error::{Error, Result};

/// Identifies the file type independent of its name.
pub const CHECKPOINT_FORMAT: &str = "evidential-mlp";
/// Bumped on any incompatible layout change.
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    config: MlpConfig,
    params: Vec<f64>,
}

fn io_error(path: &Path, err: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: err.to_string(),
    }
}

/// Writes the network to `path` as JSON.
pub fn save_checkpoint(mlp: &Mlp, path: &Path) -> Result<()> {
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        config: mlp.config().clone(),
        params: mlp.parameters().values().to_vec(),
    };
    let json = serde_json::to_string_pretty(&file).map_err(|e| io_error(path, e))?;
    fs::write(path, json).map_err(|e| io_error(path, e))
}

/// Restores a network from `path`, checking format and version.
pub fn load_checkpoint(path: &Path) -> Result<Mlp> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|e| io_error(path, e))?;
    if file.format != CHECKPOINT_FORMAT {
        return Err(Error::Config(format!(
            "not an {CHECKPOINT_FORMAT} checkpoint: format field is {:?}",
            file.format
        )));
    }
    if file.version != CHECKPOINT_VERSION {
        return Err(Error::Config(format!(
            "unsupported checkpoint version {} (supported: {CHECKPOINT_VERSION})",
            file.version
        )));
    }
    Mlp::from_parameters(file.config, file.params)
}
