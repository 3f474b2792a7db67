//! Versioned JSON checkpoints of an economy.

use std::fs;
use std::path::Path;

use rmabm_core::economy::EconomyState;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext};

pub const FORMAT: &str = "rmabm-economy";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<S> {
    format: String,
    version: u32,
    state: S,
}

pub fn to_json(state: &EconomyState) -> String {
    serde_json::to_string(&Envelope { format: FORMAT.into(), version: VERSION, state }).expect("state serialises")
}

pub fn from_json(text: &str) -> Result<EconomyState, String> {
    let env: Envelope<serde_json::Value> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if env.format != FORMAT {
        return Err(format!("format `{}`, expected `{FORMAT}`", env.format));
    }
    if env.version != VERSION {
        return Err(format!("unsupported version {}", env.version));
    }
    let state: EconomyState = serde_json::from_value(env.state).map_err(|e| e.to_string())?;
    state.params.validate().map_err(|e| e.to_string())?;
    Ok(state)
}

pub fn write(path: &Path, state: &EconomyState) -> Result<(), Error> {
    fs::write(path, to_json(state)).at(path)
}

pub fn read(path: &Path) -> Result<EconomyState, Error> {
    let text = fs::read_to_string(path).at(path)?;
    from_json(&text).map_err(|reason| Error::Snapshot { path: path.to_path_buf(), reason })
}
