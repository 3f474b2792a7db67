//! Run configuration: one TOML file plus `key=value` overrides.
//!
//! Experiment keys sit at the top level, with `[model]` and `[rl]` tables for
//! the economy and the learners. `[irf]`, `[sweep]`, `[output]` and
//! `[thresholds]` are optional. Every experiment, model and rl key is
//! required.

use std::fs;
use std::path::Path;

use rmabm_core::analysis::{IrfSettings, StrategyThresholds};
use rmabm_core::harness::ExperimentConfig;
use rmabm_core::rl::PolicyMode;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, IoContext};

/// Short names accepted by `--set`, mapped to their full key path.
pub const ALIASES: &[(&str, &str)] = &[
    ("N", "num_rl_agents"),
    ("z_c", "model.search_depth"),
    ("T_train", "train_episodes"),
    ("T_test", "test_episodes"),
    ("t_sim", "sim_steps"),
    ("t_burn_in", "burn_in_steps"),
    ("policy_mode", "rl.policy_mode"),
];

const SECTIONS: [&str; 4] = ["irf", "sweep", "output", "thresholds"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrfConfig {
    pub shock_size: f64,
    pub shock_duration: u64,
    /// Defaults to the middle of the RL window.
    pub t_shock: Option<u64>,
    pub num_seeds: usize,
}

impl Default for IrfConfig {
    fn default() -> Self {
        Self { shock_size: 0.3, shock_duration: 1, t_shock: None, num_seeds: 20 }
    }
}

impl IrfConfig {
    pub fn settings(&self, cfg: &ExperimentConfig) -> IrfSettings {
        IrfSettings {
            shock_size: self.shock_size,
            shock_duration: self.shock_duration,
            t_shock: self.t_shock.unwrap_or((cfg.burn_in_steps + cfg.sim_steps.div_ceil(2)) as u64),
            num_seeds: self.num_seeds,
        }
    }
}

/// Sweep axes. An empty list keeps the experiment's own value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub search_depth: Vec<usize>,
    pub num_rl_agents: Vec<usize>,
    pub policy_mode: Vec<PolicyMode>,
    pub base_seed: Vec<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirmFrames {
    /// Per-firm rows for every test episode.
    All,
    /// Per-firm rows for the first test episode only.
    #[default]
    First,
    None,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub firm_frames: FirmFrames,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub irf: IrfConfig,
    pub sweep: SweepGrid,
    pub output: OutputConfig,
    pub thresholds: StrategyThresholds,
}

impl RunConfig {
    pub fn new(experiment: ExperimentConfig) -> Self {
        Self {
            experiment,
            irf: IrfConfig::default(),
            sweep: SweepGrid::default(),
            output: OutputConfig::default(),
            thresholds: StrategyThresholds::default(),
        }
    }

    /// Reads `path` and applies `overrides` (`key=value`, later wins).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, Error> {
        let text = fs::read_to_string(path).at(path)?;
        Self::parse(&text, overrides).map_err(|e| match e {
            Error::Config { message, .. } => Error::Config { path: path.to_path_buf(), message },
            other => other,
        })
    }

    /// Parses TOML text; errors carry an empty path.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, Error> {
        let config_err = |message: String| Error::Config { path: Default::default(), message };
        let mut table: Table = text.parse().map_err(|e: toml::de::Error| config_err(e.message().to_string()))?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        Self::from_table(table).map_err(config_err)
    }

    fn from_table(mut table: Table) -> Result<Self, String> {
        fn section<T: for<'de> Deserialize<'de> + Default>(table: &mut Table, name: &str) -> Result<T, String> {
            match table.remove(name) {
                None => Ok(T::default()),
                Some(v) => v.try_into().map_err(|e: toml::de::Error| format!("[{name}]: {}", e.message())),
            }
        }
        let irf = section(&mut table, "irf")?;
        let sweep = section(&mut table, "sweep")?;
        let output = section(&mut table, "output")?;
        let thresholds = match table.remove("thresholds") {
            None => StrategyThresholds::default(),
            Some(v) => v.try_into().map_err(|e: toml::de::Error| format!("[thresholds]: {}", e.message()))?,
        };
        let experiment: ExperimentConfig = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| describe(e.message()))?;
        experiment.validate().map_err(|e| e.to_string())?;
        Ok(Self { experiment, irf, sweep, output, thresholds })
    }

    /// The fully resolved configuration as TOML, loadable by [`RunConfig::parse`].
    pub fn to_toml(&self) -> String {
        let mut table = match Value::try_from(&self.experiment) {
            Ok(Value::Table(t)) => t,
            _ => unreachable!("experiment config serialises to a table"),
        };
        let mut put = |name: &str, v: Result<Value, toml::ser::Error>| {
            table.insert(name.into(), v.expect("plain data serialises"));
        };
        put("irf", Value::try_from(&self.irf));
        put("sweep", Value::try_from(&self.sweep));
        put("output", Value::try_from(&self.output));
        put("thresholds", Value::try_from(self.thresholds));
        toml::to_string(&table).expect("plain data serialises")
    }
}

/// Missing-key messages from serde name the field but not where it lives.
fn describe(message: &str) -> String {
    let m = message.trim();
    if let Some(rest) = m.strip_prefix("missing field ") {
        format!("missing required key {rest}")
    } else {
        m.to_string()
    }
}

/// Resolves an alias to its dotted key path.
pub fn resolve_key(key: &str) -> &str {
    ALIASES.iter().find(|(a, _)| *a == key).map_or(key, |(_, full)| full)
}

fn apply_override(table: &mut Table, item: &str) -> Result<(), Error> {
    let (key, raw) = item.split_once('=').ok_or_else(|| Error::Override {
        key: item.to_string(),
        message: "expected key=value".into(),
    })?;
    let key = key.trim();
    let path: Vec<&str> = resolve_key(key).split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Override { key: key.into(), message: "empty key segment".into() });
    }
    if path.len() == 1 && SECTIONS.contains(&path[0]) {
        return Err(Error::Override { key: key.into(), message: "cannot replace a whole section".into() });
    }
    let value = parse_value(raw.trim());
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cursor = table;
    for p in parents {
        let entry = cursor.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| Error::Override {
            key: key.into(),
            message: format!("`{p}` is not a table"),
        })?;
    }
    // Keep integer-valued floats as floats where the file already had a float.
    let value = match (cursor.get(*last), value) {
        (Some(Value::Float(_)), Value::Integer(i)) => Value::Float(i as f64),
        (_, v) => v,
    };
    cursor.insert(last.to_string(), value);
    Ok(())
}

/// A TOML literal if it parses as one, else a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}
