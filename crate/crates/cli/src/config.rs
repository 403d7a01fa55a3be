use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use stochastic_ce::constants::{ConstantsLedger, Preset};
use stochastic_ce::game::StochasticGameSpec;

use crate::error::CliError;

/// Run parameters as read from `--config`. A previous `result.json` is also
/// accepted; its `config` block (and embedded spec) is used.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub overrides: Value,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub trajectories: Option<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct Loaded {
    pub doc: ConfigDoc,
    pub spec: Option<StochasticGameSpec>,
}

pub fn load(path: Option<&Path>) -> Result<Loaded, CliError> {
    let Some(path) = path else {
        return Ok(Loaded::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let (config, spec) = match value.get("config") {
        Some(c) if value.get("command").is_some() => (c.clone(), value.get("spec").cloned()),
        _ => (value, None),
    };
    let doc: ConfigDoc =
        serde_json::from_value(config).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let spec = match spec {
        Some(Value::Null) | None => None,
        Some(v) => Some(serde_json::from_value(v).map_err(|e| CliError::Config(format!("embedded spec: {e}")))?),
    };
    Ok(Loaded { doc, spec })
}

/// Everything a run depends on, echoed into `result.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub preset: Preset,
    pub overrides: Value,
    pub seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub trajectories: Option<u64>,
    #[serde(skip)]
    pub ledger: ConstantsLedger,
}

pub struct Flags {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub trajectories: Option<u64>,
}

impl Resolved {
    /// Command-line flags win over the config file, which wins over defaults.
    pub fn new(doc: &ConfigDoc, flags: &Flags) -> Result<Self, CliError> {
        let preset = flags.preset.or(doc.preset).unwrap_or(Preset::Desk);
        let ledger = ConstantsLedger::with_overrides(preset, &doc.overrides)?;
        let epsilon = flags.epsilon.or(doc.epsilon).unwrap_or(0.1);
        let delta = flags.delta.or(doc.delta).unwrap_or(0.1);
        if !(epsilon > 0.0 && epsilon <= 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(CliError::Config(format!("epsilon {epsilon} / delta {delta} out of range")));
        }
        // The echoed overrides are the full ledger, so a result file pins
        // every constant even if the preset defaults change later.
        let mut overrides = serde_json::to_value(&ledger).expect("ledger serializes");
        if let Some(map) = overrides.as_object_mut() {
            map.remove("preset");
        }
        Ok(Self {
            preset,
            overrides,
            seed: flags.seed.or(doc.seed).unwrap_or(0),
            epsilon,
            delta,
            trajectories: flags.trajectories.or(doc.trajectories),
            ledger,
        })
    }
}
