//! Experiment configuration: JSON schema, validation, defaulting.
//!
//! A config file names one experiment and optionally overrides its inputs:
//!
//! ```json
//! {
//!   "experiment": "two-particle-selection",
//!   "eps_ladder": [1e-2, 1e-3, 1e-4],
//!   "t_final": 0.5,
//!   "dt_per_eps": 0.1,
//!   "paths": 10000,
//!   "seed": 7,
//!   "output_dir": "out/selection",
//!   "params": {"b_minus": -1.0, "b_plus": 3.0}
//! }
//! ```
//!
//! Every field except `experiment` is optional; each experiment supplies its
//! own defaults for whatever is omitted. `drift` accepts either an inline
//! drift specification (the drift JSON schema) or `{"file": "drift.json"}`.
//! `dt` (one absolute step size) and `dt_per_eps` (a step proportional to
//! each noise level on the ladder) are mutually exclusive. Relative paths —
//! the drift file and `output_dir` — resolve against the directory of the
//! config file itself, so a config can be run from anywhere.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use oflab_core::DriftSpec64;

use crate::error::{Error, Result};

/// Seed used when neither the config file nor `OFLAB_SEED` provides one.
pub const DEFAULT_SEED: u64 = 20260825;

/// Raw on-disk schema. Unknown keys are rejected so typos fail loudly.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: String,
    #[serde(default)]
    drift: Option<Value>,
    #[serde(default)]
    eps_ladder: Option<Vec<f64>>,
    #[serde(default)]
    t_final: Option<f64>,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    dt_per_eps: Option<f64>,
    #[serde(default)]
    paths: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

/// A validated run request: the experiment name plus optional overrides.
/// `None` means "use the experiment's documented default".
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub experiment: String,
    pub drift: Option<DriftSpec64>,
    pub eps_ladder: Option<Vec<f64>>,
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    pub dt_per_eps: Option<f64>,
    pub paths: Option<usize>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub params: BTreeMap<String, f64>,
    /// The parsed config file, echoed verbatim into the report; synthesized
    /// minimally for configs built in code.
    pub echo: Value,
}

impl RunConfig {
    /// A config with no overrides: every knob at the experiment's default,
    /// outputs under `oflab-out/<experiment>`.
    pub fn new(experiment: &str) -> Self {
        RunConfig {
            experiment: experiment.to_string(),
            drift: None,
            eps_ladder: None,
            t_final: None,
            dt: None,
            dt_per_eps: None,
            paths: None,
            seed: DEFAULT_SEED,
            output_dir: PathBuf::from("oflab-out").join(experiment),
            params: BTreeMap::new(),
            echo: serde_json::json!({ "experiment": experiment }),
        }
    }

    /// Parses and validates a config file. `base_dir` is the directory the
    /// file lives in; relative paths inside the config resolve against it.
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<RunConfig> {
        // Parse into the schema first so errors carry line/column positions.
        let file: ConfigFile =
            serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        let echo: Value = serde_json::from_str(text).expect("schema-valid JSON reparses");

        if let Some(ladder) = &file.eps_ladder {
            validate_ladder(ladder)?;
        }
        for (key, check, positive) in [
            ("t_final", file.t_final, true),
            ("dt", file.dt, true),
            ("dt_per_eps", file.dt_per_eps, true),
        ] {
            if let Some(v) = check {
                if !v.is_finite() || (positive && v <= 0.0) {
                    return Err(Error::config(format!(
                        "{key} must be finite and positive, got {v}"
                    )));
                }
            }
        }
        if file.dt.is_some() && file.dt_per_eps.is_some() {
            return Err(Error::config(
                "dt and dt_per_eps are mutually exclusive; set at most one",
            ));
        }
        if file.paths == Some(0) {
            return Err(Error::config("paths must be at least 1"));
        }
        for (k, v) in &file.params {
            if !v.is_finite() {
                return Err(Error::config(format!("param {k:?} must be finite, got {v}")));
            }
        }
        let drift = match &file.drift {
            Some(v) => Some(resolve_drift(v, base_dir)?),
            None => None,
        };
        let output_dir = match file.output_dir {
            Some(p) => base_dir.join(p),
            None => base_dir.join("oflab-out").join(&file.experiment),
        };
        Ok(RunConfig {
            experiment: file.experiment,
            drift,
            eps_ladder: file.eps_ladder,
            t_final: file.t_final,
            dt: file.dt,
            dt_per_eps: file.dt_per_eps,
            paths: file.paths,
            seed: file.seed.unwrap_or(DEFAULT_SEED),
            output_dir,
            params: file.params,
            echo,
        })
    }

    /// Noise ladder, falling back to the experiment default.
    pub fn eps_ladder_or(&self, default: &[f64]) -> Vec<f64> {
        match &self.eps_ladder {
            Some(l) => l.clone(),
            None => default.to_vec(),
        }
    }

    pub fn t_final_or(&self, default: f64) -> f64 {
        self.t_final.unwrap_or(default)
    }

    pub fn paths_or(&self, default: usize) -> usize {
        self.paths.unwrap_or(default)
    }

    /// Step size at noise level `eps` for experiments whose natural default
    /// scales with the noise: explicit `dt` wins, then `dt_per_eps · eps`,
    /// then `default_per_eps · eps`.
    pub fn dt_for(&self, eps: f64, default_per_eps: f64) -> f64 {
        match (self.dt, self.dt_per_eps) {
            (Some(dt), _) => dt,
            (None, Some(r)) => r * eps,
            (None, None) => default_per_eps * eps,
        }
    }

    /// Step size where the experiment default is absolute: explicit `dt`
    /// wins, then `dt_per_eps · eps`, then `default_dt`.
    pub fn dt_abs(&self, eps: f64, default_dt: f64) -> f64 {
        match (self.dt, self.dt_per_eps) {
            (Some(dt), _) => dt,
            (None, Some(r)) => r * eps,
            (None, None) => default_dt,
        }
    }

    /// Named scalar parameter with a default.
    pub fn param_or(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }
}

fn validate_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::config("eps_ladder must be nonempty"));
    }
    for &e in ladder {
        if !e.is_finite() || e <= 0.0 {
            return Err(Error::config(format!(
                "eps_ladder entries must be finite and positive, got {e}"
            )));
        }
    }
    for w in ladder.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::config(format!(
                "eps_ladder must be strictly decreasing, but {} is not below {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

/// Interprets the `drift` value: `{"file": path}` loads a drift file
/// relative to `base_dir`; anything else is parsed as an inline drift
/// specification.
fn resolve_drift(v: &Value, base_dir: &Path) -> Result<DriftSpec64> {
    if let Some(file) = v.get("file") {
        if v.as_object().map(|m| m.len()) != Some(1) {
            return Err(Error::config(
                "drift: {\"file\": …} takes no other keys",
            ));
        }
        let rel = file
            .as_str()
            .ok_or_else(|| Error::config("drift.file must be a string path"))?;
        let path = base_dir.join(rel);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::config(format!("drift file {}: {e}", path.display())))?;
        Ok(oflab_core::drift::from_json_str(&text)?)
    } else {
        let text = serde_json::to_string(v).expect("re-serializing parsed JSON");
        Ok(oflab_core::drift::from_json_str(&text)?)
    }
}
