//! Experiment configuration: JSON schema, `--set` overrides, validation.

use std::path::{Path, PathBuf};

use hspec_core::map::MapSpec;
use hspec_core::HoloMap64;
use serde::{Deserialize, Serialize};

/// A config problem that should surface as a usage error (exit 64),
/// pointing at the offending field.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), message: message.into() }
}

/// On-disk experiment configuration. Truncation and grid orders default
/// from `n_c` when omitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: MapSpec,
    #[serde(default = "default_n_c")]
    pub n_c: usize,
    #[serde(default)]
    pub n_r: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_n_c() -> usize {
    64
}

fn default_t_grid() -> Vec<f64> {
    vec![0.5, 0.8, 0.95, 1.0]
}

fn default_threshold() -> f64 {
    1.0 + 1e-3
}

/// A fully resolved, validated configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub map: HoloMap64,
    pub n_c: usize,
    pub n_r: usize,
    pub m: usize,
    pub t_grid: Vec<f64>,
    pub threshold: f64,
    pub out_dir: PathBuf,
}

/// Load a config file, apply `--set key=value` overrides (values parsed as
/// JSON, falling back to strings), and validate.
pub fn load(
    path: &Path,
    sets: &[String],
    out_flag: Option<&Path>,
) -> Result<Resolved, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err("config", format!("cannot read {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| err("config", format!("invalid JSON: {e}")))?;
    for s in sets {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| err("--set", format!("expected key=value, got `{s}`")))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| err("config", "top level must be a JSON object"))?;
        let parsed = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        obj.insert(key.to_string(), parsed);
    }
    let config: ExperimentConfig = serde_json::from_value(value)
        .map_err(|e| err("config", e.to_string()))?;
    resolve(config, out_flag)
}

pub fn resolve(
    config: ExperimentConfig,
    out_flag: Option<&Path>,
) -> Result<Resolved, ConfigError> {
    let n_c = config.n_c;
    if n_c < 8 {
        return Err(err("n_c", format!("truncation order {n_c} is too small (need >= 8)")));
    }
    let n_r = config.n_r.unwrap_or(4 * n_c);
    if n_r < 4 * n_c {
        return Err(err("n_r", format!("need n_r >= 4 n_c = {}, got {n_r}", 4 * n_c)));
    }
    let m = config
        .m
        .unwrap_or_else(|| std::cmp::max(1024, (4 * n_r).next_power_of_two()));
    if !m.is_power_of_two() {
        return Err(err("m", format!("grid size {m} must be a power of two")));
    }
    if m < 8 * n_c {
        return Err(err("m", format!("need m >= 8 n_c = {}, got {m}", 8 * n_c)));
    }
    if m < 4 * n_r {
        return Err(err("m", format!("need m >= 4 n_r = {} for alias-free coefficients, got {m}", 4 * n_r)));
    }
    let t_grid = config.t_grid.clone();
    if t_grid.is_empty()
        || t_grid.windows(2).any(|w| w[1] <= w[0])
        || t_grid[0] <= 0.0
        || (t_grid.last().unwrap() - 1.0).abs() > 1e-12
    {
        return Err(err("t_grid", "must be strictly increasing within (0, 1] and end at 1"));
    }
    if !(config.threshold > 0.0) {
        return Err(err("threshold", "must be positive"));
    }
    let map = config
        .map
        .to_map::<f64>()
        .map_err(|e| err("map", e.to_string()))?;
    let report = hspec_core::map::validate(&map, 2048)
        .map_err(|e| err("map", e.to_string()))?;
    if report.max_boundary_modulus > 1.0 + 1e-12 {
        return Err(err(
            "map",
            format!(
                "not a self-map of the disk: max boundary modulus {}",
                report.max_boundary_modulus
            ),
        ));
    }
    let out_dir = out_flag
        .map(Path::to_path_buf)
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("hspec-out"));
    Ok(Resolved {
        threshold: config.threshold,
        map,
        n_c,
        n_r,
        m,
        t_grid,
        out_dir,
        config,
    })
}
