//! Effective configuration: a JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use levy_transport::timeseries::RegimeConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use levy_transport::io;

use crate::failure::Failure;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub distance: DistanceConfig,
    pub table: TableConfig,
    pub fit: FitConfig,
    pub simulate: SimulateConfig,
    pub couple: CoupleConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: None,
            out: PathBuf::from("results"),
            distance: DistanceConfig::default(),
            table: TableConfig::default(),
            fit: FitConfig::default(),
            simulate: SimulateConfig::default(),
            couple: CoupleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceConfig {
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub p: f64,
    pub tol: f64,
    pub oracle: bool,
    pub normalized: bool,
    pub eps: Option<f64>,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            a: None,
            b: None,
            p: 1.0,
            tol: levy_transport::distance::DEFAULT_TOL,
            oracle: false,
            normalized: false,
            eps: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableConfig {
    pub alphas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub n: usize,
    pub reps: usize,
}

impl Default for TableConfig {
    fn default() -> Self {
        let grid = levy_transport::StudyGrid::default();
        Self {
            alphas: grid.alphas,
            epsilons: grid.epsilons,
            n: grid.n,
            reps: grid.reps,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub series: Option<PathBuf>,
    pub header: bool,
    pub regime: RegimeConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub spec: Option<PathBuf>,
    pub horizon: f64,
    /// Defaults to `horizon / 1000`.
    pub dt: Option<f64>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            spec: None,
            horizon: 1.0,
            dt: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoupleConfig {
    pub spec_a: Option<PathBuf>,
    pub spec_b: Option<PathBuf>,
    pub horizon: f64,
    pub dt: Option<f64>,
    pub replicates: usize,
    pub bound: bool,
}

impl Default for CoupleConfig {
    fn default() -> Self {
        Self {
            spec_a: None,
            spec_b: None,
            horizon: 1.0,
            dt: None,
            replicates: 1000,
            bound: false,
        }
    }
}

// keys holding file paths; relative ones in a config file are taken
// relative to that file
const PATH_KEYS: [&[&str]; 7] = [
    &["out"],
    &["distance", "a"],
    &["distance", "b"],
    &["fit", "series"],
    &["simulate", "spec"],
    &["couple", "spec_a"],
    &["couple", "spec_b"],
];

pub fn load_file(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| {
        Failure::validation(format!("{}: {}", path.display(), io::json_error_message(&e)))
    })?;
    if !value.is_object() {
        return Err(Failure::validation(format!("{}: expected a JSON object", path.display())));
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    for keys in PATH_KEYS {
        if let Some(Value::String(s)) = lookup_mut(&mut value, keys) {
            let p = Path::new(s.as_str());
            if p.is_relative() {
                *s = base.join(p).display().to_string();
            }
        }
    }
    Ok(value)
}

fn lookup_mut<'a>(value: &'a mut Value, keys: &[&str]) -> Option<&'a mut Value> {
    keys.iter().try_fold(value, |v, k| v.get_mut(*k))
}

/// Recursively overlays `top` onto `base`; objects merge, anything else replaces.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, t) => *b = t,
    }
}

/// Sets `keys` in `overlay` when `value` is present.
pub fn set<T: Serialize>(overlay: &mut Value, keys: &[&str], value: Option<T>) {
    let Some(value) = value else { return };
    let (last, parents) = keys.split_last().expect("non-empty key path");
    let mut node = overlay;
    for k in parents {
        if !node.is_object() {
            *node = Value::Object(Map::new());
        }
        node = node
            .as_object_mut()
            .unwrap()
            .entry(*k)
            .or_insert_with(|| Value::Object(Map::new()));
    }
    if !node.is_object() {
        *node = Value::Object(Map::new());
    }
    node.as_object_mut()
        .unwrap()
        .insert(last.to_string(), serde_json::to_value(value).expect("serializable flag"));
}

pub fn resolve(file: Option<Value>, overlay: Value) -> Result<Config, Failure> {
    let mut value = file.unwrap_or_else(|| Value::Object(Map::new()));
    merge(&mut value, overlay);
    serde_json::from_value(value).map_err(|e| Failure::validation(format!("config: {e}")))
}
