//! The JSON run configuration.
//!
//! ```json
//! {
//!   "kinetics": { "type": "arrhenius", "a": 1.0, "b": 1.0 },
//!   "rate": { "type": "piecewise_constant", "edges": [0.0, 0.5], "values": [0.5, 1.5] },
//!   "grid": { "nx": 512, "ny": 64, "l": 40.0 },
//!   "solver": { "damping": 1.0, "outer_tol": 1e-6 },
//!   "diagnostics": { "enabled": true }
//! }
//! ```
//!
//! `solver` and `diagnostics` are optional; `grid.l` is a number or `"auto"`.

use std::path::Path;

use frontwave_core::{
    CombustionRate, FrontParams, GridLength, GridSpec, Initialization, KineticsModel, SolverConfig,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kinetics: KineticsSpec,
    pub rate: RateSpec,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KineticsSpec {
    Arrhenius {
        a: f64,
        b: f64,
    },
    Constant {
        k: f64,
    },
    /// `[u, K(u)]` breakpoints.
    Tabulated {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RateSpec {
    Constant {
        value: f64,
    },
    PiecewiseConstant {
        edges: Vec<f64>,
        values: Vec<f64>,
    },
    Smooth {
        mean: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "auto")]
    pub l: Value,
}

fn auto() -> Value {
    Value::String("auto".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitSpec {
    Flat,
    Cosine { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub damping: f64,
    pub outer_tol: f64,
    pub max_outer_iter: usize,
    pub front_tol: f64,
    pub front_max_iter: usize,
    pub front_cfl: f64,
    pub n0: u64,
    pub max_stages: usize,
    pub init: InitSpec,
}

impl Default for SolverSection {
    fn default() -> Self {
        let front = FrontParams::default();
        Self {
            damping: 1.0,
            outer_tol: 1e-6,
            max_outer_iter: 200,
            front_tol: front.tol,
            front_max_iter: front.max_iter,
            front_cfl: front.cfl,
            n0: 1,
            max_stages: 24,
            init: InitSpec::Flat,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    pub enabled: bool,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self { enabled: true }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        serde_path_to_error::deserialize(value).map_err(|e| {
            let field = e.path().to_string();
            CliError::Config(format!("invalid configuration `{field}`: {}", e.inner()))
        })
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("configuration serializes")
    }

    pub fn kinetics(&self) -> Result<KineticsModel, CliError> {
        Ok(match &self.kinetics {
            KineticsSpec::Arrhenius { a, b } => KineticsModel::arrhenius(*a, *b)?,
            KineticsSpec::Constant { k } => KineticsModel::constant(*k)?,
            KineticsSpec::Tabulated { points } => {
                KineticsModel::tabulated(points.iter().map(|p| (p[0], p[1])).collect())?
            }
        })
    }

    pub fn rate(&self) -> Result<CombustionRate, CliError> {
        Ok(match &self.rate {
            RateSpec::Constant { value } => CombustionRate::constant(*value)?,
            RateSpec::PiecewiseConstant { edges, values } => {
                CombustionRate::piecewise_constant(edges.clone(), values.clone())?
            }
            RateSpec::Smooth { mean, cos, sin } => {
                CombustionRate::smooth(*mean, cos.clone(), sin.clone())?
            }
        })
    }

    pub fn length(&self) -> Result<GridLength, CliError> {
        match &self.grid.l {
            Value::Number(n) => Ok(GridLength::Fixed(n.as_f64().unwrap_or(f64::NAN))),
            Value::String(s) if s == "auto" => Ok(GridLength::Auto),
            other => Err(CliError::Config(format!(
                "invalid configuration `grid.l`: expected a number or \"auto\", got {other}"
            ))),
        }
    }

    /// Builds and validates the solver configuration.
    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let grid = GridSpec {
            nx: self.grid.nx,
            ny: self.grid.ny,
            length: self.length()?,
        };
        let s = &self.solver;
        let mut cfg = SolverConfig::new(self.kinetics()?, self.rate()?, grid);
        cfg.damping = s.damping;
        cfg.outer_tol = s.outer_tol;
        cfg.max_outer_iter = s.max_outer_iter;
        cfg.front = FrontParams {
            tol: s.front_tol,
            max_iter: s.front_max_iter,
            cfl: s.front_cfl,
        };
        cfg.n0 = s.n0;
        cfg.max_stages = s.max_stages;
        cfg.init = match s.init {
            InitSpec::Flat => Initialization::Flat,
            InitSpec::Cosine { amplitude } => Initialization::Cosine { amplitude },
        };
        cfg.diagnostics = self.diagnostics.enabled;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Sets `path` (dot-separated, numeric parts index arrays) in a JSON value.
/// The parent must exist; the leaf may be new.
pub fn set_path(root: &mut Value, path: &str, new: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("invalid axis name `{path}`")));
    }
    let missing = || CliError::Config(format!("axis `{path}` does not name a configuration entry"));
    let (leaf, parents) = parts.split_last().ok_or_else(missing)?;
    let mut node = root;
    for p in parents {
        node = match node {
            Value::Object(map) => map.get_mut(*p).ok_or_else(missing)?,
            Value::Array(items) => p
                .parse::<usize>()
                .ok()
                .and_then(|i| items.get_mut(i))
                .ok_or_else(missing)?,
            _ => return Err(missing()),
        };
    }
    match node {
        Value::Object(map) => {
            map.insert((*leaf).to_string(), new);
        }
        Value::Array(items) => {
            let slot = leaf
                .parse::<usize>()
                .ok()
                .and_then(|i| items.get_mut(i))
                .ok_or_else(missing)?;
            *slot = new;
        }
        _ => return Err(missing()),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn flat() -> Value {
        json!({
            "kinetics": {"type": "arrhenius", "a": 1.0, "b": 1.0},
            "rate": {"type": "constant", "value": 1.0},
            "grid": {"nx": 512, "ny": 64, "l": 40.0}
        })
    }

    #[test]
    fn defaults_fill_optional_sections() {
        let cfg = ConfigFile::from_value(flat()).unwrap();
        assert_eq!(cfg.solver, SolverSection::default());
        assert!(cfg.diagnostics.enabled);
        let sc = cfg.solver_config().unwrap();
        assert_eq!(sc.grid.length, GridLength::Fixed(40.0));
        assert_eq!(ConfigFile::from_value(cfg.to_value()).unwrap(), cfg);
    }

    #[test]
    fn errors_name_the_field() {
        let mut v = flat();
        v["grid"]["nx"] = json!("many");
        let msg = ConfigFile::from_value(v).unwrap_err().to_string();
        assert!(msg.contains("grid.nx"), "{msg}");

        let mut v = flat();
        v["solver"] = json!({"damping": 0.0});
        let msg = ConfigFile::from_value(v)
            .unwrap()
            .solver_config()
            .unwrap_err()
            .to_string();
        assert!(msg.contains("solver.damping"), "{msg}");

        let mut v = flat();
        v["grid"]["l"] = json!("deep");
        let msg = ConfigFile::from_value(v)
            .unwrap()
            .solver_config()
            .unwrap_err()
            .to_string();
        assert!(msg.contains("grid.l"), "{msg}");

        let mut v = flat();
        v["kinetics"]["b"] = json!(-1.0);
        let msg = ConfigFile::from_value(v)
            .unwrap()
            .solver_config()
            .unwrap_err()
            .to_string();
        assert!(msg.contains("kinetics.b"), "{msg}");
    }

    #[test]
    fn auto_length_and_other_laws() {
        let mut v = flat();
        v["grid"]["l"] = json!("auto");
        v["kinetics"] = json!({"type": "tabulated", "points": [[0.0, 0.0], [1.0, 1.0]]});
        v["rate"] = json!({"type": "smooth", "mean": 1.0, "cos": [0.3]});
        let cfg = ConfigFile::from_value(v).unwrap();
        assert_eq!(cfg.length().unwrap(), GridLength::Auto);
        cfg.solver_config().unwrap();
    }

    #[test]
    fn dotted_paths() {
        let mut v = flat();
        set_path(&mut v, "kinetics.b", json!(2.0)).unwrap();
        assert_eq!(v["kinetics"]["b"], json!(2.0));
        v["rate"] =
            json!({"type": "piecewise_constant", "edges": [0.0, 0.5], "values": [0.5, 1.5]});
        set_path(&mut v, "rate.values.1", json!(3.0)).unwrap();
        assert_eq!(v["rate"]["values"], json!([0.5, 3.0]));
        assert!(set_path(&mut v, "nothing.here", json!(1)).is_err());
        assert!(set_path(&mut v, "rate.values.7", json!(1)).is_err());
        assert!(set_path(&mut v, "", json!(1)).is_err());
    }
}
