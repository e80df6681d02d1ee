//! Run configuration documents.
//!
//! A config file is either a full run document
//!
//! ```json
//! {"model": "models/cev.json", "scheme": {"scheme": "taylor", "center": "spot"},
//!  "order": 3, "x": 0.0, "maturity": 0.5, "grid": {"strikes": [0.9, 1.0, 1.1]}}
//! ```
//!
//! or a bare model document (`{"kind": "flat", "sigma": 0.2}`), which runs
//! with every other setting at its default.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use levyx_core::expansion::{
    expand_hermite, expand_taylor, expand_time_taylor, order_zero_mean_trajectory, CoefficientSeries,
};
use levyx_core::model::config::ModelDocument;
use levyx_core::model::ModelSpec;
use levyx_core::pricer::QuadSettings;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Inline model document or a path to one, relative to the config file.
    pub model: Value,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub x: f64,
    #[serde(default = "default_maturity")]
    pub maturity: f64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub quadrature: QuadSettings,
    #[serde(default)]
    pub monte_carlo: McConfig,
    pub output: Option<PathBuf>,
}

fn default_order() -> usize {
    2
}

fn default_maturity() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeConfig {
    Taylor {
        #[serde(default)]
        center: Center,
    },
    TimeTaylor,
    Hermite {
        #[serde(default)]
        center: Center,
        #[serde(default = "default_weight_std")]
        weight_std: f64,
    },
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig::Taylor {
            center: Center::default(),
        }
    }
}

fn default_weight_std() -> f64 {
    1.0
}

/// Expansion point: `"spot"` (the starting log-price) or a number.
#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(untagged)]
pub enum Center {
    #[default]
    #[serde(deserialize_with = "spot")]
    Spot,
    At(f64),
}

fn spot<'de, D: serde::Deserializer<'de>>(d: D) -> Result<(), D::Error> {
    let name = String::deserialize(d)?;
    if name == "spot" {
        Ok(())
    } else {
        Err(serde::de::Error::custom(format!("unknown center {name:?}")))
    }
}

impl Center {
    fn resolve(self, x: f64) -> f64 {
        match self {
            Center::Spot => x,
            Center::At(v) => v,
        }
    }
}

impl SchemeConfig {
    pub fn describe(&self, x: f64) -> String {
        match self {
            SchemeConfig::Taylor { center } => format!("taylor center={}", center.resolve(x)),
            SchemeConfig::TimeTaylor => "time_taylor trajectory=order0_mean".into(),
            SchemeConfig::Hermite { center, weight_std } => {
                format!("hermite center={} weight_std={weight_std}", center.resolve(x))
            }
        }
    }

    pub fn expand(&self, model: &ModelSpec, t: f64, x: f64, order: usize) -> levyx_core::Result<CoefficientSeries> {
        match self {
            SchemeConfig::Taylor { center } => expand_taylor(model, center.resolve(x), order),
            SchemeConfig::TimeTaylor => expand_time_taylor(model, order_zero_mean_trajectory(model, t, x)?, order),
            SchemeConfig::Hermite { center, weight_std } => {
                expand_hermite(model, center.resolve(x), *weight_std, order)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub strikes: Option<Vec<f64>>,
    pub maturities: Option<Vec<f64>>,
    pub y_from: Option<f64>,
    pub y_to: Option<f64>,
    pub y_points: Option<usize>,
    /// Rate study maturities run over `2^-first .. 2^-last`.
    pub rate_first_level: Option<u32>,
    pub rate_last_level: Option<u32>,
    pub reference_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub lambda_max: Option<f64>,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        let d = levyx_core::monte_carlo::SimConfig::default();
        Self {
            paths: d.paths,
            steps_per_year: d.steps_per_year,
            seed: d.seed,
            lambda_max: d.lambda_max,
            antithetic: d.antithetic,
        }
    }
}

/// A loaded config with its model resolved.
pub struct Loaded {
    pub run: RunConfig,
    pub document: ModelDocument,
    pub model: ModelSpec,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    from_value(value, base)
}

pub fn from_value(value: Value, base: &Path) -> Result<Loaded, CliError> {
    let value = if value.get("kind").is_some() {
        serde_json::json!({ "model": value })
    } else {
        value
    };
    let run: RunConfig = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
    let model_value = match &run.model {
        Value::String(rel) => {
            let p = base.join(rel);
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        v => v.clone(),
    };
    let document = ModelDocument::from_value(model_value).map_err(|e| CliError::Config(e.to_string()))?;
    let model = document.build().map_err(|e| CliError::Config(e.to_string()))?;
    if run.maturity <= run.t {
        return Err(CliError::Config(format!(
            "maturity {} must exceed t = {}",
            run.maturity, run.t
        )));
    }
    Ok(Loaded { run, document, model })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_model_gets_defaults() {
        let l = from_value(serde_json::json!({"kind": "flat", "sigma": 0.2}), Path::new(".")).unwrap();
        assert_eq!(l.run.order, 2);
        assert_eq!(l.run.scheme, SchemeConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let v = serde_json::json!({"model": {"kind": "flat", "sigma": 0.2}, "ordr": 3});
        assert!(matches!(from_value(v, Path::new(".")), Err(CliError::Config(_))));
        let v = serde_json::json!({"model": {"kind": "flat", "sigma": 0.2}, "grid": {"strike": [1.0]}});
        assert!(from_value(v, Path::new(".")).is_err());
    }

    #[test]
    fn centers_parse() {
        let s: SchemeConfig = serde_json::from_str(r#"{"scheme":"taylor","center":"spot"}"#).unwrap();
        assert_eq!(s, SchemeConfig::Taylor { center: Center::Spot });
        let s: SchemeConfig = serde_json::from_str(r#"{"scheme":"hermite","center":0.1}"#).unwrap();
        assert_eq!(
            s,
            SchemeConfig::Hermite {
                center: Center::At(0.1),
                weight_std: 1.0
            }
        );
        assert!(serde_json::from_str::<SchemeConfig>(r#"{"scheme":"taylor","center":"terminal"}"#).is_err());
    }

    #[test]
    fn shipped_configs_load() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut n = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "json") {
                load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                n += 1;
            }
        }
        assert!(n >= 5);
    }
}
