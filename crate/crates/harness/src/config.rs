use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use paetex::flow::{default_lambda_grid, FlowConfig};
use paetex::phantom::{DeformationSpec, PhantomSpec};
use paetex::{BandSpec, Grid, SensorGeometry, SolverConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Table captions of the reference experiments use these two values.
pub const HEADLINE_LAMBDAS: [f64; 2] = [12.5893, 11.2202];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    #[serde(default = "one")]
    pub dx: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    #[serde(default)]
    pub center: [f64; 2],
    pub radius: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedDeformation {
    pub name: String,
    pub deformation: DeformationSpec,
}

/// Texture-generating method for one column of the error tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum TextureMode {
    None {
        #[serde(default)]
        label: Option<String>,
    },
    Gauss {
        alpha: f64,
        /// Falls back to the experiment seed.
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        label: Option<String>,
    },
    /// Band edges in units of the reference length.
    Band {
        kappa_min: f64,
        kappa_max: f64,
        #[serde(default)]
        label: Option<String>,
    },
}

impl TextureMode {
    pub fn label(&self) -> String {
        match self {
            Self::None { label } => label.clone().unwrap_or_else(|| "none".into()),
            Self::Gauss { alpha, label, .. } => label.clone().unwrap_or_else(|| format!("gauss {alpha}")),
            Self::Band { kappa_min, label, .. } => {
                label.clone().unwrap_or_else(|| format!("band {kappa_min}"))
            }
        }
    }

    /// Band in grid units, `κ / reference_length`.
    pub fn band(&self, reference_length: f64) -> Option<BandSpec> {
        match self {
            Self::Band {
                kappa_min,
                kappa_max,
                ..
            } => Some(BandSpec {
                kappa_min: kappa_min / reference_length,
                kappa_max: kappa_max / reference_length,
            }),
            _ => None,
        }
    }

    pub fn uses_acoustics(&self) -> bool {
        !matches!(self, Self::Gauss { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub sensors: SensorConfig,
    pub phantom: PhantomSpec,
    pub deformations: Vec<NamedDeformation>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub modes: Vec<TextureMode>,
    /// Length mapped to 1 when interpreting band edges; the sensor radius by default.
    #[serde(default)]
    pub reference_length: Option<f64>,
    /// Regularization weights; the 21-point default grid when absent.
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    /// Extra weights always evaluated and reported as headline rows.
    #[serde(default = "default_headlines")]
    pub headline_lambdas: Vec<f64>,
    #[serde(default)]
    pub flow: FlowConfig,
    /// Each image pair is rescaled so that `max |f1|` equals this value before
    /// the flow is computed. For the gauss mode the phantom is rescaled and the
    /// noise is added afterwards.
    #[serde(default = "default_intensity_scale")]
    pub intensity_scale: Option<f64>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_headlines() -> Vec<f64> {
    HEADLINE_LAMBDAS.to_vec()
}

fn default_intensity_scale() -> Option<f64> {
    Some(255.0)
}

impl ExperimentConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        // A run manifest carries the resolved configuration under "config".
        let value = match value {
            serde_json::Value::Object(mut map) if map.contains_key("config") && map.contains_key("manifest_version") => {
                map.remove("config").expect("checked")
            }
            v => v,
        };
        let cfg: Self = serde_json::from_value(value).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Grid::centered(self.grid.width, self.grid.height, self.grid.dx)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn geometry(&self) -> Result<SensorGeometry, ConfigError> {
        SensorGeometry::new(self.sensors.center, self.sensors.radius, self.sensors.count)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn reference_length(&self) -> f64 {
        self.reference_length.unwrap_or(self.sensors.radius)
    }

    /// Sorted weights to evaluate: the configured grid plus the headline values.
    pub fn lambda_grid(&self) -> Vec<f64> {
        let mut out = self.lambdas.clone().unwrap_or_else(default_lambda_grid);
        for &h in &self.headline_lambdas {
            if !out.iter().any(|l| ((l - h) / h).abs() < 1e-3) {
                out.push(h);
            }
        }
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }

    pub fn gauss_seed(&self, mode: &TextureMode) -> u64 {
        match mode {
            TextureMode::Gauss { seed, .. } => seed.unwrap_or(self.seed),
            _ => self.seed,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = self.grid()?;
        let geom = self.geometry()?;
        self.solver
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.flow
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.modes.is_empty() {
            return invalid("at least one texture mode is required");
        }
        if self.deformations.is_empty() {
            return invalid("at least one deformation is required");
        }
        let mut seen = HashSet::new();
        for m in &self.modes {
            let label = m.label();
            if !seen.insert(label.clone()) {
                return invalid(format!("duplicate texture mode label {label:?}"));
            }
            if !label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, ' ' | '.' | '_' | '-'))
            {
                return invalid(format!("mode label {label:?} has characters unusable in file names"));
            }
            match m {
                TextureMode::Gauss { alpha, .. } if !(*alpha >= 0.0 && alpha.is_finite()) => {
                    return invalid(format!("gauss alpha must be nonnegative, got {alpha}"));
                }
                TextureMode::Band { .. } => {
                    let band = m.band(self.reference_length()).expect("band mode");
                    band.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
                }
                _ => {}
            }
        }
        let mut names = HashSet::new();
        for d in &self.deformations {
            if d.name.is_empty()
                || !d
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-'))
            {
                return invalid(format!("deformation name {:?} must be a nonempty [A-Za-z0-9_-] word", d.name));
            }
            if !names.insert(d.name.clone()) {
                return invalid(format!("duplicate deformation name {:?}", d.name));
            }
            paetex::make_displacement(&d.deformation, &grid)
                .map_err(|e| ConfigError::Invalid(format!("deformation {}: {e}", d.name)))?;
        }
        if !(self.reference_length() > 0.0 && self.reference_length().is_finite()) {
            return invalid("reference length must be positive");
        }
        if let Some(s) = self.intensity_scale {
            if !(s > 0.0 && s.is_finite()) {
                return invalid(format!("intensity scale must be positive, got {s}"));
            }
        }
        let lambdas = self.lambda_grid();
        if lambdas.is_empty() {
            return invalid("lambda grid is empty");
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return invalid(format!("lambda values must be positive, got {l}"));
        }
        paetex::make_phantom::<f64>(&self.phantom, &grid, &geom)
            .map_err(|e| ConfigError::Invalid(format!("phantom: {e}")))?;
        Ok(())
    }
}
