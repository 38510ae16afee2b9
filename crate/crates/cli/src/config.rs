//! JSON run configuration.
//!
//! ```json
//! {
//!   "alpha": 1.5, "nu": 1.0, "T": 1.0, "K": 8,
//!   "spectrum": { "kind": "dirichlet_1d", "L": 3.141592653589793 },
//!   "phi": { "coefficients": { "1": 1.0, "3": 0.25 } },
//!   "output": { "dir": "out", "prefix": "run" },
//!   "grids": { "time_points": 101 },
//!   "seed": 7
//! }
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fracb_core::fractional_calculus::CaputoMesh;
use fracb_core::solver::ProblemSpec;
use fracb_core::spectral::{
    coefficients_from_json, sampled_from_csv_path, ExpandControls, PhiData, SampledData,
    SpectrumModel,
};
use fracb_core::verification::{default_alpha_grid, default_t_grid, log_grid};
use serde::Deserialize;

use crate::Failure;

fn default_tol() -> f64 {
    1e-4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub nu: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "K")]
    pub modes: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub spectrum: SpectrumModel,
    pub phi: PhiSource,
    #[serde(default)]
    pub expand: ExpandControls,
    #[serde(default)]
    pub strict_regularity: bool,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub fault: Option<FaultConfig>,
}

/// Where `φ` comes from.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSource {
    /// Inline coefficients keyed by 1-based mode index.
    Coefficients(BTreeMap<usize, f64>),
    /// JSON file mapping mode index to coefficient.
    CoefficientsFile(PathBuf),
    /// CSV file of samples, `x,value` or `x,y,value`.
    SamplesCsv(PathBuf),
    /// Inline samples on a tensor grid.
    Samples(SampledData),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; defaults to the config file's directory.
    pub dir: Option<PathBuf>,
    /// File name prefix; defaults to the config file's stem.
    pub prefix: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Uniform times over `[0, T]` in the series CSV (default 101).
    pub time_points: Option<usize>,
    /// Interior times as fractions of T (default 0.1, …, 0.9).
    pub interior: Option<Vec<f64>>,
    /// α values of the bound sweep.
    pub alpha: Option<Vec<f64>>,
    /// Time grid of the bound sweep and of C₀.
    pub t_log: Option<LogGridConfig>,
    /// Spatial points for pointwise checks.
    pub x: Option<Vec<Vec<f64>>>,
    pub caputo: Option<CaputoMesh>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultConfig {
    /// Multiplies every `b_k` before verification.
    pub scale_b: f64,
}

/// A validated configuration with resolved paths and data.
pub struct Loaded {
    pub spec: ProblemSpec,
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub prefix: String,
    pub time_points: usize,
    pub interior: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
}

impl Loaded {
    pub fn output(&self, suffix: &str) -> PathBuf {
        self.out_dir.join(format!("{}.{suffix}", self.prefix))
    }
}

fn config_error(msg: impl std::fmt::Display) -> Failure {
    Failure::Config(msg.to_string())
}

pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        config_error(format!("{}: {at}: {}", path.display(), e.inner()))
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = |p: &Path| {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };

    let phi = match &config.phi {
        PhiSource::Coefficients(map) => PhiData::Coefficients(map.clone()),
        PhiSource::CoefficientsFile(p) => {
            let p = resolve(p);
            let text = std::fs::read_to_string(&p).map_err(|e| {
                config_error(format!("phi.coefficients_file: {}: {e}", p.display()))
            })?;
            PhiData::Coefficients(
                coefficients_from_json(&text)
                    .map_err(|e| config_error(format!("phi.coefficients_file: {e}")))?,
            )
        }
        PhiSource::SamplesCsv(p) => {
            let dim = config.spectrum.dimension().ok_or_else(|| {
                config_error("phi.samples_csv: sampled data needs a spatial spectrum model")
            })?;
            PhiData::Sampled(
                sampled_from_csv_path(&resolve(p), dim)
                    .map_err(|e| config_error(format!("phi.samples_csv: {e}")))?,
            )
        }
        PhiSource::Samples(d) => PhiData::Sampled(d.clone()),
    };
    let spec = ProblemSpec {
        alpha: config.alpha,
        nu: config.nu,
        horizon: config.horizon,
        spectrum: config.spectrum.clone(),
        phi,
        modes: config.modes,
        tol: config.tol,
        expand: config.expand,
        strict_regularity: config.strict_regularity,
    };
    spec.validate().map_err(config_error)?;

    let out_dir = match &config.output.dir {
        Some(d) => resolve(d),
        None => base.clone(),
    };
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| config_error(format!("output.dir: {}: {e}", out_dir.display())))?;
    let prefix = match &config.output.prefix {
        Some(p) if !p.is_empty() && !p.contains(['/', '\\']) => p.clone(),
        Some(p) => {
            return Err(config_error(format!(
                "output.prefix: {p:?} is not a plain file name"
            )))
        }
        None => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into()),
    };

    let g = &config.grids;
    let time_points = g.time_points.unwrap_or(101);
    if time_points < 2 {
        return Err(config_error("grids.time_points: need at least 2 points"));
    }
    let interior = match &g.interior {
        Some(f) => {
            if f.is_empty() || f.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                return Err(config_error(
                    "grids.interior: fractions of T must lie strictly inside (0, 1)",
                ));
            }
            f.iter().map(|v| v * config.horizon).collect()
        }
        None => fracb_core::verification::interior_grid(config.horizon),
    };
    let alpha_grid = match &g.alpha {
        Some(a) => {
            if a.is_empty() || a.iter().any(|v| !(*v > 1.0 && *v < 2.0)) {
                return Err(config_error(
                    "grids.alpha: values must lie strictly inside (1, 2)",
                ));
            }
            a.clone()
        }
        None => default_alpha_grid(),
    };
    let t_grid = match &g.t_log {
        Some(l) => {
            if !(l.min > 0.0 && l.max > l.min && l.points >= 2) {
                return Err(config_error(
                    "grids.t_log: need 0 < min < max and at least 2 points",
                ));
            }
            log_grid(l.min, l.max, l.points)
        }
        None => default_t_grid(),
    };
    if let Some(f) = &config.fault {
        if !f.scale_b.is_finite() {
            return Err(config_error("fault.scale_b: must be finite"));
        }
    }
    Ok(Loaded {
        spec,
        config,
        out_dir,
        prefix,
        time_points,
        interior,
        alpha_grid,
        t_grid,
    })
}
