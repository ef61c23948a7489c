//! Scenario configuration: one JSON document, every field optional.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use tcd_core::channels::{EnvironmentModel, IntensityMixture, PartialWhichPath, ScatterModel};
use tcd_core::geometry::{AmplitudeMode, Geometry, ScreenGrid};
use tcd_core::montecarlo::{SampleConfig, DEFAULT_BLOCK_SIZE, DEFAULT_SAMPLING_POINTS};
use tcd_core::observables::VisibilityMethod;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub screen_distance: f64,
    pub slit_separation: f64,
    pub wavelength: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { screen_distance: 1.0, slit_separation: 5e-4, wavelength: 650e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub y_min: f64,
    pub y_max: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { y_min: -2e-3, y_max: 2e-3, points: 201 }
    }
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AmplitudeSpec {
    Real(f64),
    Complex([f64; 2]),
}

impl AmplitudeSpec {
    pub fn value(self) -> Complex64 {
        match self {
            AmplitudeSpec::Real(re) => Complex64::new(re, 0.0),
            AmplitudeSpec::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScatterSpec {
    Full,
    Partial { n: AmplitudeSpec, m: AmplitudeSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    #[default]
    Isolated,
    Full,
    Partial { n: AmplitudeSpec, m: AmplitudeSpec },
    Mixed { w1: f64, inner: ScatterSpec },
    TwoSided { p_a: f64, p_b: f64, inner: ScatterSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Isolated,
    Full,
    SmallWavelength,
    LargeWavelength,
    Mixed,
}

impl Preset {
    pub fn environment(self) -> EnvironmentSpec {
        let half = AmplitudeSpec::Real(0.5);
        match self {
            Preset::Isolated => EnvironmentSpec::Isolated,
            Preset::Full => EnvironmentSpec::Full,
            Preset::SmallWavelength => EnvironmentSpec::Partial {
                n: AmplitudeSpec::Real(std::f64::consts::FRAC_1_SQRT_2),
                m: AmplitudeSpec::Real(0.0),
            },
            Preset::LargeWavelength => EnvironmentSpec::Partial { n: half, m: half },
            Preset::Mixed => EnvironmentSpec::Mixed { w1: 0.5, inner: ScatterSpec::Full },
        }
    }
}

fn partial(n: AmplitudeSpec, m: AmplitudeSpec, field: &str) -> Result<PartialWhichPath<f64>, CliError> {
    PartialWhichPath::new(n.value(), m.value()).map_err(|e| CliError::config(field, e))
}

impl ScatterSpec {
    pub fn build(&self, field: &str) -> Result<ScatterModel<f64>, CliError> {
        Ok(match *self {
            ScatterSpec::Full => ScatterModel::Full,
            ScatterSpec::Partial { n, m } => ScatterModel::Partial(partial(n, m, field)?),
        })
    }

    pub fn from_model(model: &ScatterModel<f64>) -> Self {
        match model {
            ScatterModel::Full => ScatterSpec::Full,
            ScatterModel::Partial(p) => ScatterSpec::Partial {
                n: AmplitudeSpec::Complex([p.n().re, p.n().im]),
                m: AmplitudeSpec::Complex([p.m().re, p.m().im]),
            },
        }
    }
}

impl EnvironmentSpec {
    pub fn build(&self) -> Result<EnvironmentModel<f64>, CliError> {
        Ok(match *self {
            EnvironmentSpec::Isolated => EnvironmentModel::Isolated,
            EnvironmentSpec::Full => EnvironmentModel::Full,
            EnvironmentSpec::Partial { n, m } => EnvironmentModel::Partial(partial(n, m, "environment")?),
            EnvironmentSpec::Mixed { w1, inner } => EnvironmentModel::Mixed(
                IntensityMixture::new(w1, inner.build("environment.inner")?)
                    .map_err(|e| CliError::config("environment.w1", e))?,
            ),
            EnvironmentSpec::TwoSided { p_a, p_b, inner } => {
                EnvironmentModel::two_sided(p_a, p_b, inner.build("environment.inner")?)
                    .map_err(|e| CliError::config("environment", e))?
            }
        })
    }

    /// What a scatter does in this environment, for sweeps over scattering probability.
    pub fn scatter(&self) -> ScatterSpec {
        match *self {
            EnvironmentSpec::Partial { n, m } => ScatterSpec::Partial { n, m },
            EnvironmentSpec::Mixed { inner, .. } | EnvironmentSpec::TwoSided { inner, .. } => inner,
            EnvironmentSpec::Isolated | EnvironmentSpec::Full => ScatterSpec::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodSpec {
    Minmax,
    #[default]
    Fourier,
}

impl From<MethodSpec> for VisibilityMethod {
    fn from(m: MethodSpec) -> Self {
        match m {
            MethodSpec::Minmax => VisibilityMethod::MinMax,
            MethodSpec::Fourier => VisibilityMethod::Fourier,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub samples: u64,
    pub seed: u64,
    pub bins: usize,
    /// Defaults to the full reachable range `±(y_max − y_min)`.
    pub delta_y_range: Option<[f64; 2]>,
    pub grid_points: usize,
    pub workers: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 1, bins: 64, delta_y_range: None, grid_points: DEFAULT_SAMPLING_POINTS, workers: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
    /// Also write a matplotlib script next to the CSV files.
    pub plot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("tcd-out"), format: Format::Csv, plot: false }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub grid: GridConfig,
    pub mode: AmplitudeMode,
    pub environment: EnvironmentSpec,
    pub visibility_method: MethodSpec,
    pub montecarlo: Option<MonteCarloConfig>,
    pub output: OutputConfig,
}

/// Validated numeric objects built from a [`ScenarioConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub geometry: Geometry<f64>,
    pub grid: ScreenGrid<f64>,
    pub model: EnvironmentModel<f64>,
    pub montecarlo: Option<(ScreenGrid<f64>, SampleConfig<f64>)>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let gc = &self.geometry;
        let geometry = Geometry::from_wavelength(gc.slit_separation, gc.screen_distance, gc.wavelength)
            .map_err(|e| CliError::config("geometry", e))?;
        let grid = ScreenGrid::new(self.grid.y_min, self.grid.y_max, self.grid.points)
            .map_err(|e| CliError::config("grid", e))?;
        let model = self.environment.build()?;
        let montecarlo = match &self.montecarlo {
            None => None,
            Some(mc) => {
                let sampling = ScreenGrid::new(grid.y_min(), grid.y_max(), mc.grid_points)
                    .map_err(|e| CliError::config("montecarlo.grid_points", e))?;
                let cfg = match mc.delta_y_range {
                    Some([lo, hi]) => SampleConfig::new(mc.samples, mc.seed, mc.bins, (lo, hi)),
                    None => SampleConfig::spanning(&sampling, mc.samples, mc.seed, mc.bins),
                }
                .map_err(|e| CliError::config("montecarlo", e))?;
                let cfg = SampleConfig { block_size: DEFAULT_BLOCK_SIZE, ..cfg.with_workers(mc.workers) };
                Some((sampling, cfg))
            }
        };
        Ok(Resolved { geometry, grid, model, montecarlo })
    }
}
