//! Run configuration in TOML. Unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GchError, Result};
use crate::euler::TimeControls;
use crate::model::{make_initial_data, normalize_momentum, FieldPair, InitialDataSpec};
use crate::spectral::{BesovMeter, GridSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub grid: GridSection,
    pub time: TimeSection,
    #[serde(default)]
    pub besov: BesovSection,
    pub initial_data: InitialDataSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_length: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_cap: f64,
    #[serde(default = "default_every")]
    pub output_every: usize,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_theta")]
    pub existence_theta: f64,
}

fn default_cfl() -> f64 {
    TimeControls::DEFAULT_CFL
}
fn default_every() -> usize {
    1
}
fn default_safety() -> f64 {
    TimeControls::DEFAULT_SAFETY
}
fn default_theta() -> f64 {
    TimeControls::DEFAULT_THETA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovSection {
    pub p: f64,
}

impl Default for BesovSection {
    fn default() -> Self {
        Self { p: 2.0 }
    }
}

/// Flat form of [`InitialDataSpec`] plus an optional normalization.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataSection {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_block: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// Rescale so that `|m0|_{B^{1/p}_{p,1}}` equals this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub besov_target: Option<f64>,
}

/// Knobs of the individual experiments; all optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<i32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinements: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_sequence: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steep_amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steep_t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_particles: Option<usize>,
}

/// Largest seed a config can carry.
pub const MAX_SEED: u64 = i64::MAX as u64;

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| GchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GchError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            GchError::Config(msg) => GchError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML echo.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        // TOML integers are signed 64-bit
        let seeds = self.experiment.seeds.iter().flatten();
        if let Some(s) = std::iter::once(&self.run.seed).chain(seeds).find(|&&s| s > MAX_SEED) {
            return Err(GchError::Config(format!("seed {s} exceeds {MAX_SEED}")));
        }
        let grid = self.grid_spec()?;
        self.time_controls().validate()?;
        if !(self.besov.p >= 1.0 && self.besov.p.is_finite()) {
            return Err(GchError::Config(format!(
                "besov.p = {} must be a finite value >= 1",
                self.besov.p
            )));
        }
        let spec = self.initial_data_spec()?;
        spec.validate(&grid)?;
        if let Some(t) = self.initial_data.besov_target {
            if !(t.is_finite() && t >= 0.0) {
                return Err(GchError::Config(format!("initial_data.besov_target = {t}")));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.half_length, self.grid.n_points)
    }

    pub fn time_controls(&self) -> TimeControls {
        let t = &self.time;
        let mut c = TimeControls::new(t.dt, t.t_end)
            .with_cfl_cap(t.cfl_cap)
            .with_output_every(t.output_every)
            .with_safety(t.safety);
        c.existence_theta = t.existence_theta;
        if let Some(floor) = self.experiment.jacobian_floor {
            c = c.with_jacobian_floor((floor > 0.0).then_some(floor));
        }
        c
    }

    pub fn meter(&self) -> Result<BesovMeter> {
        BesovMeter::critical(self.grid_spec()?, self.besov.p)
    }

    pub fn initial_data_spec(&self) -> Result<InitialDataSpec> {
        let d = &self.initial_data;
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| {
                GchError::Config(format!(
                    "initial_data.{name} is required for kind = \"{}\"",
                    d.kind
                ))
            })
        };
        let unused = |names: &[(&str, bool)]| -> Result<()> {
            for (name, present) in names {
                if *present {
                    return Err(GchError::Config(format!(
                        "initial_data.{name} does not apply to kind = \"{}\"",
                        d.kind
                    )));
                }
            }
            Ok(())
        };
        Ok(match d.kind.as_str() {
            "gaussian" => {
                unused(&[
                    ("smoothing", d.smoothing.is_some()),
                    ("max_block", d.max_block.is_some()),
                    ("value", d.value.is_some()),
                ])?;
                InitialDataSpec::Gaussian {
                    amplitude: need("amplitude", d.amplitude)?,
                    width: need("width", d.width)?,
                    center: d.center.unwrap_or(0.0),
                }
            }
            "smoothed_peakon" => {
                unused(&[
                    ("width", d.width.is_some()),
                    ("max_block", d.max_block.is_some()),
                    ("value", d.value.is_some()),
                ])?;
                InitialDataSpec::SmoothedPeakon {
                    amplitude: need("amplitude", d.amplitude)?,
                    smoothing: d.smoothing,
                    center: d.center.unwrap_or(0.0),
                }
            }
            "band_limited_random" => {
                unused(&[
                    ("width", d.width.is_some()),
                    ("smoothing", d.smoothing.is_some()),
                    ("center", d.center.is_some()),
                    ("value", d.value.is_some()),
                ])?;
                InitialDataSpec::BandLimitedRandom {
                    seed: self.run.seed,
                    max_block: d.max_block.ok_or_else(|| {
                        GchError::Config(
                            "initial_data.max_block is required for kind = \"band_limited_random\""
                                .into(),
                        )
                    })?,
                    amplitude: need("amplitude", d.amplitude)?,
                }
            }
            "constant" => {
                unused(&[
                    ("amplitude", d.amplitude.is_some()),
                    ("width", d.width.is_some()),
                    ("smoothing", d.smoothing.is_some()),
                    ("center", d.center.is_some()),
                    ("max_block", d.max_block.is_some()),
                ])?;
                InitialDataSpec::Constant {
                    value: need("value", d.value)?,
                }
            }
            other => {
                return Err(GchError::Config(format!(
                    "initial_data.kind = \"{other}\"; expected gaussian, smoothed_peakon, \
                     band_limited_random or constant"
                )))
            }
        })
    }

    /// Initial fields, normalized when `besov_target` is set.
    pub fn initial_fields(&self) -> Result<FieldPair> {
        self.initial_fields_with_seed(self.run.seed)
    }

    pub fn initial_fields_with_seed(&self, seed: u64) -> Result<FieldPair> {
        let mut spec = self.initial_data_spec()?;
        if let InitialDataSpec::BandLimitedRandom { seed: s, .. } = &mut spec {
            *s = seed;
        }
        let pair = make_initial_data(&spec, self.grid_spec()?)?;
        match self.initial_data.besov_target {
            Some(target) => normalize_momentum(&pair, target, &self.meter()?),
            None => Ok(pair),
        }
    }

    /// Copy with a different grid size, for refinement studies.
    pub fn with_points(&self, n_points: usize) -> Self {
        let mut c = self.clone();
        c.grid.n_points = n_points;
        c
    }
}
