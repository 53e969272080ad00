//! JSON experiment configurations. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use bilayer_core::curve_kit::shapes::{CurveShape, FourierMode};
use bilayer_core::curve_kit::{read_curve_csv, resample_arclength, ClosedCurve};
use serde::Deserialize;

use crate::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 8192;
pub const DEFAULT_CAPACITY: usize = 60_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Convergence,
    GridValidation,
    Scaling,
    RingSweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::GridValidation => "grid-validation",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::RingSweep => "ring-sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Convergence(ConvergenceConfig),
    GridValidation(GridConfig),
    Scaling(ScalingConfig),
    RingSweep(RingSweepConfig),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub curve: CurveSpec,
    pub epsilons: Vec<f64>,
    /// Equal-chord samples of the center curve.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
    pub radius: f64,
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub rings: Vec<RingSpec>,
    pub spacings: Vec<f64>,
    /// Largest number of atoms per side handed to the transport solver.
    #[serde(default = "default_capacity")]
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSweepConfig {
    pub radii: Vec<f64>,
    pub thicknesses: Vec<f64>,
}

/// A center curve: an analytic shape or a CSV file of `x,y` samples.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveSpec {
    Circle {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    RoundedRectangle {
        width: f64,
        height: f64,
        corner: f64,
    },
    Fourier {
        radius: f64,
        modes: Vec<FourierMode>,
    },
    /// Relative paths are resolved against the directory of the config file.
    File {
        path: PathBuf,
    },
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_capacity() -> usize {
    DEFAULT_CAPACITY
}

fn require(ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(message()))
    }
}

fn positive_list(name: &str, values: &[f64]) -> Result<()> {
    require(!values.is_empty(), || format!("`{name}` must not be empty"))?;
    for &v in values {
        require(v > 0.0 && v.is_finite(), || {
            format!("`{name}` entries must be positive and finite, got {v}")
        })?;
    }
    Ok(())
}

impl CurveSpec {
    fn shape(&self) -> Option<CurveShape> {
        Some(match self {
            CurveSpec::Circle { radius } => CurveShape::Circle { radius: *radius },
            CurveSpec::Ellipse { a, b } => CurveShape::Ellipse { a: *a, b: *b },
            CurveSpec::RoundedRectangle { width, height, corner } => CurveShape::RoundedRectangle {
                width: *width,
                height: *height,
                corner: *corner,
            },
            CurveSpec::Fourier { radius, modes } => CurveShape::Fourier {
                radius: *radius,
                modes: modes.clone(),
            },
            CurveSpec::File { .. } => return None,
        })
    }

    /// Samples the curve with `samples` equal chords.
    pub fn build(&self, samples: usize, base: &Path) -> Result<ClosedCurve> {
        match (self.shape(), self) {
            (Some(shape), _) => Ok(shape.sample(samples)?),
            (None, CurveSpec::File { path }) => {
                let path = if path.is_absolute() {
                    path.clone()
                } else {
                    base.join(path)
                };
                let raw = read_curve_csv(&path)?;
                Ok(resample_arclength(&raw, samples)?)
            }
            (None, _) => unreachable!("only file specs lack an analytic shape"),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(shape) = self.shape() {
            shape.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentConfig::Convergence(_) => ExperimentKind::Convergence,
            ExperimentConfig::GridValidation(_) => ExperimentKind::GridValidation,
            ExperimentConfig::Scaling(_) => ExperimentKind::Scaling,
            ExperimentConfig::RingSweep(_) => ExperimentKind::RingSweep,
        }
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|source| Error::ParseConfig {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    /// Checks list lengths and value ranges; admissibility is judged per row.
    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::Convergence(c) => {
                c.curve.validate()?;
                positive_list("epsilons", &c.epsilons)?;
                require(c.samples >= bilayer_core::curve_kit::MIN_SAMPLES, || {
                    format!("`samples` must be at least {}", bilayer_core::curve_kit::MIN_SAMPLES)
                })
            }
            ExperimentConfig::GridValidation(c) => {
                require(!c.rings.is_empty(), || "`rings` must not be empty".into())?;
                let radii: Vec<f64> = c.rings.iter().map(|r| r.radius).collect();
                let thicknesses: Vec<f64> = c.rings.iter().map(|r| r.thickness).collect();
                positive_list("rings[].radius", &radii)?;
                positive_list("rings[].thickness", &thicknesses)?;
                positive_list("spacings", &c.spacings)?;
                require(c.capacity > 0, || "`capacity` must be positive".into())
            }
            ExperimentConfig::Scaling(c) => positive_list("masses", &c.masses),
            ExperimentConfig::RingSweep(c) => {
                positive_list("radii", &c.radii)?;
                positive_list("thicknesses", &c.thicknesses)
            }
        }
    }
}
