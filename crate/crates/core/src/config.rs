//! Run configuration (one JSON document in, strictly validated) and the
//! run manifest written next to every experiment's outputs.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::fv::{Grid2D, Perturbation, SolverConfig};
use crate::gas::GasParams;
use crate::riemann::{RiemannData, RiemannState, ShockFreeSolution};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
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

/// Everything one experiment needs. Module-level invariants (grid shape,
/// solver parameters, gas constants) are enforced by the field types
/// during deserialization; only cross-field checks live here.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gas: GasParams,
    pub riemann: RiemannData,
    pub grid: Grid2D,
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.to_path_buf(),
                source,
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(p) = &self.perturbation {
            if !p.amplitude.is_finite() {
                return Err(ConfigError::Invalid(format!(
                    "perturbation amplitude must be finite, got {}",
                    p.amplitude
                )));
            }
            if p.mode == 0 {
                return Err(ConfigError::Invalid(
                    "perturbation mode must be at least 1".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Exact-solution quantities recorded in the manifest so an output
/// directory is self-describing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub entropy: f64,
    pub left: RiemannState,
    pub middle: RiemannState,
    pub right: RiemannState,
    pub fan1: (f64, f64),
    pub fan2: (f64, f64),
    pub sound_speeds: (f64, f64, f64),
}

impl DerivedQuantities {
    pub fn from_solution(sol: &ShockFreeSolution) -> Self {
        DerivedQuantities {
            entropy: sol.entropy,
            left: sol.left,
            middle: sol.middle,
            right: sol.right,
            fan1: sol.fan1,
            fan2: sol.fan2,
            sound_speeds: sol.sound_speeds(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Completed,
    Failed,
}

/// Written atomically when a run starts and finalized when it ends, so a
/// crash leaves a manifest that says "running" instead of nothing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub status: RunStatus,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<DerivedQuantities>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_status: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunManifest {
    pub fn running(config: &RunConfig, derived: Option<DerivedQuantities>) -> Self {
        RunManifest {
            tool: "rarewave".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            status: RunStatus::Running,
            config: serde_json::to_value(config).expect("config serializes"),
            derived,
            wall_clock_seconds: None,
            exit_status: None,
            error: None,
        }
    }

    pub fn finalize(
        &mut self,
        status: RunStatus,
        wall_clock_seconds: f64,
        exit_status: i32,
        error: Option<String>,
    ) {
        self.status = status;
        self.wall_clock_seconds = Some(wall_clock_seconds);
        self.exit_status = Some(exit_status);
        self.error = error;
    }

    /// Write-to-temporary-then-rename, so readers never observe a torn
    /// manifest.
    pub fn write_atomic(&self, path: &Path) -> std::io::Result<()> {
        let tmp = path.with_extension("json.tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            serde_json::to_writer_pretty(&mut f, self)?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)
    }
}
