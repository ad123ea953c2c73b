//! Shared command plumbing: config resolution, output directories, the
//! command error type and its exit-code classification.

pub mod monolithic;
pub mod poc;
pub mod report_cmd;
pub mod scenario_cmd;
pub mod sweep;

use pvdr_core::committee::CommitteeError;
use pvdr_core::config::{AppConfig, ConfigError};
use pvdr_core::controller::ControllerError;
use pvdr_core::gp::GpError;
use pvdr_core::learner::{LearnError, TableIoError};
use pvdr_core::metrics::MetricsError;
use pvdr_core::scenario::ScenarioError;
use pvdr_core::thermal::ThermalError;
use pvdr_core::{Classify, FailureKind};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CmdError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Thermal(#[from] ThermalError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    TableIo(#[from] TableIoError),
    #[error(transparent)]
    Committee(#[from] CommitteeError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl Classify for CmdError {
    fn kind(&self) -> FailureKind {
        match self {
            CmdError::Config(e) => e.kind(),
            CmdError::Thermal(e) => e.kind(),
            CmdError::Gp(e) => e.kind(),
            CmdError::Learn(e) => e.kind(),
            CmdError::TableIo(e) => e.kind(),
            CmdError::Committee(e) => e.kind(),
            CmdError::Controller(e) => e.kind(),
            CmdError::Metrics(e) => e.kind(),
            CmdError::Scenario(e) => e.kind(),
            CmdError::Io { .. } => FailureKind::Io,
            CmdError::Invalid(_) => FailureKind::Input,
        }
    }
}

pub struct Context {
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
}

impl Context {
    /// Loads the config file, or falls back to the built-in defaults when the
    /// default path does not exist (an explicitly passed path must exist).
    pub fn load_config(&self) -> Result<AppConfig, CmdError> {
        if !self.config_path.exists() && self.config_path == Path::new("configs/default.toml") {
            log::info!("no {} present; using built-in defaults", self.config_path.display());
            return Ok(AppConfig::default());
        }
        Ok(AppConfig::load(&self.config_path)?)
    }

    /// Creates the output directory (plus `sub` when given) and echoes the
    /// resolved config into it so the run is reproducible from its artifacts.
    pub fn prepare_out(&self, sub: Option<&str>, config: &AppConfig) -> Result<PathBuf, CmdError> {
        let dir = match sub {
            Some(sub) => self.out_dir.join(sub),
            None => self.out_dir.clone(),
        };
        std::fs::create_dir_all(&dir).map_err(|source| CmdError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let resolved = dir.join("resolved_config.toml");
        std::fs::write(&resolved, config.to_toml_string()).map_err(|source| CmdError::Io {
            path: resolved.display().to_string(),
            source,
        })?;
        log::info!("resolved config written to {}", resolved.display());
        Ok(dir)
    }
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> Result<PathBuf, CmdError> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| CmdError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}
