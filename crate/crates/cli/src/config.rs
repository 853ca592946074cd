//! JSON run-config schema. Every block rejects unknown keys.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wgqed_core::experiments::{
    RkScheme, SimulationConfig, SweepVariable, TimeGrid, WavepacketSpec,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<SimulationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet: Option<WavepacketSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    #[serde(rename = "T")]
    pub total: f64,
    pub n_steps: usize,
    #[serde(default)]
    pub scheme: RkScheme,
}

impl TimeBlock {
    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        Ok(TimeGrid::new(self.total, self.n_steps)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// Extra `[lambda_ir, lambda_uv]` windows; each gets its own output
    /// subdirectory. Empty means the model window only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub windows: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
}

fn default_length() -> f64 {
    100.0
}

fn default_total() -> f64 {
    50.0
}

fn default_delta_k() -> f64 {
    0.05 * PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeBlock {
    pub omega_a: f64,
    pub gamma_phys: f64,
    pub half_widths: Vec<f64>,
    pub omega_p: Vec<f64>,
    pub n_steps: Vec<usize>,
    #[serde(rename = "L", default = "default_length")]
    pub length: f64,
    #[serde(rename = "T", default = "default_total")]
    pub total: f64,
    #[serde(default = "default_delta_k")]
    pub delta_k: f64,
    /// Defaults to `-L/4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_0: Option<f64>,
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn model(&self) -> Result<SimulationConfig, CliError> {
        self.model.ok_or_else(|| missing("model"))
    }

    pub fn packet(&self) -> Result<WavepacketSpec, CliError> {
        self.packet.ok_or_else(|| missing("packet"))
    }

    pub fn time(&self) -> Result<TimeBlock, CliError> {
        self.time.ok_or_else(|| missing("time"))
    }

    pub fn sweep(&self) -> Result<&SweepBlock, CliError> {
        self.sweep.as_ref().ok_or_else(|| missing("sweep"))
    }

    pub fn converge(&self) -> Result<&ConvergeBlock, CliError> {
        self.converge.as_ref().ok_or_else(|| missing("converge"))
    }
}

fn missing(block: &str) -> CliError {
    CliError::Input(format!("config has no `{block}` block"))
}
