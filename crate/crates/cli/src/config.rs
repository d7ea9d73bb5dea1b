//! Scenario configuration: a single JSON document, validated into core types
//! before anything is computed.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use quasih_core::C64;
use quasih_core::dynamics::{StateH1, Trajectory};
use quasih_core::model::{random_unitary2, ModelParams, Unitary2};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    pub initial: InitialConfig,
    pub unitary: UnitaryConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub nu: f64,
    pub g: f64,
    pub kappa: f64,
    pub n_bath: u32,
    pub x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// `A = A_re + i A_im`, `B = B_re + i B_im`; rescaled to unit η-norm
    /// unless `normalize` is false, in which case they must already be.
    Amplitudes {
        #[serde(rename = "A_re")]
        a_re: f64,
        #[serde(rename = "A_im", default)]
        a_im: f64,
        #[serde(rename = "B_re")]
        b_re: f64,
        #[serde(rename = "B_im", default)]
        b_im: f64,
        #[serde(default = "yes")]
        normalize: bool,
    },
    Alpha {
        alpha: f64,
        #[serde(default)]
        phase1: f64,
        #[serde(default)]
        phase2: f64,
    },
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitaryConfig {
    /// Row-major `[[re, im]; 4]` for `a, b, c, d`.
    Matrix { entries: [[f64; 2]; 4] },
    /// `[[√(1−c²), −c], [c, √(1−c²)]]`
    RealCd { c: f64 },
    /// Haar-random from a seed.
    Random { seed: u64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Defaults to two population periods, `2π/ω`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Number of intervals; the grid has `samples + 1` points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Alpha,
    C,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::C => "c",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

pub const DEFAULT_SAMPLES: usize = 1024;

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub trajectory: Trajectory,
    pub t_max: f64,
    pub samples: usize,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validate into core types. Errors name the offending field.
    pub fn validate(&self) -> Result<Scenario, CliError> {
        let m = &self.model;
        let params = ModelParams::diagonal(m.nu, m.g, m.kappa, m.n_bath, m.x)
            .map_err(|e| CliError::Config(format!("model: {e}")))?;
        let initial = match self.initial {
            InitialConfig::Amplitudes { a_re, a_im, b_re, b_im, normalize } => {
                let (a, b) = (C64::new(a_re, a_im), C64::new(b_re, b_im));
                if normalize {
                    StateH1::normalized(&params, a, b)
                } else {
                    StateH1::strict(&params, a, b)
                }
            }
            InitialConfig::Alpha { alpha, phase1, phase2 } => StateH1::from_alpha(&params, alpha, phase1, phase2),
        }
        .map_err(|e| CliError::Config(format!("initial: {e}")))?;
        let w = match self.unitary {
            UnitaryConfig::Matrix { entries } => {
                let [a, b, c, d] = entries.map(|[re, im]| C64::new(re, im));
                Unitary2::new(a, b, c, d)
            }
            UnitaryConfig::RealCd { c } => Unitary2::real_cd(c),
            UnitaryConfig::Random { seed } => Ok(random_unitary2(seed)),
        }
        .map_err(|e| CliError::Config(format!("unitary: {e}")))?;
        let trajectory = Trajectory::new(params, initial, w).map_err(|e| CliError::Config(format!("initial: {e}")))?;

        let t_max = self.grid.t_max.unwrap_or(2.0 * PI / params.omega());
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(CliError::Config(format!("grid.t_max: must be positive and finite, got {t_max}")));
        }
        let samples = self.grid.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(CliError::Config("grid.samples: must be at least 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            self.check_sweep(sweep)?;
        }
        Ok(Scenario { config: self.clone(), trajectory, t_max, samples })
    }

    fn check_sweep(&self, sweep: &SweepConfig) -> Result<(), CliError> {
        if sweep.values.is_empty() {
            return Err(CliError::Config("sweep.values: must not be empty".into()));
        }
        match (sweep.param, &self.initial, &self.unitary) {
            (SweepParam::Alpha, InitialConfig::Alpha { .. }, _) => Ok(()),
            (SweepParam::C, _, UnitaryConfig::RealCd { .. }) => Ok(()),
            (SweepParam::Alpha, _, _) => Err(CliError::Config("sweep.param: alpha sweeps need initial.mode = \"alpha\"".into())),
            (SweepParam::C, _, _) => Err(CliError::Config("sweep.param: c sweeps need unitary.mode = \"real_cd\"".into())),
        }
    }

    /// The scenario with the swept parameter set to `value`, without the
    /// sweep section.
    pub fn with_sweep_value(&self, param: SweepParam, value: f64) -> Self {
        let mut out = self.clone();
        out.sweep = None;
        match param {
            SweepParam::Alpha => {
                if let InitialConfig::Alpha { alpha, .. } = &mut out.initial {
                    *alpha = value;
                }
            }
            SweepParam::C => {
                if let UnitaryConfig::RealCd { c } = &mut out.unitary {
                    *c = value;
                }
            }
        }
        out
    }

    pub fn output_path(&self) -> Option<&Path> {
        self.output.as_ref().and_then(|o| o.path.as_deref())
    }

    pub fn output_format(&self) -> Option<Format> {
        self.output.as_ref().and_then(|o| o.format)
    }
}
