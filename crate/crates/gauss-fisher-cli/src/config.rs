//! Run configuration: a flat JSON document, optionally overridden by
//! `--set key=value` flags (flag > file > default).

use std::path::Path;

use gauss_fisher::applications::{
    beam_phase_model, gradiometry_phase_model, rf_phase_model, BeamDisplacementModel,
    GradiometryModel, RfArrayModel,
};
use gauss_fisher::circuit::{PhaseModel, SensorConfig};
use gauss_fisher::fisher::AllocationObjective;
use serde::Deserialize;

use crate::CliError;

fn default_m() -> usize {
    1
}
fn default_tau() -> f64 {
    1.0
}
fn default_phi_h() -> f64 {
    std::f64::consts::FRAC_PI_2
}
fn default_model() -> String {
    "equal-phases".into()
}
fn default_rf_a() -> f64 {
    0.1
}
fn default_rf_omega() -> f64 {
    3.0e4
}
fn default_rf_b() -> f64 {
    10.0
}
fn default_grad_rho_density() -> f64 {
    2200.0
}
fn default_grad_c_p() -> f64 {
    700.0
}
fn default_grad_y0() -> f64 {
    0.05
}
fn default_grad_w() -> f64 {
    10.0
}
fn default_grad_beta() -> f64 {
    10.0
}
fn default_grad_q() -> f64 {
    50.0
}
fn default_axis() -> String {
    "tau".into()
}
fn default_axis_max() -> f64 {
    1.0
}
fn default_points() -> usize {
    11
}
fn default_objective() -> String {
    "cfi_mode3".into()
}
fn default_cutoff() -> usize {
    30
}
fn default_oracle_threshold() -> f64 {
    1e-3
}
fn default_mc_threshold() -> f64 {
    0.03
}
fn default_samples() -> usize {
    100_000
}

/// Flat configuration for every subcommand. Unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    // Sensor.
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_phi_h")]
    pub phi_h: f64,
    #[serde(default)]
    pub x0: f64,

    // Phase model.
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_rf_a")]
    pub rf_a: f64,
    #[serde(default = "default_rf_omega")]
    pub rf_omega: f64,
    #[serde(default = "default_rf_b")]
    pub rf_b: f64,
    #[serde(default)]
    pub rf_t: f64,
    #[serde(default)]
    pub beam_lambdas: Vec<f64>,
    #[serde(default)]
    pub custom_coeffs: Vec<f64>,
    #[serde(default = "default_grad_rho_density")]
    pub grad_rho_density: f64,
    #[serde(default = "default_grad_c_p")]
    pub grad_c_p: f64,
    #[serde(default = "default_grad_y0")]
    pub grad_y0: f64,
    #[serde(default = "default_grad_w")]
    pub grad_w: f64,
    #[serde(default = "default_grad_beta")]
    pub grad_beta: f64,
    #[serde(default = "default_grad_q")]
    pub grad_q: f64,

    // Sweep.
    #[serde(default = "default_axis")]
    pub axis: String,
    #[serde(default)]
    pub axis_min: f64,
    #[serde(default = "default_axis_max")]
    pub axis_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub axis_values: Option<Vec<f64>>,

    // Energy budget.
    #[serde(default)]
    pub n_total: Option<f64>,
    #[serde(default)]
    pub n_per_mode: Option<f64>,
    #[serde(default)]
    pub optimize_eta: bool,
    #[serde(default = "default_objective")]
    pub objective: String,

    // Oracle and Monte Carlo.
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_oracle_threshold")]
    pub oracle_threshold: f64,
    #[serde(default = "default_mc_threshold")]
    pub mc_threshold: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub x_true: Option<f64>,

    // Output.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_value(serde_json::json!({})).expect("defaults are total")
    }
}

impl RunConfig {
    /// Loads the file (if any), then applies `--set key=value` overrides.
    /// Values parse as JSON where possible, otherwise as bare strings.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str::<serde_json::Value>(&text)
                    .map_err(|e| CliError::Config(format!("{} is not valid JSON: {e}", p.display())))?
            }
            None => serde_json::json!({}),
        };
        let map = doc
            .as_object_mut()
            .ok_or_else(|| CliError::Config("config root must be a JSON object".into()))?;
        for pair in overrides {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set '{pair}' is not KEY=VALUE")))?;
            let parsed = serde_json::from_str::<serde_json::Value>(value)
                .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
            map.insert(key.to_string(), parsed);
        }
        let cfg: RunConfig = serde_json::from_value(doc)
            .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.m == 0 {
            return Err(CliError::Config("field 'm' must be at least 1".into()));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(CliError::Config(format!(
                "field 'r' must be finite and nonnegative (got {})",
                self.r
            )));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(CliError::Config(format!(
                "field 'tau' must lie in [0, 1] (got {})",
                self.tau
            )));
        }
        if !self.alpha.is_finite() || !self.phi_h.is_finite() || !self.x0.is_finite() {
            return Err(CliError::Config(
                "fields 'alpha', 'phi_h', 'x0' must be finite".into(),
            ));
        }
        match self.model.as_str() {
            "equal-phases" | "rf" | "gradiometry" => {}
            "beam" => {
                if self.beam_lambdas.len() != self.m {
                    return Err(CliError::Config(format!(
                        "field 'beam_lambdas' must list exactly m = {} coefficients (got {})",
                        self.m,
                        self.beam_lambdas.len()
                    )));
                }
            }
            "custom-table" => {
                if self.custom_coeffs.len() != self.m {
                    return Err(CliError::Config(format!(
                        "field 'custom_coeffs' must list exactly m = {} coefficients (got {})",
                        self.m,
                        self.custom_coeffs.len()
                    )));
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "field 'model' must be one of equal-phases|rf|beam|gradiometry|custom-table (got '{other}')"
                )));
            }
        }
        if self.model == "gradiometry" && self.x0 <= 0.0 {
            return Err(CliError::Config(
                "field 'x0' must be a positive conductivity for model 'gradiometry'".into(),
            ));
        }
        match self.axis.as_str() {
            "M" | "tau" | "eta" | "N" | "phiH" => {}
            other => {
                return Err(CliError::Config(format!(
                    "field 'axis' must be one of M|tau|eta|N|phiH (got '{other}')"
                )));
            }
        }
        if self.points == 0 {
            return Err(CliError::Config("field 'points' must be at least 1".into()));
        }
        if self.axis_values.as_ref().is_none_or(|v| v.is_empty()) && self.axis_min > self.axis_max
        {
            return Err(CliError::Config(format!(
                "field 'axis_min' ({}) exceeds 'axis_max' ({})",
                self.axis_min, self.axis_max
            )));
        }
        match self.objective.as_str() {
            "qfi" | "cfi_mode3" => {}
            other => {
                return Err(CliError::Config(format!(
                    "field 'objective' must be qfi|cfi_mode3 (got '{other}')"
                )));
            }
        }
        if let Some(fmt) = &self.format {
            if fmt != "csv" && fmt != "json" {
                return Err(CliError::Config(format!(
                    "field 'format' must be csv|json (got '{fmt}')"
                )));
            }
        }
        if self.cutoff < 2 {
            return Err(CliError::Config("field 'cutoff' must be at least 2".into()));
        }
        if self.samples < 1000 {
            return Err(CliError::Config(format!(
                "field 'samples' must be at least 1000 for stable statistics (got {})",
                self.samples
            )));
        }
        Ok(())
    }

    pub fn sensor(&self) -> Result<SensorConfig, CliError> {
        SensorConfig::real(self.m, self.r, self.alpha, self.tau, self.phi_h, self.x0)
            .map_err(|e| CliError::Config(format!("invalid sensor parameters: {e}")))
    }

    /// Builds the configured phase model for `m` modes (sweeps over `M`
    /// rebuild it per point).
    pub fn phase_model(&self, m: usize) -> Result<PhaseModel, CliError> {
        match self.model.as_str() {
            "equal-phases" => Ok(PhaseModel::equal_phases(m)),
            "custom-table" => Ok(PhaseModel::linear(self.custom_coeffs.clone())),
            "beam" => beam_phase_model(&BeamDisplacementModel {
                lambdas: self.beam_lambdas.clone(),
            })
            .map_err(|e| CliError::Config(format!("invalid beam model: {e}"))),
            "rf" => rf_phase_model(&RfArrayModel {
                a: self.rf_a,
                omega_rf: self.rf_omega,
                b: self.rf_b,
                m,
                t: self.rf_t,
            })
            .map_err(|e| CliError::Config(format!("invalid rf model: {e}"))),
            "gradiometry" => gradiometry_phase_model(&GradiometryModel {
                rho_density: self.grad_rho_density,
                c_p: self.grad_c_p,
                y0: self.grad_y0,
                w: self.grad_w,
                beta: self.grad_beta,
                q: self.grad_q,
                m,
            })
            .map_err(|e| CliError::Config(format!("invalid gradiometry model: {e}"))),
            other => Err(CliError::Config(format!("unknown model '{other}'"))),
        }
    }

    /// True when the model can be rebuilt for a different mode count.
    pub fn model_scales_with_m(&self) -> bool {
        matches!(self.model.as_str(), "equal-phases" | "rf" | "gradiometry")
    }

    pub fn allocation_objective(&self) -> AllocationObjective {
        match self.objective.as_str() {
            "qfi" => AllocationObjective::Qfi,
            _ => AllocationObjective::CfiMode3,
        }
    }
}
