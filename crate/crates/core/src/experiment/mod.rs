//! Config-driven experiment runner: single runs over seeds and parameter
//! values, sampler comparisons, hyperparameter sweeps and density export.
//!
//! Configs are TOML with two sections. `[experiment]` selects the problem,
//! parameter values, seeds and samplers; `[training]` holds every
//! [`TrainingConfig`] field under its own name. Named presets ship with the
//! crate (see [`PRESETS`]).

pub mod cli;
mod runner;

pub use runner::{
    compare_samplers, export_density, run_experiment, sweep, JobReport, RunOptions, SweepAxis, SweepValue,
};

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pde::{ProblemKind, ProblemSpec};
use crate::training::{SamplerKind, TrainingConfig, TrainingError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("{failed} of {total} runs diverged")]
    Diverged { failed: usize, total: usize },
    #[error("training failed: {0}")]
    Training(#[from] TrainingError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("artifact error: {0}")]
    Artifact(String),
}

impl ExperimentError {
    /// Process exit status: 2 for configuration problems, 3 for diverged
    /// runs, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::InvalidConfig(_) | ExperimentError::Training(TrainingError::Config(_)) => 2,
            ExperimentError::Diverged { .. } => 3,
            _ => 1,
        }
    }
}

/// Named configs compiled into the crate.
pub const PRESETS: &[(&str, &str)] = &[
    ("burgers-fixed-fboal", include_str!("../../presets/burgers-fixed-fboal.toml")),
    ("burgers-compare", include_str!("../../presets/burgers-compare.toml")),
    ("burgers-shock-compare", include_str!("../../presets/burgers-shock-compare.toml")),
    ("burgers-algorithm-schedule", include_str!("../../presets/burgers-algorithm-schedule.toml")),
    ("burgers-param", include_str!("../../presets/burgers-param.toml")),
    ("wave-fixed", include_str!("../../presets/wave-fixed.toml")),
    ("wave-param", include_str!("../../presets/wave-param.toml")),
];

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_samplers() -> Vec<SamplerKind> {
    vec![SamplerKind::Fboal]
}

fn default_bins() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub problem: ProblemKind,
    /// Make the PDE parameter a network input. Otherwise every value in
    /// `param_values` is trained separately.
    #[serde(default)]
    pub parameterized: bool,
    pub param_values: Vec<f64>,
    /// Interval mapped onto the parameter input; defaults to the span of
    /// `param_values`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_range: Option<[f64; 2]>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_samplers")]
    pub samplers: Vec<SamplerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_ic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_bc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ic: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_bc: Option<usize>,
    /// Bins of the exported density histograms.
    #[serde(default = "default_bins")]
    pub density_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub training: TrainingConfig,
}

/// Threshold multipliers applied together with `--scale`: shortened runs
/// cannot reach the full-length accuracy, so the stopping threshold is
/// loosened stepwise. Rows are `(smallest scale of the row, factor)`.
pub const THRESHOLD_RELAXATION: &[(f64, f64)] = &[(1.0, 1.0), (0.5, 1.25), (0.1, 1.5), (0.0, 2.0)];

pub fn threshold_factor(scale: f64) -> f64 {
    THRESHOLD_RELAXATION.iter().find(|(lo, _)| scale >= *lo).map_or(2.0, |r| r.1)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML form; parsing it back yields an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn preset(name: &str) -> Option<Self> {
        PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| Self::from_toml(text).expect("shipped presets are valid"))
    }

    /// A preset name, `preset:<name>`, or a path to a TOML file.
    pub fn load(source: &str) -> Result<Self, ExperimentError> {
        let name = source.strip_prefix("preset:").unwrap_or(source);
        if !Path::new(source).exists() {
            if let Some(cfg) = Self::preset(name) {
                return Ok(cfg);
            }
        }
        let text = std::fs::read_to_string(source)
            .map_err(|e| ExperimentError::InvalidConfig(format!("cannot read config '{source}': {e}")))?;
        Self::from_toml(&text)
    }

    /// Multiply stage lengths and the cap by `scale ∈ (0, 1]` and loosen the
    /// threshold per [`THRESHOLD_RELAXATION`]. Stages never shrink below one
    /// iteration.
    pub fn scaled(&self, scale: f64) -> Result<Self, ExperimentError> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(ExperimentError::InvalidConfig(format!("--scale must lie in (0, 1], got {scale}")));
        }
        let mut out = self.clone();
        let shrink = |n: usize| ((n as f64 * scale).round() as usize).max(1);
        for stage in &mut out.training.lr_stages {
            stage.iterations = shrink(stage.iterations);
        }
        out.training.max_iterations = shrink(out.training.max_iterations);
        out.training.threshold *= threshold_factor(scale);
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let e = &self.experiment;
        let bad = |m: String| Err(ExperimentError::InvalidConfig(m));
        if e.param_values.is_empty() {
            return bad("param_values must not be empty".into());
        }
        if e.param_values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return bad("param_values must be positive".into());
        }
        if e.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if e.samplers.is_empty() {
            return bad("at least one sampler is required".into());
        }
        if e.density_bins == 0 {
            return bad("density_bins must be positive".into());
        }
        if !e.parameterized && e.param_range.is_some() {
            return bad("param_range only applies to parameterized problems".into());
        }
        if e.parameterized && e.param_values.len() < 2 && e.param_range.is_none() {
            return bad("a parameterized problem needs two values or an explicit param_range".into());
        }
        for &sampler in &e.samplers {
            let mut t = self.training.clone();
            t.sampler = sampler;
            t.validate().map_err(|err| ExperimentError::InvalidConfig(err.to_string()))?;
        }
        if e.parameterized && !self.training.budget.is_multiple_of(e.param_values.len()) {
            return bad(format!(
                "budget {} must split evenly over {} parameter values",
                self.training.budget,
                e.param_values.len()
            ));
        }
        for (spec, _) in self.problems() {
            spec.validate().map_err(|err| ExperimentError::InvalidConfig(err.to_string()))?;
            if let Some((lo, hi)) = spec.param_range {
                if e.param_values.iter().any(|v| *v < lo || *v > hi) {
                    return bad(format!("param_values must lie in the parameter range [{lo}, {hi}]"));
                }
            }
        }
        Ok(())
    }

    /// Problem instances with their training parameter values: one per
    /// value in fixed mode, a single parameterized problem otherwise.
    pub fn problems(&self) -> Vec<(ProblemSpec, Vec<f64>)> {
        let e = &self.experiment;
        let base = |p: f64| {
            let mut spec = match e.problem {
                ProblemKind::Burgers => ProblemSpec::burgers(p),
                ProblemKind::Wave => ProblemSpec::wave(p),
            };
            spec.w_ic = e.w_ic.unwrap_or(spec.w_ic);
            spec.w_bc = e.w_bc.unwrap_or(spec.w_bc);
            spec.n_ic = e.n_ic.unwrap_or(spec.n_ic);
            spec.n_bc = e.n_bc.unwrap_or(spec.n_bc);
            spec
        };
        if e.parameterized {
            let [lo, hi] = e.param_range.unwrap_or_else(|| {
                let lo = e.param_values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = e.param_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                [lo, hi]
            });
            vec![(base(lo).parameterized(lo, hi), e.param_values.clone())]
        } else {
            e.param_values.iter().map(|&p| (base(p), Vec::new())).collect()
        }
    }
}
