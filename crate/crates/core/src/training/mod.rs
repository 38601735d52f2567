//! The optimization loop: full-batch Adam over staged learning rates, with
//! the collocation set resampled every `k` iterations and a dual stopping
//! rule (iteration cap or test-error threshold).

mod adam;
mod record;

pub use adam::{adam_step, AdamState};
pub use record::{LogEvent, Snapshot, StopReason, TrainingLog};

use std::collections::HashSet;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{relative_l2, MetricsError};
use crate::network::{init_network, NetworkError, NetworkParams};
use crate::oracle::{make_grid, reference_field, EvalGrid, GridKind, OracleError};
use crate::pde::{BoundaryPoint, LossEvaluator, LossInputs, PdeError, ProblemSpec};
use crate::sampling::{
    apply_plan, build_grid, candidate_pool, fboal_step, init_collocation, rad_resample, rar_add, rard_add,
    CollocationPoint, CollocationSet, GridSpec, InitScheme, SamplingError, SubdomainGrid,
};

#[derive(Debug, Error)]
pub enum TrainingError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("non-finite gradient at step {step}")]
    NonFiniteGradient { step: u64 },
    #[error("training diverged at iteration {iteration} (loss {loss})")]
    Diverged {
        iteration: usize,
        loss: f64,
        /// Parameters at the last test-error check that was still finite.
        last_good: Box<NetworkParams>,
        log: Box<TrainingLog>,
    },
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Loss above which a run counts as diverged.
pub const DIVERGENCE_LOSS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrStage {
    pub lr: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Static,
    Fboal,
    Rad,
    Rard,
    Rar,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Static => "static",
            SamplerKind::Fboal => "fboal",
            SamplerKind::Rad => "rad",
            SamplerKind::Rard => "rard",
            SamplerKind::Rar => "rar",
        }
    }

    /// Whether the sampler keeps `|C|` fixed.
    pub fn fixed_budget(self) -> bool {
        matches!(self, SamplerKind::Static | SamplerKind::Fboal | SamplerKind::Rad)
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "static" => SamplerKind::Static,
            "fboal" => SamplerKind::Fboal,
            "rad" => SamplerKind::Rad,
            "rard" | "rar-d" | "rar_d" => SamplerKind::Rard,
            "rar" => SamplerKind::Rar,
            other => return Err(format!("unknown sampler '{other}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub lr_stages: Vec<LrStage>,
    /// `k`: iterations between resampling events (and test-error checks).
    pub resample_period: usize,
    pub sampler: SamplerKind,
    /// `m`: points swapped per FBOAL event, summed over equations.
    pub swap_count: usize,
    /// `d`: number of FBOAL sub-domains.
    pub subdomain_count: usize,
    /// Total collocation budget `N_pde` (over all parameter values).
    pub budget: usize,
    pub init_scheme: InitScheme,
    /// `K`: global iteration cap.
    pub max_iterations: usize,
    /// `s`: test-error threshold (sum over parameter values when parameterized).
    pub threshold: f64,
    /// RAD density exponent `κ` and additive constant `c`.
    pub rad_kappa: f64,
    pub rad_c: f64,
    /// The same pair for RAR-D.
    pub rard_kappa: f64,
    pub rard_c: f64,
    /// Points added per RAR-D / RAR event.
    pub m_add: usize,
    /// Proposal pool size for RAD / RAR-D / RAR, as a multiple of `|C|`.
    pub pool_factor: usize,
    pub hidden_layers: Vec<usize>,
    /// Network initialization and resampling seed.
    pub seed: u64,
    /// Seed of the initial collocation set; kept apart from `seed` so every
    /// run of a comparison starts from the same points.
    pub collocation_seed: u64,
    pub test_grid: [usize; 2],
    pub validation_grid: [usize; 2],
    /// Keep a copy of `C` after every resampling event.
    pub snapshot_events: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            lr_stages: vec![
                LrStage { lr: 1e-3, iterations: 50_000 },
                LrStage { lr: 1e-4, iterations: 200_000 },
                LrStage { lr: 1e-5, iterations: 200_000 },
            ],
            resample_period: 2000,
            sampler: SamplerKind::Fboal,
            swap_count: 20,
            subdomain_count: 200,
            budget: 1024,
            init_scheme: InitScheme::Equidistant,
            max_iterations: 500_000,
            threshold: 0.02,
            rad_kappa: 1.0,
            rad_c: 1.0,
            rard_kappa: 2.0,
            rard_c: 0.0,
            m_add: 5,
            pool_factor: 10,
            hidden_layers: vec![50; 4],
            seed: 0,
            collocation_seed: 0,
            test_grid: [10, 10],
            validation_grid: [256, 100],
            snapshot_events: false,
        }
    }
}

impl TrainingConfig {
    /// The learning-rate set listed with the algorithm itself rather than
    /// the one used in the experiments.
    pub fn algorithm_schedule() -> Vec<LrStage> {
        vec![
            LrStage { lr: 1e-4, iterations: 50_000 },
            LrStage { lr: 1e-5, iterations: 200_000 },
            LrStage { lr: 1e-6, iterations: 200_000 },
        ]
    }

    pub fn total_stage_iterations(&self) -> usize {
        self.lr_stages.iter().map(|s| s.iterations).sum()
    }

    pub fn validate(&self) -> Result<(), TrainingError> {
        let bad = |msg: String| Err(TrainingError::Config(msg));
        if self.lr_stages.is_empty() {
            return bad("at least one learning-rate stage is required".into());
        }
        if self.lr_stages.iter().any(|s| !(s.lr > 0.0) || !s.lr.is_finite()) {
            return bad("learning rates must be positive".into());
        }
        if self.lr_stages.windows(2).any(|w| w[1].lr >= w[0].lr) {
            return bad("learning rates must strictly decrease from stage to stage".into());
        }
        if self.resample_period == 0 {
            return bad("resample_period must be at least 1".into());
        }
        if self.sampler == SamplerKind::Fboal && self.swap_count > self.subdomain_count {
            return bad(format!("swap_count {} exceeds subdomain_count {}", self.swap_count, self.subdomain_count));
        }
        if self.subdomain_count == 0 {
            return bad("subdomain_count must be positive".into());
        }
        if self.budget == 0 {
            return bad("budget must be positive".into());
        }
        if !(self.threshold > 0.0) {
            return bad("threshold must be positive".into());
        }
        if self.pool_factor == 0 {
            return bad("pool_factor must be at least 1".into());
        }
        if [self.rad_kappa, self.rad_c, self.rard_kappa, self.rard_c].iter().any(|v| !(*v >= 0.0)) {
            return bad("density exponents and constants must be non-negative".into());
        }
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return bad("hidden_layers must be non-empty and positive".into());
        }
        if self.test_grid.iter().chain(&self.validation_grid).any(|&n| n < 2) {
            return bad("evaluation grids need at least 2 nodes per axis".into());
        }
        Ok(())
    }
}

/// Outcome of [`stopping_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Stop(StopReason),
}

/// Stop once `iteration ≥ K` or the test error drops below `s`. The
/// threshold is checked first so a run that meets it exactly at the cap
/// is reported as converged.
pub fn stopping_check(test_error: f64, iteration: usize, cfg: &TrainingConfig) -> Decision {
    if test_error < cfg.threshold {
        Decision::Stop(StopReason::ThresholdMet)
    } else if iteration >= cfg.max_iterations {
        Decision::Stop(StopReason::CapReached)
    } else {
        Decision::Continue
    }
}

/// Reference values on an evaluation grid for each parameter value.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub grid: EvalGrid,
    pub param_values: Vec<f64>,
    pub points: Vec<Vec<BoundaryPoint>>,
    pub reference: Vec<Vec<f64>>,
}

impl Evaluation {
    pub fn new(spec: &ProblemSpec, param_values: &[f64], nx: usize, nt: usize, kind: GridKind) -> Result<Self, TrainingError> {
        let grid = make_grid(&spec.domain, nx, nt, kind)?;
        let tagged = spec.is_parameterized();
        let values: Vec<f64> = if tagged { param_values.to_vec() } else { vec![spec.param] };
        let mut points = Vec::with_capacity(values.len());
        let mut reference = Vec::with_capacity(values.len());
        for &v in &values {
            points.push(grid.points(tagged.then_some(v)));
            reference.push(reference_field(spec, &grid, v)?);
        }
        Ok(Self { grid, param_values: values, points, reference })
    }

    /// Relative L² error per parameter value.
    pub fn errors(
        &self,
        evaluator: &mut LossEvaluator,
        params: &NetworkParams,
        spec: &ProblemSpec,
    ) -> Result<Vec<f64>, TrainingError> {
        self.points
            .iter()
            .zip(&self.reference)
            .map(|(pts, reference)| Ok(relative_l2(&evaluator.predict(params, spec, pts)?, reference)?))
            .collect()
    }

    /// Every collocation point that coincides with a node of this grid.
    pub fn overlaps(&self, points: &[CollocationPoint]) -> usize {
        let nodes: HashSet<(u64, u64)> =
            self.grid.points(None).iter().map(|p| (p.x.to_bits(), p.t.to_bits())).collect();
        points.iter().filter(|p| nodes.contains(&(p.x.to_bits(), p.t.to_bits()))).count()
    }
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub params: NetworkParams,
    pub log: TrainingLog,
    pub initial_collocation: CollocationSet,
    pub collocation: CollocationSet,
    pub param_values: Vec<f64>,
    /// Validation relative L² error per parameter value.
    pub validation_errors: Vec<f64>,
}

/// Train one network. `param_values` lists the training values of the PDE
/// parameter in parameterized mode and must be empty otherwise.
pub fn train(spec: &ProblemSpec, param_values: &[f64], cfg: &TrainingConfig) -> Result<TrainingOutcome, TrainingError> {
    let start = Instant::now();
    spec.validate()?;
    cfg.validate()?;
    if spec.is_parameterized() == param_values.is_empty() {
        return Err(TrainingError::Config(
            "parameter values are required exactly when the problem is parameterized".into(),
        ));
    }
    let groups = param_values.len().max(1);
    if !cfg.budget.is_multiple_of(groups) {
        return Err(TrainingError::Config(format!("budget {} is not divisible by {groups} parameter values", cfg.budget)));
    }

    let mut layers = vec![spec.input_dim()];
    layers.extend_from_slice(&cfg.hidden_layers);
    layers.push(1);
    let mut params = init_network(&layers, cfg.seed)?.with_input_map(spec.input_map())?;
    let mut grads = params.zeros_like();
    let mut adam = AdamState::new(&params);
    let mut evaluator = LossEvaluator::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_5a3b_1e00_0000);

    let mut c = init_collocation(spec, cfg.budget / groups, param_values, cfg.init_scheme, cfg.collocation_seed)?;
    let initial_collocation = c.clone();
    let ic = spec.ic_points(param_values);
    let bc = spec.bc_points(param_values);
    let subdomains = if cfg.sampler == SamplerKind::Fboal {
        Some(build_grid(&spec.domain, GridSpec::Cells(cfg.subdomain_count))?)
    } else {
        None
    };

    let [tx, tt] = cfg.test_grid;
    let test = Evaluation::new(spec, param_values, tx, tt, GridKind::Test)?;
    if test.overlaps(&c.points) > 0 {
        log::warn!("initial collocation set shares nodes with the test grid");
    }

    let mut log = TrainingLog::default();
    if cfg.snapshot_events {
        log.snapshots.push(Snapshot { iteration: 0, points: c.points.clone() });
    }
    let mut last_good = params.clone();
    let mut iteration = 0usize;
    let mut stop = StopReason::CapReached;

    'stages: for stage in &cfg.lr_stages {
        let mut local = 0;
        while local < stage.iterations {
            let block = cfg.resample_period.min(stage.iterations - local).min(cfg.max_iterations - iteration);
            for _ in 0..block {
                let inputs = LossInputs { collocation: &c.points, ic: &ic, bc: &bc, data: &[] };
                let loss = evaluator.loss_and_grad(&params, spec, &inputs, &mut grads)?.total;
                iteration += 1;
                if !loss.is_finite() || loss > DIVERGENCE_LOSS {
                    return Err(diverged(iteration, loss, last_good, log, start));
                }
                log.losses.push(loss);
                if let Err(e) = adam_step(&mut params, &grads, &mut adam, stage.lr) {
                    log::error!("{e}");
                    return Err(diverged(iteration, f64::NAN, last_good, log, start));
                }
            }
            local += block;

            let per_param = test.errors(&mut evaluator, &params, spec)?;
            let test_error: f64 = per_param.iter().sum();
            if !test_error.is_finite() {
                return Err(diverged(iteration, test_error, last_good, log, start));
            }
            last_good.clone_from(&params);
            log.events.push(LogEvent::TestCheck {
                iteration,
                lr: stage.lr,
                loss: log.losses.last().copied().unwrap_or(f64::NAN),
                test_error,
                per_param,
            });
            log::debug!("iteration {iteration}: test error {test_error:.4e}");

            // events only fall on stage-local multiples of k
            if block == cfg.resample_period && cfg.sampler != SamplerKind::Static {
                let (added, removed) =
                    resample(&mut c, spec, param_values, cfg, subdomains.as_ref(), &params, &mut evaluator, &mut rng)?;
                if test.overlaps(&c.points) > 0 {
                    log::warn!("iteration {iteration}: collocation set shares nodes with the test grid");
                }
                log.events.push(LogEvent::Resample {
                    iteration,
                    sampler: cfg.sampler,
                    added,
                    removed,
                    size: c.len(),
                    counts: c.counts_per_param(param_values),
                });
                log.resample_count += 1;
                if cfg.snapshot_events {
                    log.snapshots.push(Snapshot { iteration, points: c.points.clone() });
                }
            }

            if let Decision::Stop(reason) = stopping_check(test_error, iteration, cfg) {
                stop = reason;
                break 'stages;
            }
        }
    }

    log.iterations = iteration;
    log.stop_reason = Some(stop);
    log.events.push(LogEvent::Stop { iteration, reason: stop });
    let [vx, vt] = cfg.validation_grid;
    let validation = Evaluation::new(spec, param_values, vx, vt, GridKind::Validation)?;
    let validation_errors = validation.errors(&mut evaluator, &params, spec)?;
    log.wall_seconds = start.elapsed().as_secs_f64();
    Ok(TrainingOutcome {
        params,
        log,
        initial_collocation,
        collocation: c,
        param_values: validation.param_values,
        validation_errors,
    })
}

fn diverged(iteration: usize, loss: f64, last_good: NetworkParams, mut log: TrainingLog, start: Instant) -> TrainingError {
    log.iterations = iteration;
    log.wall_seconds = start.elapsed().as_secs_f64();
    TrainingError::Diverged { iteration, loss, last_good: Box::new(last_good), log: Box::new(log) }
}

/// One resampling event; returns the number of points added and removed.
#[allow(clippy::too_many_arguments)]
fn resample(
    c: &mut CollocationSet,
    spec: &ProblemSpec,
    param_values: &[f64],
    cfg: &TrainingConfig,
    subdomains: Option<&SubdomainGrid>,
    params: &NetworkParams,
    evaluator: &mut LossEvaluator,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, usize), TrainingError> {
    let mut residual_fn = |pts: &[CollocationPoint]| {
        evaluator.residuals(params, spec, pts).map_err(|e| SamplingError::Residual(e.to_string()))
    };
    let pool = cfg.pool_factor * c.len();
    Ok(match cfg.sampler {
        SamplerKind::Static => (0, 0),
        SamplerKind::Fboal => {
            let grid = subdomains.expect("FBOAL runs build their sub-domain grid");
            let candidates = candidate_pool(spec, c, param_values, rng);
            let c_res = residual_fn(&c.points)?;
            let cand_res = residual_fn(&candidates)?;
            let plan = fboal_step(&c.points, &c_res, &candidates, &cand_res, grid, cfg.swap_count)?;
            apply_plan(c, &plan)?;
            (plan.added.len(), plan.removed.len())
        }
        SamplerKind::Rad => {
            let n = c.len();
            *c = rad_resample(c, spec, param_values, residual_fn, cfg.rad_kappa, cfg.rad_c, cfg.pool_factor, rng)?;
            (n, n)
        }
        SamplerKind::Rard => {
            let added = rard_add(c, spec, param_values, residual_fn, cfg.rard_kappa, cfg.rard_c, cfg.m_add, pool, rng)?;
            (added.len(), 0)
        }
        SamplerKind::Rar => (rar_add(c, spec, param_values, residual_fn, cfg.m_add, pool, rng)?.len(), 0),
    })
}
