//! Collocation sets and the strategies that move them.
//!
//! * static: the initial set never changes;
//! * FBOAL ([`fboal_step`]): per sub-domain, the worst candidate from a fresh
//!   pool competes to enter and the best-resolved member competes to leave;
//!   the `m` strongest of each are swapped, so the budget is fixed;
//! * RAD ([`rad_resample`]): the whole set is redrawn from a residual-powered
//!   density;
//! * RAR-D ([`rard_add`]) and RAR ([`rar_add`]): points are only added,
//!   stochastically or by top residual.
//!
//! Residuals are supplied by the caller, either as precomputed slices or via
//! a closure evaluating a batch of points, which keeps this module independent
//! of the network.

mod density;
mod fboal;
mod grid;
mod io;

pub use density::{rad_log_weights, rad_resample, rad_weights, rar_add, rard_add, weighted_sample};
pub use fboal::{apply_plan, fboal_step, ResamplePlan};
pub use grid::{build_grid, GridSpec, SubdomainGrid};
pub use io::{read_snapshot_csv, write_snapshot_csv, SnapshotRow};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pde::ProblemSpec;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("cannot tile the domain: {0}")]
    NonTiling(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("residual evaluation failed: {0}")]
    Residual(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// An unsupervised residual point. `param` is set in parameterized problems
/// and names the PDE-parameter value the point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollocationPoint {
    pub x: f64,
    pub t: f64,
    pub param: Option<f64>,
    pub equation: usize,
}

impl CollocationPoint {
    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t, param: None, equation: 0 }
    }
}

/// The training set `C` together with the size it started from.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    pub points: Vec<CollocationPoint>,
    pub budget: usize,
}

impl CollocationSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points per parameter value, in the order of `values`.
    /// Points whose parameter is not listed are not counted.
    pub fn counts_per_param(&self, values: &[f64]) -> Vec<usize> {
        let mut counts = vec![0; values.len()];
        for p in &self.points {
            if let Some(v) = p.param {
                if let Some(i) = values.iter().position(|&w| w == v) {
                    counts[i] += 1;
                }
            }
        }
        counts
    }

    /// Whether every point lies in the domain box and, when `values` is
    /// nonempty, carries one of them.
    pub fn all_inside(&self, spec: &ProblemSpec, values: &[f64]) -> bool {
        self.points.iter().all(|p| {
            spec.domain.contains(p.x, p.t) && (values.is_empty() || p.param.is_some_and(|v| values.contains(&v)))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Cell-centred tensor grid, `n = nx · nt` with the factor pair closest
    /// to square (the larger factor along x).
    Equidistant,
    UniformRandom,
}

/// Nearly square factorization `n = a · b` with `a ≥ b`.
pub fn nearest_factorization(n: usize) -> (usize, usize) {
    let mut b = (n as f64).sqrt().floor() as usize;
    while b > 1 && !n.is_multiple_of(b) {
        b -= 1;
    }
    let b = b.max(1);
    (n / b, b)
}

/// Initial collocation set: `n_per_param` points, replicated for every
/// parameter value in parameterized problems.
pub fn init_collocation(
    spec: &ProblemSpec,
    n_per_param: usize,
    param_values: &[f64],
    scheme: InitScheme,
    seed: u64,
) -> Result<CollocationSet, SamplingError> {
    if n_per_param == 0 {
        return Err(SamplingError::Invalid("need at least one collocation point".into()));
    }
    let d = spec.domain;
    let layout: Vec<(f64, f64)> = match scheme {
        InitScheme::Equidistant => {
            let (nx, nt) = nearest_factorization(n_per_param);
            if nt == 1 && n_per_param > 3 {
                log::warn!("{n_per_param} points only factor as {nx}×1; the equidistant grid degenerates to a line");
            }
            (0..nx)
                .flat_map(|i| {
                    (0..nt).map(move |j| {
                        (
                            d.x_min + d.width() * (i as f64 + 0.5) / nx as f64,
                            d.t_min + d.duration() * (j as f64 + 0.5) / nt as f64,
                        )
                    })
                })
                .collect()
        }
        InitScheme::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n_per_param).map(|_| uniform_in_box(spec, &mut rng)).collect()
        }
    };
    let points: Vec<CollocationPoint> = if param_values.is_empty() {
        layout.iter().map(|&(x, t)| CollocationPoint::new(x, t)).collect()
    } else {
        param_values
            .iter()
            .flat_map(|&v| layout.iter().map(move |&(x, t)| CollocationPoint { x, t, param: Some(v), equation: 0 }))
            .collect()
    };
    let budget = points.len();
    Ok(CollocationSet { points, budget })
}

fn uniform_in_box<R: Rng>(spec: &ProblemSpec, rng: &mut R) -> (f64, f64) {
    let d = spec.domain;
    (rng.gen_range(d.x_min..=d.x_max), rng.gen_range(d.t_min..=d.t_max))
}

/// `count` uniform points over the box; parameters drawn uniformly from the
/// training values, equation tags assigned round-robin over `n_equations`.
pub fn uniform_pool<R: Rng>(
    spec: &ProblemSpec,
    count: usize,
    param_values: &[f64],
    n_equations: usize,
    rng: &mut R,
) -> Vec<CollocationPoint> {
    let n_eq = n_equations.max(1);
    (0..count)
        .map(|i| {
            let (x, t) = uniform_in_box(spec, rng);
            let param = if param_values.is_empty() { None } else { Some(param_values[rng.gen_range(0..param_values.len())]) };
            CollocationPoint { x, t, param, equation: i % n_eq }
        })
        .collect()
}

/// Candidate pool `C'` with `|C'| = 10 |C|`.
pub fn candidate_pool<R: Rng>(
    spec: &ProblemSpec,
    c: &CollocationSet,
    param_values: &[f64],
    rng: &mut R,
) -> Vec<CollocationPoint> {
    let n_eq = c.points.iter().map(|p| p.equation + 1).max().unwrap_or(1);
    uniform_pool(spec, 10 * c.len(), param_values, n_eq, rng)
}

/// Tag points round-robin with equation indices `0..n_equations`.
pub fn split_per_equation(c: &mut CollocationSet, n_equations: usize) -> Result<(), SamplingError> {
    if n_equations < 1 {
        return Err(SamplingError::Invalid("need at least one equation".into()));
    }
    if !c.len().is_multiple_of(n_equations) {
        log::warn!("{} points do not split evenly over {n_equations} equations", c.len());
    }
    for (i, p) in c.points.iter_mut().enumerate() {
        p.equation = i % n_equations;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equidistant_layouts() {
        let spec = ProblemSpec::burgers(0.01);
        let c = init_collocation(&spec, 1024, &[], InitScheme::Equidistant, 0).unwrap();
        assert_eq!(c.budget, 1024);
        let mut xs: Vec<f64> = c.points.iter().map(|p| p.x).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut ts: Vec<f64> = c.points.iter().map(|p| p.t).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        assert_eq!((xs.len(), ts.len()), (32, 32));
        assert!((xs[0] - (-1.0 + 1.0 / 32.0)).abs() < 1e-15);
        assert!((ts[1] - ts[0] - 1.0 / 32.0).abs() < 1e-15);
        assert!(c.all_inside(&spec, &[]));
        assert_eq!(nearest_factorization(200), (20, 10));
        assert_eq!(nearest_factorization(1), (1, 1));
        assert_eq!(nearest_factorization(7), (7, 1));
    }

    #[test]
    fn parameterized_budget() {
        let spec = ProblemSpec::burgers(0.01).parameterized(0.0025, 0.0124);
        let values: Vec<f64> = (0..40).map(|i| 0.0025 + 0.0099 * i as f64 / 39.0).collect();
        let c = init_collocation(&spec, 1024, &values, InitScheme::Equidistant, 0).unwrap();
        assert_eq!(c.budget, 40960);
        assert!(c.counts_per_param(&values).iter().all(|&n| n == 1024));
        assert!(c.all_inside(&spec, &values));
    }

    #[test]
    fn random_init() {
        let spec = ProblemSpec::wave(1.0);
        let a = init_collocation(&spec, 1, &[], InitScheme::UniformRandom, 5).unwrap();
        assert_eq!(a.len(), 1);
        assert!(a.all_inside(&spec, &[]));
        let b = init_collocation(&spec, 300, &[], InitScheme::UniformRandom, 5).unwrap();
        assert_eq!(b, init_collocation(&spec, 300, &[], InitScheme::UniformRandom, 5).unwrap());
        assert!(init_collocation(&spec, 0, &[], InitScheme::UniformRandom, 5).is_err());
    }

    #[test]
    fn pool_sizes_and_membership() {
        let spec = ProblemSpec::burgers(0.01).parameterized(0.0025, 0.0124);
        let values = [0.0025, 0.005, 0.0124];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = init_collocation(&spec, 1024, &[], InitScheme::Equidistant, 0).unwrap();
        let pool = candidate_pool(&spec, &c, &[], &mut rng);
        assert_eq!(pool.len(), 10240);
        let empty = CollocationSet { points: vec![], budget: 0 };
        assert!(candidate_pool(&spec, &empty, &[], &mut rng).is_empty());
        let pool = uniform_pool(&spec, 10_000, &values, 1, &mut rng);
        assert!(pool.iter().all(|p| values.contains(&p.param.unwrap()) && spec.domain.contains(p.x, p.t)));
        for v in values {
            assert!(pool.iter().filter(|p| p.param == Some(v)).count() > 3000);
        }
    }

    #[test]
    fn equation_split() {
        let spec = ProblemSpec::burgers(0.01);
        let mut c = init_collocation(&spec, 10_000, &[], InitScheme::Equidistant, 0).unwrap();
        split_per_equation(&mut c, 4).unwrap();
        for e in 0..4 {
            assert_eq!(c.points.iter().filter(|p| p.equation == e).count(), 2500);
        }
        split_per_equation(&mut c, 1).unwrap();
        assert!(c.points.iter().all(|p| p.equation == 0));
        assert!(split_per_equation(&mut c, 0).is_err());
    }
}
