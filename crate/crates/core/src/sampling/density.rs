use rand::Rng;

use super::{uniform_pool, CollocationPoint, CollocationSet, SamplingError};
use crate::pde::ProblemSpec;

/// Natural logarithms of the sampling weights `ε^κ / mean(ε^κ) + c` with
/// `ε = |r|`. Working in log space keeps large κ from overflowing and tiny
/// weights from collapsing to zero. `ε⁰ = 1` even for `ε = 0`. When every
/// residual vanishes the ratio is undefined and a uniform law is used.
pub fn rad_log_weights(residuals: &[f64], kappa: f64, c: f64) -> Result<Vec<f64>, SamplingError> {
    if !(kappa >= 0.0) || !(c >= 0.0) {
        return Err(SamplingError::Invalid(format!("kappa = {kappa}, c = {c} must be non-negative")));
    }
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(SamplingError::Residual("non-finite residual".into()));
    }
    if kappa == 0.0 {
        return Ok(vec![(1.0 + c).ln(); residuals.len()]);
    }
    let logs: Vec<f64> = residuals.iter().map(|r| kappa * r.abs().ln()).collect();
    let lmax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lmax == f64::NEG_INFINITY {
        log::warn!("all residuals vanish; sampling uniformly");
        return Ok(vec![0.0; residuals.len()]);
    }
    let sum: f64 = logs.iter().map(|l| (l - lmax).exp()).sum();
    let log_mean = lmax + (sum / residuals.len() as f64).ln();
    let ln_c = c.ln();
    Ok(logs
        .iter()
        .map(|l| {
            let a = l - log_mean;
            if c == 0.0 {
                a
            } else if a > ln_c {
                a + (c * (-a).exp()).ln_1p()
            } else {
                ln_c + (a - ln_c).exp().ln_1p()
            }
        })
        .collect())
}

/// Sampling weights `ε^κ / mean(ε^κ) + c`; see [`rad_log_weights`].
pub fn rad_weights(residuals: &[f64], kappa: f64, c: f64) -> Result<Vec<f64>, SamplingError> {
    Ok(rad_log_weights(residuals, kappa, c)?.into_iter().map(f64::exp).collect())
}

/// `count` distinct indices drawn with probability proportional to
/// `exp(log_weights)`, without replacement, returned ascending.
///
/// Exponential-race formulation: every item gets the key `ln E − ln w` with
/// `E ~ Exp(1)` and the `count` smallest keys win. This is equivalent to
/// successive weighted draws and, being in log space, stays exact for
/// weights far below the floating-point range.
pub fn weighted_sample<R: Rng>(log_weights: &[f64], count: usize, rng: &mut R) -> Result<Vec<usize>, SamplingError> {
    if count > log_weights.len() {
        return Err(SamplingError::Invalid(format!("cannot draw {count} of {} without replacement", log_weights.len())));
    }
    if log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
        return Err(SamplingError::Invalid("weights must be finite".into()));
    }
    let mut keys: Vec<(f64, usize)> = log_weights
        .iter()
        .enumerate()
        .map(|(i, &lw)| {
            let u: f64 = 1.0 - rng.gen::<f64>();
            ((-u.ln()).ln() - lw, i)
        })
        .collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut idx: Vec<usize> = keys[..count].iter().map(|k| k.1).collect();
    idx.sort_unstable();
    Ok(idx)
}

fn equation_count(points: &[CollocationPoint]) -> usize {
    points.iter().map(|p| p.equation + 1).max().unwrap_or(1)
}

/// RAD: redraw the whole set from a fresh uniform proposal pool of
/// `pool_factor · |C|` points, weighted by [`rad_weights`], without
/// replacement. Each equation subset keeps its size.
#[allow(clippy::too_many_arguments)]
pub fn rad_resample<R, F>(
    c: &CollocationSet,
    spec: &ProblemSpec,
    param_values: &[f64],
    mut residual_fn: F,
    kappa: f64,
    c_const: f64,
    pool_factor: usize,
    rng: &mut R,
) -> Result<CollocationSet, SamplingError>
where
    R: Rng,
    F: FnMut(&[CollocationPoint]) -> Result<Vec<f64>, SamplingError>,
{
    if pool_factor < 1 {
        return Err(SamplingError::Invalid("pool factor must be at least 1".into()));
    }
    let n_eq = equation_count(&c.points);
    let pool = uniform_pool(spec, pool_factor * c.len(), param_values, n_eq, rng);
    let residuals = residual_fn(&pool)?;
    let mut points = Vec::with_capacity(c.len());
    for e in 0..n_eq {
        let members: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].equation == e).collect();
        let sub: Vec<f64> = members.iter().map(|&i| residuals[i]).collect();
        let weights = rad_log_weights(&sub, kappa, c_const)?;
        let need = c.points.iter().filter(|p| p.equation == e).count();
        points.extend(weighted_sample(&weights, need, rng)?.into_iter().map(|j| pool[members[j]]));
    }
    Ok(CollocationSet { points, budget: c.budget })
}

/// RAR-D: draw `m_add` points from a fresh pool of `pool_size` candidates
/// with the [`rad_weights`] law and append them.
#[allow(clippy::too_many_arguments)]
pub fn rard_add<R, F>(
    c: &mut CollocationSet,
    spec: &ProblemSpec,
    param_values: &[f64],
    mut residual_fn: F,
    kappa: f64,
    c_const: f64,
    m_add: usize,
    pool_size: usize,
    rng: &mut R,
) -> Result<Vec<CollocationPoint>, SamplingError>
where
    R: Rng,
    F: FnMut(&[CollocationPoint]) -> Result<Vec<f64>, SamplingError>,
{
    if m_add == 0 {
        return Ok(Vec::new());
    }
    let pool = uniform_pool(spec, pool_size.max(m_add), param_values, 1, rng);
    let weights = rad_log_weights(&residual_fn(&pool)?, kappa, c_const)?;
    let added: Vec<CollocationPoint> = weighted_sample(&weights, m_add, rng)?.into_iter().map(|i| pool[i]).collect();
    c.points.extend_from_slice(&added);
    Ok(added)
}

/// Indices of the `m` largest `|r|`, ties to the lowest index, ascending.
pub(crate) fn top_m(residuals: &[f64], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..residuals.len()).collect();
    order.sort_by(|&a, &b| residuals[b].abs().total_cmp(&residuals[a].abs()).then(a.cmp(&b)));
    order.truncate(m);
    order.sort_unstable();
    order
}

/// RAR: append the `m_add` largest-residual points of a fresh pool.
pub fn rar_add<R, F>(
    c: &mut CollocationSet,
    spec: &ProblemSpec,
    param_values: &[f64],
    mut residual_fn: F,
    m_add: usize,
    pool_size: usize,
    rng: &mut R,
) -> Result<Vec<CollocationPoint>, SamplingError>
where
    R: Rng,
    F: FnMut(&[CollocationPoint]) -> Result<Vec<f64>, SamplingError>,
{
    if m_add == 0 {
        return Ok(Vec::new());
    }
    let pool = uniform_pool(spec, pool_size.max(m_add), param_values, 1, rng);
    let residuals = residual_fn(&pool)?;
    let added: Vec<CollocationPoint> = top_m(&residuals, m_add).into_iter().map(|i| pool[i]).collect();
    c.points.extend_from_slice(&added);
    Ok(added)
}
