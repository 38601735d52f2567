use std::cmp::Ordering;

use super::{CollocationPoint, CollocationSet, SamplingError, SubdomainGrid};

/// One swap event: `added` enter the set, `removed` (indices into the set,
/// ascending) leave it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResamplePlan {
    pub added: Vec<CollocationPoint>,
    pub removed: Vec<usize>,
    pub iteration: usize,
}

/// Per cell, the index of the largest (`want_max`) or smallest `|r|` among
/// the points tagged with `equation`. Iterating in index order with a strict
/// comparison keeps the lowest index on ties.
fn cell_extremes(
    points: &[CollocationPoint],
    residuals: &[f64],
    grid: &SubdomainGrid,
    equation: usize,
    want_max: bool,
) -> Vec<usize> {
    let mut best: Vec<Option<usize>> = vec![None; grid.len()];
    for (i, p) in points.iter().enumerate() {
        if p.equation != equation {
            continue;
        }
        let Some(cell) = grid.cell_of(p.x, p.t) else { continue };
        let better = match best[cell] {
            None => true,
            Some(j) => {
                let ord = residuals[i].abs().total_cmp(&residuals[j].abs());
                if want_max {
                    ord == Ordering::Greater
                } else {
                    ord == Ordering::Less
                }
            }
        };
        if better {
            best[cell] = Some(i);
        }
    }
    best.into_iter().flatten().collect()
}

/// Build the swap plan from residuals of the current set `c` and of the
/// candidate pool. Within each equation subset: `A` holds the max-`|r|`
/// candidate of every cell, `R` the min-`|r|` member of every cell; the `m`
/// largest of `A` are added and the `m` smallest of `R` removed (ties by
/// lowest index). If fewer than `m` cells are populated on either side, both
/// sides shrink to the smaller count so the budget is preserved.
pub fn fboal_step(
    c: &[CollocationPoint],
    c_residuals: &[f64],
    candidates: &[CollocationPoint],
    candidate_residuals: &[f64],
    grid: &SubdomainGrid,
    m: usize,
) -> Result<ResamplePlan, SamplingError> {
    if c.len() != c_residuals.len() || candidates.len() != candidate_residuals.len() {
        return Err(SamplingError::Invalid("one residual per point required".into()));
    }
    if m > grid.len() {
        return Err(SamplingError::Invalid(format!("m = {m} exceeds the {} sub-domains", grid.len())));
    }
    let mut plan = ResamplePlan::default();
    if m == 0 {
        return Ok(plan);
    }
    let n_eq = c.iter().chain(candidates).map(|p| p.equation + 1).max().unwrap_or(0);
    for e in 0..n_eq {
        let mut add = cell_extremes(candidates, candidate_residuals, grid, e, true);
        let mut remove = cell_extremes(c, c_residuals, grid, e, false);
        let abs_c = |i: &usize| candidate_residuals[*i].abs();
        let abs_r = |i: &usize| c_residuals[*i].abs();
        add.sort_by(|a, b| abs_c(b).total_cmp(&abs_c(a)).then(a.cmp(b)));
        remove.sort_by(|a, b| abs_r(a).total_cmp(&abs_r(b)).then(a.cmp(b)));
        let k = m.min(add.len()).min(remove.len());
        if k < m {
            log::info!(
                "equation {e}: only {} candidate cells and {} member cells populated; swapping {k} instead of {m}",
                add.len(),
                remove.len()
            );
        }
        plan.added.extend(add[..k].iter().map(|&i| candidates[i]));
        plan.removed.extend_from_slice(&remove[..k]);
    }
    plan.removed.sort_unstable();
    Ok(plan)
}

/// Remove then add: surviving points keep their relative order and the
/// added points are appended.
pub fn apply_plan(c: &mut CollocationSet, plan: &ResamplePlan) -> Result<(), SamplingError> {
    if plan.removed.windows(2).any(|w| w[0] >= w[1]) || plan.removed.last().is_some_and(|&i| i >= c.len()) {
        return Err(SamplingError::Invalid("removal indices must be ascending, unique and in range".into()));
    }
    let mut next = plan.removed.iter().peekable();
    let mut idx = 0;
    c.points.retain(|_| {
        let drop = next.peek().is_some_and(|&&r| r == idx);
        if drop {
            next.next();
        }
        idx += 1;
        !drop
    });
    c.points.extend_from_slice(&plan.added);
    Ok(())
}
