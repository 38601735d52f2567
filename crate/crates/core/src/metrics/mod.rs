//! Error metrics, multi-seed aggregation and collocation density histograms.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::CollocationPoint;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("length mismatch: {pred} predictions for {reference} reference values")]
    LengthMismatch { pred: usize, reference: usize },
    #[error("reference field has zero norm")]
    ZeroReference,
    #[error("reference field is constant")]
    ConstantReference,
    #[error("geometric mean needs positive values, got {0}")]
    NonPositive(f64),
    #[error("no values to aggregate")]
    Empty,
    #[error("histogram needs at least one bin")]
    NoBins,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn check_lengths(pred: &[f64], reference: &[f64]) -> Result<(), MetricsError> {
    if pred.len() != reference.len() {
        return Err(MetricsError::LengthMismatch { pred: pred.len(), reference: reference.len() });
    }
    Ok(())
}

fn diff_norm(pred: &[f64], reference: &[f64]) -> f64 {
    pred.iter().zip(reference).map(|(p, r)| (p - r) * (p - r)).sum::<f64>().sqrt()
}

/// `‖w − ŵ‖₂ / ‖w‖₂` with `w` the reference.
pub fn relative_l2(pred: &[f64], reference: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(pred, reference)?;
    let norm = reference.iter().map(|r| r * r).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(MetricsError::ZeroReference);
    }
    Ok(diff_norm(pred, reference) / norm)
}

/// `‖w − ŵ‖₂ / (max w − min w)`. Not normalized by the number of nodes, so
/// values grow like `√n` for a fixed pointwise error.
pub fn amplitude_relative_l2(pred: &[f64], reference: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(pred, reference)?;
    let (lo, hi) = reference
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    if !(hi > lo) {
        return Err(MetricsError::ConstantReference);
    }
    Ok(diff_norm(pred, reference) / (hi - lo))
}

/// Geometric mean and spread of per-seed errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub geo_mean: f64,
    /// Population standard deviation of the raw values.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

pub fn aggregate_runs(values: &[f64]) -> Result<Aggregate, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(&bad) = values.iter().find(|&&v| !(v > 0.0)) {
        return Err(MetricsError::NonPositive(bad));
    }
    let n = values.len() as f64;
    let geo_mean = (values.iter().map(|v| v.ln()).sum::<f64>() / n).exp();
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // exp(mean ln) can land an ulp outside [min, max] for identical inputs
    Ok(Aggregate { geo_mean: geo_mean.clamp(min, max), std, min, max, count: values.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    T,
}

/// Normalized histogram: `density[i]` is the fraction of points in
/// `[edges[i], edges[i+1])` (last bin closed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub axis: Axis,
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    /// Centre of the most populated bin (first one on ties).
    pub fn peak(&self) -> Option<f64> {
        let mut best: Option<usize> = None;
        for (i, &d) in self.density.iter().enumerate() {
            if best.is_none_or(|b| d > self.density[b]) {
                best = Some(i);
            }
        }
        best.map(|i| 0.5 * (self.edges[i] + self.edges[i + 1]))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), MetricsError> {
        writeln!(w, "# fboal-density v1")?;
        let mut csv = csv::Writer::from_writer(w);
        let axis = match self.axis {
            Axis::X => "x",
            Axis::T => "t",
        };
        csv.write_record(["axis", "bin_lo", "bin_hi", "density"])?;
        for (i, d) in self.density.iter().enumerate() {
            csv.write_record([axis.to_string(), self.edges[i].to_string(), self.edges[i + 1].to_string(), d.to_string()])?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Point density along one axis over `[lo, hi]`. `strip` optionally keeps
/// only points whose other coordinate lies in the given closed interval.
/// Points outside `[lo, hi]` are ignored.
pub fn point_density(
    points: &[CollocationPoint],
    axis: Axis,
    lo: f64,
    hi: f64,
    bins: usize,
    strip: Option<(f64, f64)>,
) -> Result<Histogram, MetricsError> {
    if bins == 0 {
        return Err(MetricsError::NoBins);
    }
    let edges: Vec<f64> = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
    let mut counts = vec![0usize; bins];
    let mut total = 0usize;
    for p in points {
        let (v, other) = match axis {
            Axis::X => (p.x, p.t),
            Axis::T => (p.t, p.x),
        };
        if strip.is_some_and(|(a, b)| other < a || other > b) || v < lo || v > hi {
            continue;
        }
        let bin = (((v - lo) / (hi - lo)) * bins as f64).floor() as usize;
        counts[bin.min(bins - 1)] += 1;
        total += 1;
    }
    let density = counts.iter().map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 }).collect();
    Ok(Histogram { axis, edges, density })
}

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub sampler: String,
    /// Validation relative L² error per PDE parameter value.
    pub validation_errors: Vec<f64>,
    pub param_values: Vec<f64>,
    /// Last test-grid error (sum over parameter values when parameterized).
    pub test_error: f64,
    pub iterations: usize,
    pub resample_count: usize,
    pub final_loss: f64,
    pub stop_reason: String,
    pub collocation_size: usize,
}

impl RunSummary {
    /// Single figure of merit: the validation error for fixed-parameter
    /// runs, the geometric mean over values otherwise.
    pub fn headline_error(&self) -> f64 {
        match self.validation_errors.as_slice() {
            [e] => *e,
            errs => aggregate_runs(errs).map(|a| a.geo_mean).unwrap_or(f64::NAN),
        }
    }
}

/// One row of a method comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub geo_mean_error: f64,
    pub std_error: f64,
    pub mean_iterations: f64,
    pub mean_resamples: f64,
    pub mean_wall_seconds: f64,
    pub runs: usize,
}

pub fn write_comparison_csv<W: Write>(mut w: W, rows: &[ComparisonRow]) -> Result<(), MetricsError> {
    writeln!(w, "# fboal-comparison v1")?;
    let mut csv = csv::Writer::from_writer(w);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_summaries_csv<W: Write>(mut w: W, runs: &[RunSummary]) -> Result<(), MetricsError> {
    writeln!(w, "# fboal-summary v1")?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "seed",
        "sampler",
        "param",
        "validation_error",
        "test_error",
        "iterations",
        "resample_count",
        "final_loss",
        "stop_reason",
    ])?;
    for r in runs {
        for (p, e) in r.param_values.iter().zip(&r.validation_errors) {
            csv.write_record([
                r.seed.to_string(),
                r.sampler.clone(),
                p.to_string(),
                e.to_string(),
                r.test_error.to_string(),
                r.iterations.to_string(),
                r.resample_count.to_string(),
                r.final_loss.to_string(),
                r.stop_reason.clone(),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_l2_basics() {
        let r = [1.0, -2.0, 3.0];
        assert_eq!(relative_l2(&r, &r).unwrap(), 0.0);
        assert_eq!(relative_l2(&[0.0; 3], &r).unwrap(), 1.0);
        let p: Vec<f64> = r.iter().map(|v| 1.1 * v).collect();
        assert!((relative_l2(&p, &r).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(relative_l2(&[1.0], &[0.0]), Err(MetricsError::ZeroReference)));
        assert!(matches!(relative_l2(&[1.0], &r), Err(MetricsError::LengthMismatch { .. })));
    }

    #[test]
    fn relative_l2_scale_equivariant() {
        let r = [0.3, -1.2, 2.5, 0.1];
        let p = [0.25, -1.0, 2.7, 0.0];
        let base = relative_l2(&p, &r).unwrap();
        for a in [-3.0, 1e-3, 7.5] {
            let (pa, ra): (Vec<f64>, Vec<f64>) = p.iter().zip(&r).map(|(x, y)| (a * x, a * y)).unzip();
            assert!((relative_l2(&pa, &ra).unwrap() - base).abs() < 1e-14);
        }
    }

    #[test]
    fn amplitude_metric() {
        let n = 10;
        let r: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
        let p: Vec<f64> = r.iter().map(|v| v + 0.1).collect();
        assert!((amplitude_relative_l2(&p, &r).unwrap() - 0.1 * (n as f64).sqrt()).abs() < 1e-14);
        let r2: Vec<f64> = r.iter().map(|v| 2.0 * v).collect();
        let p2: Vec<f64> = r2.iter().map(|v| v + 0.1).collect();
        assert!((amplitude_relative_l2(&p2, &r2).unwrap() - 0.05 * (n as f64).sqrt()).abs() < 1e-14);
        assert!(matches!(amplitude_relative_l2(&[1.0, 2.0], &[3.0, 3.0]), Err(MetricsError::ConstantReference)));
    }

    #[test]
    fn aggregation() {
        let a = aggregate_runs(&[0.3; 4]).unwrap();
        assert_eq!((a.geo_mean, a.std), (0.3, 0.0));
        assert!((aggregate_runs(&[1.0, 100.0]).unwrap().geo_mean - 10.0).abs() < 1e-12);
        assert!((aggregate_runs(&[2.0, 4.0, 8.0]).unwrap().geo_mean - 4.0).abs() < 1e-12);
        assert!((aggregate_runs(&[8.0, 2.0, 4.0]).unwrap().geo_mean - 4.0).abs() < 1e-12);
        assert!(matches!(aggregate_runs(&[1.0, 0.0]), Err(MetricsError::NonPositive(_))));
        assert!(matches!(aggregate_runs(&[]), Err(MetricsError::Empty)));
    }

    #[test]
    fn histograms() {
        let grid: Vec<CollocationPoint> =
            (0..40).map(|i| CollocationPoint::new(-1.0 + (i as f64 + 0.5) / 20.0, 0.5)).collect();
        let h = point_density(&grid, Axis::X, -1.0, 1.0, 8, None).unwrap();
        assert!(h.density.iter().all(|&d| (d - 0.125).abs() < 1e-15));
        assert!((h.density.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let spike = vec![CollocationPoint::new(0.0, 0.2); 5];
        let h = point_density(&spike, Axis::X, -1.0, 1.0, 10, None).unwrap();
        assert_eq!(h.density.iter().filter(|&&d| d > 0.0).count(), 1);
        assert!(h.peak().unwrap().abs() <= 0.1);

        // the strip filter keeps only t ∈ [0.4, 0.6]
        let mixed = [CollocationPoint::new(0.9, 0.5), CollocationPoint::new(-0.9, 0.9)];
        let h = point_density(&mixed, Axis::X, -1.0, 1.0, 2, Some((0.4, 0.6))).unwrap();
        assert_eq!(h.density, vec![0.0, 1.0]);
        assert!(matches!(point_density(&mixed, Axis::T, 0.0, 1.0, 0, None), Err(MetricsError::NoBins)));
    }
}
