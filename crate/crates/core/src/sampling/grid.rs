use serde::{Deserialize, Serialize};

use super::SamplingError;
use crate::pde::Domain;

/// How to size the FBOAL sub-domain grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpec {
    /// Square cells of this edge length; must divide both box edges.
    CellSize(f64),
    /// Total cell count, factored so cells are as close to square as
    /// possible.
    Cells(usize),
}

/// Rectangular tiling of the (x, t) box. Cells are half-open `[a, b)` except
/// the last one along each axis, which is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainGrid {
    pub x_edges: Vec<f64>,
    pub t_edges: Vec<f64>,
}

impl SubdomainGrid {
    pub fn nx(&self) -> usize {
        self.x_edges.len() - 1
    }

    pub fn nt(&self) -> usize {
        self.t_edges.len() - 1
    }

    /// Number of cells `d`.
    pub fn len(&self) -> usize {
        self.nx() * self.nt()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell index `ix · nt + it`, or `None` outside the box.
    pub fn cell_of(&self, x: f64, t: f64) -> Option<usize> {
        Some(axis_cell(&self.x_edges, x)? * self.nt() + axis_cell(&self.t_edges, t)?)
    }
}

fn axis_cell(edges: &[f64], v: f64) -> Option<usize> {
    let n = edges.len() - 1;
    if !(v >= edges[0] && v <= edges[n]) {
        return None;
    }
    Some((edges.partition_point(|&e| e <= v) - 1).min(n - 1))
}

fn edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    e[n] = hi;
    e
}

pub fn build_grid(domain: &Domain, spec: GridSpec) -> Result<SubdomainGrid, SamplingError> {
    let (w, h) = (domain.width(), domain.duration());
    let (nx, nt) = match spec {
        GridSpec::CellSize(size) => {
            if !(size > 0.0) {
                return Err(SamplingError::NonTiling(format!("cell size {size}")));
            }
            let count = |len: f64| -> Result<usize, SamplingError> {
                let n = (len / size).round();
                if n < 1.0 || (n * size - len).abs() > 1e-9 {
                    return Err(SamplingError::NonTiling(format!("cell size {size} does not divide {len}")));
                }
                Ok(n as usize)
            };
            (count(w)?, count(h)?)
        }
        GridSpec::Cells(d) => {
            if d == 0 {
                return Err(SamplingError::NonTiling("zero cells".into()));
            }
            (1..=d)
                .filter(|a| d.is_multiple_of(*a))
                .map(|a| (a, d / a))
                .min_by(|&(a1, b1), &(a2, b2)| {
                    let skew = |a: usize, b: usize| ((w / a as f64) / (h / b as f64)).ln().abs();
                    skew(a1, b1).total_cmp(&skew(a2, b2))
                })
                .expect("d ≥ 1 has a divisor")
        }
    };
    Ok(SubdomainGrid {
        x_edges: edges(domain.x_min, domain.x_max, nx),
        t_edges: edges(domain.t_min, domain.t_max, nt),
    })
}
