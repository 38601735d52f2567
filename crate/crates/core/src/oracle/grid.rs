use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::pde::{linspace_node, BoundaryPoint, Domain, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// Coarse mesh checked by the stopping rule.
    Test,
    /// Fine mesh used to report errors.
    Validation,
}

/// Tensor-product mesh of equidistant nodes over the closed domain box.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub kind: GridKind,
}

impl EvalGrid {
    pub fn len(&self) -> usize {
        self.x.len() * self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in x-major order (all times for the first x, then the next x),
    /// tagged with `param` when given.
    pub fn points(&self, param: Option<f64>) -> Vec<BoundaryPoint> {
        self.x
            .iter()
            .flat_map(|&x| self.t.iter().map(move |&t| BoundaryPoint { x, t, param }))
            .collect()
    }
}

/// Equidistant `nx × nt` grid spanning the closed box.
pub fn make_grid(domain: &Domain, nx: usize, nt: usize, kind: GridKind) -> Result<EvalGrid, OracleError> {
    if nx < 2 || nt < 2 {
        return Err(OracleError::InvalidArgument(format!("grid {nx}×{nt}: need at least 2 nodes per axis")));
    }
    Ok(EvalGrid {
        x: (0..nx).map(|i| linspace_node(domain.x_min, domain.x_max, nx, i)).collect(),
        t: (0..nt).map(|j| linspace_node(domain.t_min, domain.t_max, nt, j)).collect(),
        kind,
    })
}

/// Reference values at every grid node, in [`EvalGrid::points`] order.
pub fn reference_field(spec: &ProblemSpec, grid: &EvalGrid, param: f64) -> Result<Vec<f64>, OracleError> {
    grid.points(None).par_iter().map(|p| spec.reference(p.x, p.t, param)).collect()
}

/// Write a field as CSV: a version comment, then `x,t,value` rows.
pub fn write_field_csv<W: Write>(w: W, grid: &EvalGrid, values: &[f64]) -> Result<(), OracleError> {
    if values.len() != grid.len() {
        return Err(OracleError::InvalidArgument(format!("{} values for {} nodes", values.len(), grid.len())));
    }
    let mut w = w;
    writeln!(w, "# fboal-field v1")?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["x", "t", "value"])?;
    for (p, v) in grid.points(None).iter().zip(values) {
        csv.serialize((p.x, p.t, v))?;
    }
    csv.flush()?;
    Ok(())
}
