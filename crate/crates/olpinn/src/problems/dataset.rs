//! Operator-learning dataset generation: oracle solutions of a parameterized
//! problem family sampled on a shared space(-time) grid.

use super::points::linspace;
use super::ProblemSpec;
use crate::error::{Error, Result};
use ndarray::Array2;
use rayon::prelude::*;
use std::io::Write;

/// A scalar-parameter family of problems sharing one domain.
#[derive(Debug, Clone)]
pub struct ParameterFamily {
    /// Parameter range (inclusive); samples are equispaced over it.
    pub range: (f64, f64),
    pub n_samples: usize,
    /// Problem built for one parameter value.
    pub make: fn(f64) -> ProblemSpec,
}

impl ParameterFamily {
    pub fn parameter_values(&self) -> Vec<f64> {
        linspace(self.range.0, self.range.1, self.n_samples)
    }
}

/// Training data for one DeepONet: per-sample branch inputs, a query grid
/// shared by every sample, and the oracle targets, row per sample.
#[derive(Debug, Clone)]
pub struct OperatorDataset {
    /// n_samples x m branch inputs (raw, unnormalized).
    pub f_reprs: Array2<f64>,
    /// n_points x dim query coordinates.
    pub grid: Array2<f64>,
    /// n_samples x n_points oracle values.
    pub targets: Array2<f64>,
}

impl OperatorDataset {
    pub fn n_samples(&self) -> usize {
        self.f_reprs.nrows()
    }

    pub fn n_points(&self) -> usize {
        self.grid.nrows()
    }

    pub fn m(&self) -> usize {
        self.f_reprs.ncols()
    }

    /// Columnar text export, one row per (f_repr..., x..., target).
    pub fn export_columnar<W: Write>(&self, mut w: W) -> Result<()> {
        for s in 0..self.n_samples() {
            for j in 0..self.n_points() {
                let mut cols: Vec<String> =
                    self.f_reprs.row(s).iter().map(|v| format!("{v:.17e}")).collect();
                cols.extend(self.grid.row(j).iter().map(|v| format!("{v:.17e}")));
                cols.push(format!("{:.17e}", self.targets[[s, j]]));
                writeln!(w, "{}", cols.join(","))?;
            }
        }
        Ok(())
    }
}

/// Evaluate the family's oracle on a tensor grid for equispaced parameter
/// samples. `grid_x` and `grid_t` are the per-axis point counts (`grid_t`
/// ignored for stationary problems).
pub fn generate_operator_dataset(
    family: &ParameterFamily,
    grid_x: usize,
    grid_t: usize,
) -> Result<OperatorDataset> {
    if family.n_samples == 0 || grid_x == 0 {
        return Err(Error::contract("dataset dimensions must be positive"));
    }
    let params = family.parameter_values();
    let probe = (family.make)(params[0]);
    let (x0, x1) = probe.domain.x;
    let xs = linspace(x0, x1, grid_x);
    let grid: Array2<f64> = match probe.domain.t {
        None => {
            let mut g = Array2::zeros((xs.len(), 1));
            for (i, &x) in xs.iter().enumerate() {
                g[[i, 0]] = x;
            }
            g
        }
        Some((t0, t1)) => {
            if grid_t == 0 {
                return Err(Error::contract("time grid count must be positive"));
            }
            let ts = linspace(t0, t1, grid_t);
            let mut g = Array2::zeros((xs.len() * ts.len(), 2));
            let mut r = 0;
            for &t in &ts {
                for &x in &xs {
                    g[[r, 0]] = x;
                    g[[r, 1]] = t;
                    r += 1;
                }
            }
            g
        }
    };

    let rows: Vec<Vec<f64>> = params
        .par_iter()
        .map(|&p| {
            let problem = (family.make)(p);
            grid.rows()
                .into_iter()
                .map(|pt| {
                    problem
                        .oracle_value(pt.as_slice().unwrap())
                        .map_err(|e| Error::Oracle(format!("sample p={p}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let n_points = grid.nrows();
    let mut targets = Array2::zeros((params.len(), n_points));
    for (s, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            targets[[s, j]] = v;
        }
    }
    let mut f_reprs = Array2::zeros((params.len(), 1));
    for (s, &p) in params.iter().enumerate() {
        f_reprs[[s, 0]] = p;
    }
    Ok(OperatorDataset { f_reprs, grid, targets })
}
