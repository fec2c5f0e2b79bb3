//! Point-set construction: residual, boundary, initial, collocation, and
//! test grids for each benchmark layout.

use super::ProblemSpec;
use crate::error::{Error, Result};
use crate::nn::Rng;
use ndarray::Array2;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingStrategy {
    /// Tensor-product equispaced layout (interior in x, upper-inclusive in t).
    UniformGrid,
    /// Case II layout: 11 equispaced points on x in [-0.2, 0.2], the other
    /// 10 equispaced over the rest of the interval, at each time level.
    Clustered,
    /// Uniform random interior points.
    RandomUniform,
}

impl SamplingStrategy {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "uniform-grid" => Ok(SamplingStrategy::UniformGrid),
            "clustered" => Ok(SamplingStrategy::Clustered),
            "random-uniform" => Ok(SamplingStrategy::RandomUniform),
            other => Err(Error::contract(format!("unknown sampling strategy '{other}'"))),
        }
    }
}

/// Grid sizes for every point set; `*_t` fields are ignored for stationary
/// problems.
#[derive(Debug, Clone, Copy)]
pub struct PointCounts {
    pub residual_x: usize,
    pub residual_t: usize,
    pub boundary_t: usize,
    pub initial_x: usize,
    pub collocation_x: usize,
    pub collocation_t: usize,
    pub test_x: usize,
    pub test_t: usize,
}

/// Residual, boundary, initial, collocation, and test point sets with the
/// attached boundary/initial targets and test-grid reference values.
#[derive(Debug, Clone)]
pub struct PointSets {
    pub residual: Array2<f64>,
    pub boundary: Array2<f64>,
    pub boundary_values: Vec<f64>,
    pub initial: Array2<f64>,
    pub initial_values: Vec<f64>,
    pub collocation: Array2<f64>,
    pub test_grid: Array2<f64>,
    pub test_values: Vec<f64>,
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// n equispaced points strictly inside (lo, hi).
fn interior_linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * (i + 1) as f64 / (n + 1) as f64)
        .collect()
}

/// n equispaced points in (lo, hi], excluding the initial time.
fn upper_linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * (i + 1) as f64 / n as f64)
        .collect()
}

fn grid_2d(xs: &[f64], ts: &[f64]) -> Array2<f64> {
    let mut out = Array2::zeros((xs.len() * ts.len(), 2));
    let mut r = 0;
    for &t in ts {
        for &x in xs {
            out[[r, 0]] = x;
            out[[r, 1]] = t;
            r += 1;
        }
    }
    out
}

fn grid_1d(xs: &[f64]) -> Array2<f64> {
    let mut out = Array2::zeros((xs.len(), 1));
    for (i, &x) in xs.iter().enumerate() {
        out[[i, 0]] = x;
    }
    out
}

/// Case II residual abscissae: 11 equispaced on [-0.2, 0.2] plus 5 interior
/// points per outer subinterval.
fn clustered_xs() -> Vec<f64> {
    let mut xs = interior_linspace(-1.0, -0.2, 5);
    xs.extend(linspace(-0.2, 0.2, 11));
    xs.extend(interior_linspace(0.2, 1.0, 5));
    xs
}

/// Build every point set for a problem. `test_reference` overrides the
/// oracle on the test grid (used for file-backed references).
pub fn sample_points(
    strategy: SamplingStrategy,
    counts: &PointCounts,
    problem: &ProblemSpec,
    rng: &mut Rng,
    test_reference: Option<Vec<f64>>,
) -> Result<PointSets> {
    if counts.residual_x == 0 || counts.collocation_x == 0 || counts.test_x == 0 {
        return Err(Error::contract("point counts must be positive"));
    }
    let (x0, x1) = problem.domain.x;
    match problem.domain.t {
        None => {
            let rx = match strategy {
                SamplingStrategy::UniformGrid => interior_linspace(x0, x1, counts.residual_x),
                SamplingStrategy::RandomUniform => {
                    (0..counts.residual_x).map(|_| rng.uniform(x0, x1)).collect()
                }
                SamplingStrategy::Clustered => {
                    return Err(Error::contract(
                        "clustered layout is defined only for the time-dependent Burgers domain",
                    ))
                }
            };
            let boundary = grid_1d(&[x0, x1]);
            let boundary_values = vec![problem.bc_value(&[x0]), problem.bc_value(&[x1])];
            let test_xs = linspace(x0, x1, counts.test_x);
            let test_grid = grid_1d(&test_xs);
            let test_values = match test_reference {
                Some(v) => v,
                None => test_xs
                    .iter()
                    .map(|&x| problem.oracle_value(&[x]))
                    .collect::<Result<_>>()?,
            };
            if test_values.len() != test_grid.nrows() {
                return Err(Error::contract("test reference length mismatch"));
            }
            Ok(PointSets {
                residual: grid_1d(&rx),
                boundary,
                boundary_values,
                initial: Array2::zeros((0, 1)),
                initial_values: vec![],
                collocation: grid_1d(&linspace(x0, x1, counts.collocation_x)),
                test_grid,
                test_values,
            })
        }
        Some((t0, t1)) => {
            let rt = upper_linspace(t0, t1, counts.residual_t);
            let residual = match strategy {
                SamplingStrategy::UniformGrid => {
                    grid_2d(&interior_linspace(x0, x1, counts.residual_x), &rt)
                }
                SamplingStrategy::Clustered => {
                    if counts.residual_x != 21 {
                        return Err(Error::contract(format!(
                            "clustered layout is defined for 21 x-points per level, got {}",
                            counts.residual_x
                        )));
                    }
                    grid_2d(&clustered_xs(), &rt)
                }
                SamplingStrategy::RandomUniform => {
                    let n = counts.residual_x * counts.residual_t;
                    let mut out = Array2::zeros((n, 2));
                    for i in 0..n {
                        out[[i, 0]] = rng.uniform(x0, x1);
                        out[[i, 1]] = rng.uniform(t0, t1);
                    }
                    out
                }
            };

            let bt = linspace(t0, t1, counts.boundary_t);
            let mut boundary = Array2::zeros((2 * bt.len(), 2));
            let mut boundary_values = Vec::with_capacity(2 * bt.len());
            for (i, &t) in bt.iter().enumerate() {
                boundary[[2 * i, 0]] = x0;
                boundary[[2 * i, 1]] = t;
                boundary_values.push(problem.bc_value(&[x0, t]));
                boundary[[2 * i + 1, 0]] = x1;
                boundary[[2 * i + 1, 1]] = t;
                boundary_values.push(problem.bc_value(&[x1, t]));
            }

            let ix = linspace(x0, x1, counts.initial_x);
            let mut initial = Array2::zeros((ix.len(), 2));
            let initial_values: Vec<f64> = ix
                .par_iter()
                .map(|&x| problem.ic_value(x))
                .collect::<Result<_>>()?;
            for (i, &x) in ix.iter().enumerate() {
                initial[[i, 0]] = x;
                initial[[i, 1]] = t0;
            }

            let collocation = grid_2d(
                &linspace(x0, x1, counts.collocation_x),
                &linspace(t0, t1, counts.collocation_t),
            );
            let test_grid = grid_2d(
                &linspace(x0, x1, counts.test_x),
                &linspace(t0, t1, counts.test_t),
            );
            let test_values = match test_reference {
                Some(v) => v,
                None => {
                    let pts: Vec<(f64, f64)> = test_grid
                        .rows()
                        .into_iter()
                        .map(|r| (r[0], r[1]))
                        .collect();
                    pts.par_iter()
                        .map(|&(x, t)| problem.oracle_value(&[x, t]))
                        .collect::<Result<_>>()?
                }
            };
            if test_values.len() != test_grid.nrows() {
                return Err(Error::contract("test reference length mismatch"));
            }
            Ok(PointSets {
                residual,
                boundary,
                boundary_values,
                initial,
                initial_values,
                collocation,
                test_grid,
                test_values,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemSpec;

    fn dr_counts() -> PointCounts {
        PointCounts {
            residual_x: 6,
            residual_t: 1,
            boundary_t: 1,
            initial_x: 0,
            collocation_x: 201,
            collocation_t: 1,
            test_x: 81,
            test_t: 1,
        }
    }

    #[test]
    fn uniform_grid_six_interior_points() {
        let p = ProblemSpec::diffusion_reaction(5.0);
        let mut rng = Rng::new(0);
        let ps = sample_points(SamplingStrategy::UniformGrid, &dr_counts(), &p, &mut rng, None)
            .unwrap();
        assert_eq!(ps.residual.nrows(), 6);
        for r in ps.residual.rows() {
            assert!(r[0] > -1.0 && r[0] < 1.0);
        }
        // equispaced: constant gap
        let gap = ps.residual[[1, 0]] - ps.residual[[0, 0]];
        for i in 1..6 {
            let g = ps.residual[[i, 0]] - ps.residual[[i - 1, 0]];
            assert!((g - gap).abs() < 1e-12);
        }
        assert_eq!(ps.collocation.nrows(), 201);
        assert_eq!(ps.test_grid.nrows(), 81);
        // collocation includes the boundary
        assert_eq!(ps.collocation[[0, 0]], -1.0);
        assert_eq!(ps.collocation[[200, 0]], 1.0);
    }

    #[test]
    fn clustered_layout_counts() {
        let p = ProblemSpec::burgers(0.008 / std::f64::consts::PI, (0.6, 0.8));
        let counts = PointCounts {
            residual_x: 21,
            residual_t: 3,
            boundary_t: 5,
            initial_x: 5,
            collocation_x: 11,
            collocation_t: 5,
            test_x: 7,
            test_t: 3,
        };
        let mut rng = Rng::new(0);
        let ps =
            sample_points(SamplingStrategy::Clustered, &counts, &p, &mut rng, None).unwrap();
        assert_eq!(ps.residual.nrows(), 63);
        // exactly 11 points of each time level inside [-0.2, 0.2]
        for level in 0..3 {
            let inside = (0..21)
                .filter(|&i| {
                    let x = ps.residual[[level * 21 + i, 0]];
                    (-0.2..=0.2).contains(&x)
                })
                .count();
            assert_eq!(inside, 11);
        }
        // initial slice sits at t0 with oracle targets
        assert!(ps.initial.rows().into_iter().all(|r| r[1] == 0.6));
        assert_eq!(ps.initial_values.len(), 5);
    }

    #[test]
    fn random_uniform_is_deterministic_per_seed() {
        let p = ProblemSpec::burgers(0.01, (0.0, 0.9));
        let counts = PointCounts {
            residual_x: 4,
            residual_t: 3,
            boundary_t: 3,
            initial_x: 3,
            collocation_x: 5,
            collocation_t: 2,
            test_x: 4,
            test_t: 2,
        };
        let mut r1 = Rng::new(123);
        let mut r2 = Rng::new(123);
        let a = sample_points(SamplingStrategy::RandomUniform, &counts, &p, &mut r1, None).unwrap();
        let b = sample_points(SamplingStrategy::RandomUniform, &counts, &p, &mut r2, None).unwrap();
        assert_eq!(a.residual, b.residual);
    }

    #[test]
    fn residual_time_levels_exclude_initial_time() {
        let p = ProblemSpec::burgers(0.001 / std::f64::consts::PI, (0.0, 0.9));
        let counts = PointCounts {
            residual_x: 51,
            residual_t: 10,
            boundary_t: 3,
            initial_x: 3,
            collocation_x: 3,
            collocation_t: 3,
            test_x: 3,
            test_t: 2,
        };
        let mut rng = Rng::new(0);
        let ps =
            sample_points(SamplingStrategy::UniformGrid, &counts, &p, &mut rng, None).unwrap();
        assert_eq!(ps.residual.nrows(), 510);
        let t_min = ps
            .residual
            .rows()
            .into_iter()
            .map(|r| r[1])
            .fold(f64::INFINITY, f64::min);
        assert!(t_min > 0.0);
        let t_max = ps
            .residual
            .rows()
            .into_iter()
            .map(|r| r[1])
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((t_max - 0.9).abs() < 1e-12);
    }
}
