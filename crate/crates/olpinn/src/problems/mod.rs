//! Benchmark PDE definitions: residual operators, domains, initial/boundary
//! data, and reference oracles.

pub mod dataset;
pub mod oracles;
pub mod points;

pub use dataset::{generate_operator_dataset, OperatorDataset, ParameterFamily};
pub use points::{sample_points, PointCounts, PointSets, SamplingStrategy};

use crate::autodiff::Scalar;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Spatial interval and optional time interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x: (f64, f64),
    pub t: Option<(f64, f64)>,
}

impl Domain {
    pub fn dim(&self) -> usize {
        if self.t.is_some() {
            2
        } else {
            1
        }
    }
}

/// The PDE residual operator N[u].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResidualForm {
    /// -u_xx + u^3 - u - f(x) with f manufactured from u = a sin(pi x).
    DiffusionReaction { a: f64 },
    /// u_t + u u_x - nu u_xx (nu = 0 drops the diffusion term).
    Burgers { nu: f64 },
}

impl ResidualForm {
    pub fn needs_time(&self) -> bool {
        matches!(self, ResidualForm::Burgers { .. })
    }

    /// Whether the residual needs u_xx.
    pub fn needs_second(&self) -> bool {
        match self {
            ResidualForm::DiffusionReaction { .. } => true,
            ResidualForm::Burgers { nu } => *nu != 0.0,
        }
    }

    /// Evaluate the residual in any scalar algebra from the solution value
    /// and its derivatives at a point.
    pub fn eval<S: Scalar>(&self, point: &[f64], u: S, ux: S, ut: S, uxx: S) -> S {
        match *self {
            ResidualForm::DiffusionReaction { a } => {
                u * u * u - u - uxx - S::from_f64(oracles::dr_forcing(a, point[0]))
            }
            ResidualForm::Burgers { nu } => {
                if nu == 0.0 {
                    ut + u * ux
                } else {
                    ut + u * ux - S::from_f64(nu) * uxx
                }
            }
        }
    }

    /// Residual value and its partial derivatives with respect to
    /// (u, u_x, u_t, u_xx), obtained by seeding duals through [`Self::eval`].
    pub fn with_partials(&self, point: &[f64], u: f64, ux: f64, ut: f64, uxx: f64) -> ResidualJet {
        use crate::autodiff::Dual;
        let c = Dual::constant;
        let r = self.eval(point, c(u), c(ux), c(ut), c(uxx)).primal;
        let du = self.eval(point, Dual::variable(u), c(ux), c(ut), c(uxx)).tangent;
        let dux = self.eval(point, c(u), Dual::variable(ux), c(ut), c(uxx)).tangent;
        let dut = self.eval(point, c(u), c(ux), Dual::variable(ut), c(uxx)).tangent;
        let duxx = self.eval(point, c(u), c(ux), c(ut), Dual::variable(uxx)).tangent;
        ResidualJet { r, du, dux, dut, duxx }
    }
}

/// Residual value and partials with respect to the solution jet.
#[derive(Debug, Clone, Copy)]
pub struct ResidualJet {
    pub r: f64,
    pub du: f64,
    pub dux: f64,
    pub dut: f64,
    pub duxx: f64,
}

/// Reference solution source for a benchmark.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleKind {
    DiffusionReaction { a: f64 },
    BurgersViscous { nu: f64 },
    BurgersInviscid,
    /// External reference values on the test grid, one `x[,t],u` row per
    /// line (extension point for benchmarks without a built-in oracle).
    File { path: std::path::PathBuf },
}

/// One PDE benchmark: operator, domain, boundary/initial data, oracle.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Domain,
    pub residual: ResidualForm,
    pub oracle: OracleKind,
}

impl ProblemSpec {
    pub fn diffusion_reaction(a: f64) -> Self {
        ProblemSpec {
            name: format!("diffusion-reaction a={a}"),
            domain: Domain { x: (-1.0, 1.0), t: None },
            residual: ResidualForm::DiffusionReaction { a },
            oracle: OracleKind::DiffusionReaction { a },
        }
    }

    pub fn burgers(nu: f64, t_range: (f64, f64)) -> Self {
        let oracle = if nu == 0.0 {
            OracleKind::BurgersInviscid
        } else {
            OracleKind::BurgersViscous { nu }
        };
        ProblemSpec {
            name: format!("burgers nu={nu}"),
            domain: Domain { x: (-1.0, 1.0), t: Some(t_range) },
            residual: ResidualForm::Burgers { nu },
            oracle,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Dirichlet boundary value g at a boundary point.
    pub fn bc_value(&self, _point: &[f64]) -> f64 {
        // Every in-scope benchmark has homogeneous Dirichlet data.
        0.0
    }

    /// Initial value h(x) at the domain's initial time.
    pub fn ic_value(&self, x: f64) -> Result<f64> {
        let (t0, _) = self
            .domain
            .t
            .ok_or_else(|| Error::contract("initial data requested for a stationary problem"))?;
        if t0 == 0.0 {
            return Ok(-(PI * x).sin());
        }
        // Time window starting after 0: the initial slice is history data
        // from the reference oracle.
        self.oracle_value(&[x, t0])
    }

    /// Reference solution at a point.
    pub fn oracle_value(&self, point: &[f64]) -> Result<f64> {
        match &self.oracle {
            OracleKind::DiffusionReaction { a } => Ok(oracles::dr_exact(*a, point[0])),
            OracleKind::BurgersViscous { nu } => oracles::burgers_viscous(*nu, point[0], point[1]),
            OracleKind::BurgersInviscid => oracles::burgers_inviscid(point[0], point[1]),
            OracleKind::File { path } => Err(Error::Oracle(format!(
                "file-backed oracle {} must be resolved through the harness test grid",
                path.display()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_partials_match_hand_derivation() {
        let dr = ResidualForm::DiffusionReaction { a: 2.0 };
        let (u, ux, ut, uxx) = (1.3, 0.7, 0.0, -2.1);
        let jet = dr.with_partials(&[0.3], u, ux, ut, uxx);
        assert!((jet.du - (3.0 * u * u - 1.0)).abs() < 1e-14);
        assert!((jet.duxx + 1.0).abs() < 1e-14);
        assert_eq!(jet.dux, 0.0);
        assert_eq!(jet.dut, 0.0);

        let bg = ResidualForm::Burgers { nu: 0.01 };
        let jet = bg.with_partials(&[0.3, 0.5], u, ux, ut, uxx);
        assert!((jet.du - ux).abs() < 1e-14);
        assert!((jet.dux - u).abs() < 1e-14);
        assert!((jet.dut - 1.0).abs() < 1e-14);
        assert!((jet.duxx + 0.01).abs() < 1e-14);
    }

    #[test]
    fn burgers_residual_hand_values() {
        // nu = 0, u == c constant: residual 0
        let b = ResidualForm::Burgers { nu: 0.0 };
        let r = b.eval(&[0.3, 0.2], 2.5f64, 0.0, 0.0, 0.0);
        assert_eq!(r, 0.0);
        // u(x,t) = x: residual = 0 + x * 1 - 0 = x at x = 0.4
        let b = ResidualForm::Burgers { nu: 0.001 / PI };
        let r = b.eval(&[0.4, 0.1], 0.4f64, 1.0, 0.0, 0.0);
        assert!((r - 0.4).abs() < 1e-15);
    }

    #[test]
    fn case2_initial_data_comes_from_oracle() {
        let p = ProblemSpec::burgers(0.008 / PI, (0.6, 0.8));
        let h = p.ic_value(0.4).unwrap();
        let direct = oracles::burgers_viscous(0.008 / PI, 0.4, 0.6).unwrap();
        assert_eq!(h, direct);
        let p0 = ProblemSpec::burgers(0.001 / PI, (0.0, 0.9));
        assert!((p0.ic_value(0.5).unwrap() + 1.0).abs() < 1e-12);
    }
}
