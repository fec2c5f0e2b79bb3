//! Per-benchmark experiment recipes: architectures, dataset shapes, point
//! counts, default weights and schedules.

use super::config::Benchmark;
use crate::deeponet::DeepONetArch;
use crate::error::{Error, Result};
use crate::nn::Activation;
use crate::olpinn::CorrectionArch;
use crate::problems::points::{linspace, PointCounts};
use crate::problems::{ParameterFamily, ProblemSpec};
use ndarray::Array2;
use std::f64::consts::PI;

impl Benchmark {
    pub fn problem(&self, parameter: f64) -> Result<ProblemSpec> {
        match self {
            Benchmark::DiffusionReaction => Ok(ProblemSpec::diffusion_reaction(parameter)),
            Benchmark::BurgersCase1 => {
                if parameter < 0.0 {
                    return Err(Error::Config(format!("negative viscosity {parameter}")));
                }
                Ok(ProblemSpec::burgers(parameter, (0.0, 0.9)))
            }
            Benchmark::BurgersCase2 => {
                if parameter <= 0.0 {
                    return Err(Error::Config("case II needs a positive viscosity".into()));
                }
                Ok(ProblemSpec::burgers(parameter, (0.6, 0.8)))
            }
        }
    }

    /// Smooth problem family the operator network is pretrained on.
    pub fn pretrain_family(&self) -> ParameterFamily {
        match self {
            Benchmark::DiffusionReaction => ParameterFamily {
                range: (0.0, 1.0),
                n_samples: 100,
                make: ProblemSpec::diffusion_reaction,
            },
            Benchmark::BurgersCase1 => ParameterFamily {
                range: (0.02 / PI, 0.06 / PI),
                n_samples: 40,
                make: |nu| ProblemSpec::burgers(nu, (0.0, 0.9)),
            },
            Benchmark::BurgersCase2 => ParameterFamily {
                range: (0.005 / PI, 0.01 / PI),
                n_samples: 100,
                make: |nu| ProblemSpec::burgers(nu, (0.0, 0.6)),
            },
        }
    }

    /// (x, t) grid sizes for the pretraining dataset.
    pub fn pretrain_grid(&self) -> (usize, usize) {
        match self {
            Benchmark::DiffusionReaction => (51, 1),
            Benchmark::BurgersCase1 => (50, 50),
            Benchmark::BurgersCase2 => (100, 201),
        }
    }

    pub fn pretrain_arch(&self) -> DeepONetArch {
        match self {
            Benchmark::DiffusionReaction => DeepONetArch {
                branch_hidden: vec![6],
                branch_activation: Activation::Tanh,
                trunk_hidden: vec![3],
                trunk_activation: Activation::Tanh,
                p: 3,
            },
            Benchmark::BurgersCase1 | Benchmark::BurgersCase2 => DeepONetArch {
                branch_hidden: vec![32],
                branch_activation: Activation::Relu,
                trunk_hidden: vec![24, 24, 24],
                trunk_activation: Activation::Tanh,
                p: 8,
            },
        }
    }

    pub fn pinn_widths(&self) -> Vec<usize> {
        match self {
            Benchmark::DiffusionReaction => vec![1, 128, 128, 1],
            Benchmark::BurgersCase1 | Benchmark::BurgersCase2 => vec![2, 128, 128, 128, 1],
        }
    }

    pub fn correction_arch(&self, parameter: f64) -> CorrectionArch {
        match self {
            Benchmark::DiffusionReaction => CorrectionArch {
                branch_hidden: vec![6],
                branch_activation: Activation::Tanh,
                trunk_hidden: vec![3],
                trunk_activation: Activation::Tanh,
                p: 3,
            },
            Benchmark::BurgersCase1 => {
                if parameter == 0.0 {
                    CorrectionArch {
                        branch_hidden: vec![32],
                        branch_activation: Activation::Relu,
                        trunk_hidden: vec![8],
                        trunk_activation: Activation::Tanh,
                        p: 8,
                    }
                } else {
                    CorrectionArch {
                        branch_hidden: vec![32],
                        branch_activation: Activation::Relu,
                        trunk_hidden: vec![24, 24, 24],
                        trunk_activation: Activation::Tanh,
                        p: 8,
                    }
                }
            }
            Benchmark::BurgersCase2 => CorrectionArch {
                branch_hidden: vec![32],
                branch_activation: Activation::Relu,
                trunk_hidden: vec![24, 24, 24],
                trunk_activation: Activation::Tanh,
                p: 8,
            },
        }
    }

    /// Fixed coarse grid on which the pretrained prediction feeds the
    /// correction branch. Case II uses the pretraining history grid; the
    /// others tile the solve domain.
    pub fn coarse_grid(&self, parameter: f64, include_bc: bool) -> Array2<f64> {
        match self {
            Benchmark::DiffusionReaction => {
                let xs = linspace(-1.0, 1.0, 51);
                let mut g = Array2::zeros((51, 1));
                for (i, &x) in xs.iter().enumerate() {
                    g[[i, 0]] = x;
                }
                g
            }
            Benchmark::BurgersCase1 => {
                let n = if parameter == 0.0 {
                    4
                } else if include_bc {
                    16
                } else {
                    32
                };
                tensor_grid(n, (-1.0, 1.0), n, (0.0, 0.9))
            }
            Benchmark::BurgersCase2 => tensor_grid(100, (-1.0, 1.0), 201, (0.0, 0.6)),
        }
    }

    pub fn point_counts(&self) -> PointCounts {
        match self {
            Benchmark::DiffusionReaction => PointCounts {
                residual_x: 6,
                residual_t: 1,
                boundary_t: 1,
                initial_x: 0,
                collocation_x: 201,
                collocation_t: 1,
                test_x: 81,
                test_t: 1,
            },
            Benchmark::BurgersCase1 => PointCounts {
                residual_x: 51,
                residual_t: 10,
                boundary_t: 51,
                initial_x: 101,
                collocation_x: 201,
                collocation_t: 101,
                test_x: 111,
                test_t: 91,
            },
            Benchmark::BurgersCase2 => PointCounts {
                residual_x: 21,
                residual_t: 3,
                boundary_t: 51,
                initial_x: 101,
                collocation_x: 201,
                collocation_t: 51,
                test_x: 301,
                test_t: 41,
            },
        }
    }

    pub fn default_weights(&self, parameter: f64) -> (f64, f64, f64) {
        match self {
            Benchmark::DiffusionReaction => (1.0, 1.0, 200.0),
            Benchmark::BurgersCase1 => {
                if parameter == 0.0 {
                    (1.0, 1.0, 10.0)
                } else {
                    (5.0, 5.0, 50.0)
                }
            }
            Benchmark::BurgersCase2 => (1.0, 1.0, 100.0),
        }
    }

    pub fn default_epochs(&self) -> usize {
        match self {
            Benchmark::DiffusionReaction => 10_000,
            Benchmark::BurgersCase1 => 20_000,
            Benchmark::BurgersCase2 => 6_000,
        }
    }

    pub fn default_learning_rate(&self) -> f64 {
        1e-3
    }

    /// Time level at which solution profiles are exported (the paper's
    /// comparison slice); `None` for stationary problems.
    pub fn profile_time(&self) -> Option<f64> {
        match self {
            Benchmark::DiffusionReaction => None,
            Benchmark::BurgersCase1 | Benchmark::BurgersCase2 => Some(0.8),
        }
    }
}

fn tensor_grid(nx: usize, xr: (f64, f64), nt: usize, tr: (f64, f64)) -> Array2<f64> {
    let xs = linspace(xr.0, xr.1, nx);
    let ts = linspace(tr.0, tr.1, nt);
    let mut g = Array2::zeros((nx * nt, 2));
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
