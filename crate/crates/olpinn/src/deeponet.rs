//! Bias-augmented deep operator network: G(f)(x) = sum_k b_k(f) t_k(x) + W(x),
//! where the branch encodes the discretized input function, the trunk encodes
//! the query coordinate, and W is an affine transform of the coordinate added
//! as a bias. Pretrained offline on a smooth problem family, then frozen.

use crate::error::{Error, Result};
use crate::nn::{batch, Activation, NetworkParams, Rng};
use crate::optim::{adam_step, AdamState};
use crate::problems::OperatorDataset;
use ndarray::{Array2, ArrayView2};

/// Shape of the branch input plus the affine normalization applied to raw
/// inputs before the branch net (scalar parameter ranges are mapped to
/// [-1, 1]).
#[derive(Debug, Clone, PartialEq)]
pub struct InputDescriptor {
    pub m: usize,
    pub normalize: Option<(f64, f64)>,
}

impl InputDescriptor {
    pub fn apply(&self, f_repr: &[f64]) -> Vec<f64> {
        match self.normalize {
            Some((lo, hi)) if hi > lo => f_repr
                .iter()
                .map(|&v| 2.0 * (v - lo) / (hi - lo) - 1.0)
                .collect(),
            _ => f_repr.to_vec(),
        }
    }
}

/// Architecture descriptor: hidden widths plus the shared embedding width p.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepONetArch {
    pub branch_hidden: Vec<usize>,
    pub branch_activation: Activation,
    pub trunk_hidden: Vec<usize>,
    pub trunk_activation: Activation,
    pub p: usize,
}

impl DeepONetArch {
    pub fn branch_widths(&self, m: usize) -> Vec<usize> {
        let mut w = vec![m];
        w.extend(&self.branch_hidden);
        w.push(self.p);
        w
    }

    pub fn trunk_widths(&self, dim: usize) -> Vec<usize> {
        let mut w = vec![dim];
        w.extend(&self.trunk_hidden);
        w.push(self.p);
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeepONetModel {
    pub branch: NetworkParams,
    pub trunk: NetworkParams,
    pub bias_transform: NetworkParams,
    pub p: usize,
    pub input: InputDescriptor,
}

impl DeepONetModel {
    pub fn new(
        branch: NetworkParams,
        trunk: NetworkParams,
        bias_transform: NetworkParams,
        input: InputDescriptor,
    ) -> Result<Self> {
        let p = branch.output_width();
        if trunk.output_width() != p {
            return Err(Error::contract(format!(
                "branch output width {} != trunk output width {}",
                p,
                trunk.output_width()
            )));
        }
        if bias_transform.input_width() != trunk.input_width()
            || bias_transform.output_width() != 1
        {
            return Err(Error::contract(
                "bias transform must map the trunk input to one output",
            ));
        }
        if branch.input_width() != input.m {
            return Err(Error::contract(format!(
                "branch input width {} != descriptor m {}",
                branch.input_width(),
                input.m
            )));
        }
        Ok(DeepONetModel { branch, trunk, bias_transform, p, input })
    }

    /// G(f)(x) at one query point.
    pub fn predict(&self, f_repr: &[f64], x: &[f64]) -> Result<f64> {
        if f_repr.len() != self.input.m {
            return Err(Error::contract(format!(
                "f_repr length {} != m {}",
                f_repr.len(),
                self.input.m
            )));
        }
        let b = self.branch.forward(&self.input.apply(f_repr))?;
        let t = self.trunk.forward(x)?;
        let w = self.bias_transform.forward(x)?[0];
        Ok(b.iter().zip(&t).map(|(bi, ti)| bi * ti).sum::<f64>() + w)
    }

    /// Pointwise predictions over a grid (rows of `grid`), order preserved.
    pub fn predict_grid(&self, f_repr: &[f64], grid: ArrayView2<f64>) -> Result<Vec<f64>> {
        if f_repr.len() != self.input.m {
            return Err(Error::contract(format!(
                "f_repr length {} != m {}",
                f_repr.len(),
                self.input.m
            )));
        }
        let b = self.branch.forward(&self.input.apply(f_repr))?;
        let t = batch::forward_values(&self.trunk, grid)?;
        let w = batch::forward_values(&self.bias_transform, grid)?;
        let tv = t.output();
        let wv = w.output();
        Ok((0..grid.nrows())
            .map(|i| {
                b.iter()
                    .zip(tv.row(i))
                    .map(|(bi, ti)| bi * ti)
                    .sum::<f64>()
                    + wv[[i, 0]]
            })
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Stop early once the training MSE drops below this.
    pub early_stop_mse: f64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig { epochs: 50_000, learning_rate: 1e-3, seed: 0, early_stop_mse: 1e-7 }
    }
}

pub(crate) fn gather_params(nets: &[&NetworkParams]) -> Vec<f64> {
    let mut flat = Vec::with_capacity(nets.iter().map(|n| n.len()).sum());
    for n in nets {
        flat.extend_from_slice(n.values());
    }
    flat
}

pub(crate) fn scatter_params(nets: &mut [&mut NetworkParams], flat: &[f64]) {
    let mut off = 0;
    for n in nets.iter_mut() {
        let len = n.len();
        n.values_mut().copy_from_slice(&flat[off..off + len]);
        off += len;
    }
}

/// Full-batch Adam minimization of the mean-squared prediction error over
/// every (sample, query point) pair, exploiting the shared query grid: the
/// branch runs once per sample and the trunk once per grid point per epoch.
pub fn pretrain(
    dataset: &OperatorDataset,
    arch: &DeepONetArch,
    config: &PretrainConfig,
) -> Result<(DeepONetModel, Vec<f64>)> {
    if dataset.n_samples() == 0 || dataset.n_points() == 0 {
        return Err(Error::contract("pretraining needs a nonempty dataset"));
    }
    let m = dataset.m();
    let dim = dataset.grid.ncols();
    let mut rng = Rng::new(config.seed);
    let mut branch = NetworkParams::init(&arch.branch_widths(m), arch.branch_activation, &mut rng)?;
    let mut trunk = NetworkParams::init(&arch.trunk_widths(dim), arch.trunk_activation, &mut rng)?;
    let mut bias = NetworkParams::init(&[dim, 1], Activation::Identity, &mut rng)?;

    // Scalar parameter families are normalized to [-1, 1] over their range.
    let normalize = if m == 1 {
        let lo = dataset.f_reprs.column(0).iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = dataset.f_reprs.column(0).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi > lo).then_some((lo, hi))
    } else {
        None
    };
    let descriptor = InputDescriptor { m, normalize };

    let mut branch_in = dataset.f_reprs.clone();
    if let Some((lo, hi)) = normalize {
        branch_in.mapv_inplace(|v| 2.0 * (v - lo) / (hi - lo) - 1.0);
    }

    let n_s = dataset.n_samples();
    let n_j = dataset.n_points();
    let scale = 2.0 / (n_s * n_j) as f64;

    let mut flat = gather_params(&[&branch, &trunk, &bias]);
    let mut adam = AdamState::new(flat.len(), config.learning_rate);
    let mut history = Vec::new();

    for epoch in 0..config.epochs {
        scatter_params(&mut [&mut branch, &mut trunk, &mut bias], &flat);
        let bc = batch::forward_values(&branch, branch_in.view())?;
        let tc = batch::forward_values(&trunk, dataset.grid.view())?;
        let wc = batch::forward_values(&bias, dataset.grid.view())?;

        // predictions P = B T^T + 1 w^T, error E = P - Y
        let mut err = bc.output().dot(&tc.output().t());
        for (mut row, _) in err.rows_mut().into_iter().zip(0..) {
            row += &wc.output().column(0);
        }
        err -= &dataset.targets;
        let mse = err.iter().map(|e| e * e).sum::<f64>() / (n_s * n_j) as f64;
        if !mse.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(mse);
        if mse < config.early_stop_mse {
            break;
        }

        let mut grads = vec![0.0; flat.len()];
        let db = err.dot(tc.output()) * scale;
        let dt = err.t().dot(bc.output()) * scale;
        let mut dw = Array2::zeros((n_j, 1));
        for (j, col) in err.columns().into_iter().enumerate() {
            dw[[j, 0]] = col.sum() * scale;
        }
        let (b_len, t_len) = (branch.len(), trunk.len());
        batch::backward_values(&branch, &bc, db.view(), &mut grads[..b_len]);
        batch::backward_values(&trunk, &tc, dt.view(), &mut grads[b_len..b_len + t_len]);
        batch::backward_values(&bias, &wc, dw.view(), &mut grads[b_len + t_len..]);
        adam_step(&mut adam, &mut flat, &grads, epoch)?;
    }
    scatter_params(&mut [&mut branch, &mut trunk, &mut bias], &flat);
    let model = DeepONetModel::new(branch, trunk, bias, descriptor)?;
    Ok((model, history))
}
