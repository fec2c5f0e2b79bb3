//! Coupled two-network training: a PINN carrying the physics loss and a
//! DeepONet-shaped correction network fed by the frozen pretrained
//! operator's prediction, tied together by a mean-square mismatch penalty
//! on a large derivative-free collocation set.

use crate::deeponet::{gather_params, scatter_params, DeepONetModel};
use crate::error::{Error, Result};
use crate::nn::{batch, Activation, NetworkParams, Rng};
use crate::optim::{adam_step, AdamState};
use crate::pinn::{BatchLoss, LossBreakdown};
use crate::problems::{PointSets, ProblemSpec};
use ndarray::{Array2, ArrayView2};

/// Loss weights (w1, w2, w3); w1 = w2 always.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlpinnWeights {
    w1: f64,
    w2: f64,
    w3: f64,
}

impl OlpinnWeights {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Result<Self> {
        if w1 != w2 {
            return Err(Error::contract(format!(
                "residual and data weights must match (w1 = w2), got {w1} and {w2}"
            )));
        }
        if w1 <= 0.0 || w3 <= 0.0 {
            return Err(Error::contract("loss weights must be positive"));
        }
        Ok(OlpinnWeights { w1, w2, w3 })
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }
    pub fn w2(&self) -> f64 {
        self.w2
    }
    pub fn w3(&self) -> f64 {
        self.w3
    }
}

/// Mean squared mismatch between the two networks' outputs on the
/// collocation set.
pub fn mismatch_loss(u_op: &[f64], u_pinn: &[f64]) -> Result<f64> {
    if u_op.len() != u_pinn.len() {
        return Err(Error::contract(format!(
            "mismatch length {} vs {}",
            u_op.len(),
            u_pinn.len()
        )));
    }
    if u_op.is_empty() {
        return Err(Error::contract("mismatch loss needs at least one collocation point"));
    }
    Ok(u_op
        .iter()
        .zip(u_pinn)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / u_op.len() as f64)
}

/// Architecture of the correction network (hidden widths + embedding width).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionArch {
    pub branch_hidden: Vec<usize>,
    pub branch_activation: Activation,
    pub trunk_hidden: Vec<usize>,
    pub trunk_activation: Activation,
    pub p: usize,
}

/// The trainable correction network u_Op: branch over the pretrained
/// prediction sampled on a fixed coarse grid, trunk over
/// (coordinates, u-tilde at the coordinates), plus an affine bias transform
/// of the trunk input.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionNetwork {
    pub branch: NetworkParams,
    pub trunk: NetworkParams,
    pub bias_transform: NetworkParams,
    pub p: usize,
}

impl CorrectionNetwork {
    pub fn init(arch: &CorrectionArch, coarse_len: usize, dim: usize, rng: &mut Rng) -> Result<Self> {
        let mut bw = vec![coarse_len];
        bw.extend(&arch.branch_hidden);
        bw.push(arch.p);
        let mut tw = vec![dim + 1];
        tw.extend(&arch.trunk_hidden);
        tw.push(arch.p);
        let branch = NetworkParams::init(&bw, arch.branch_activation, rng)?;
        let trunk = NetworkParams::init(&tw, arch.trunk_activation, rng)?;
        let bias_transform = NetworkParams::init(&[dim + 1, 1], Activation::Identity, rng)?;
        Ok(CorrectionNetwork { branch, trunk, bias_transform, p: arch.p })
    }

    /// Trunk input rows: coordinates with the pretrained prediction appended
    /// as one extra channel.
    pub fn trunk_inputs(coords: ArrayView2<f64>, u_tilde: &[f64]) -> Result<Array2<f64>> {
        if coords.nrows() != u_tilde.len() {
            return Err(Error::contract(format!(
                "coordinate rows {} vs u-tilde values {}",
                coords.nrows(),
                u_tilde.len()
            )));
        }
        let mut out = Array2::zeros((coords.nrows(), coords.ncols() + 1));
        for (i, row) in coords.rows().into_iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                out[[i, j]] = v;
            }
            out[[i, coords.ncols()]] = u_tilde[i];
        }
        Ok(out)
    }

    /// u_Op over arbitrary coordinates given the fixed coarse-grid branch
    /// input and the pretrained prediction at those coordinates.
    pub fn predict(
        &self,
        u_tilde_coarse: &[f64],
        coords: ArrayView2<f64>,
        u_tilde_at_coords: &[f64],
    ) -> Result<Vec<f64>> {
        let b = self.branch.forward(u_tilde_coarse)?;
        let trunk_in = Self::trunk_inputs(coords, u_tilde_at_coords)?;
        let t = batch::forward_values(&self.trunk, trunk_in.view())?;
        let w = batch::forward_values(&self.bias_transform, trunk_in.view())?;
        Ok((0..coords.nrows())
            .map(|i| {
                b.iter()
                    .zip(t.output().row(i))
                    .map(|(bi, ti)| bi * ti)
                    .sum::<f64>()
                    + w.output()[[i, 0]]
            })
            .collect())
    }
}

/// Per-component loss of the coupled objective at the current parameters
/// (evaluation path; the trainer computes the same quantities batched).
#[allow(clippy::too_many_arguments)]
pub fn total_loss(
    problem: &ProblemSpec,
    pinn_net: &NetworkParams,
    correction: &CorrectionNetwork,
    u_tilde_coarse: &[f64],
    u_tilde_collocation: &[f64],
    points: &PointSets,
    weights: &OlpinnWeights,
    include_bc: bool,
) -> Result<LossBreakdown> {
    let pde = crate::pinn::loss_pde(problem, pinn_net, points.residual.view())?;
    let data = crate::pinn::loss_data(
        pinn_net,
        points.boundary.view(),
        &points.boundary_values,
        points.initial.view(),
        &points.initial_values,
        include_bc,
    )?;
    let u_op = correction.predict(u_tilde_coarse, points.collocation.view(), u_tilde_collocation)?;
    let u_pinn = batch::forward_values(pinn_net, points.collocation.view())?.output_scalar();
    let mismatch = mismatch_loss(&u_op, u_pinn.as_slice().unwrap())?;
    let total = weights.w1 * pde + weights.w2 * data + weights.w3 * mismatch;
    Ok(LossBreakdown { pde, data, mismatch, total })
}

#[derive(Debug, Clone)]
pub struct OlpinnTrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub include_bc: bool,
}

/// Trained networks plus the per-epoch loss history.
pub struct OlpinnOutcome {
    pub pinn: NetworkParams,
    pub correction: CorrectionNetwork,
    pub history: Vec<LossBreakdown>,
    /// Network input-derivative evaluations performed over the whole run
    /// (one per residual point per epoch; collocation points need none).
    pub derivative_evals: u64,
}

/// Joint Adam training of the PINN and the correction network (Algorithm
/// summary: evaluate the frozen operator once, then minimize
/// w1 PDE + w2 Data + w3 mismatch over both parameter vectors).
///
/// Training details fixed here (see the repository notes):
/// - the pretrained model is evaluated once, before the loop, on the coarse
///   branch grid and the collocation set; it is never touched afterwards;
/// - the PINN output head starts at zero and the correction network's bias
///   transform starts as the identity on the u-tilde channel, so training
///   starts from u_PINN = 0 and u_Op = u-tilde;
/// - the data loss anchors both networks' outputs (the mismatch term alone
///   transmits boundary information too slowly through the w3 coupling).
#[allow(clippy::too_many_arguments)]
pub fn train(
    problem: &ProblemSpec,
    pretrained: &DeepONetModel,
    f_repr: &[f64],
    pinn_widths: &[usize],
    correction_arch: &CorrectionArch,
    coarse_grid: ArrayView2<f64>,
    points: &PointSets,
    weights: &OlpinnWeights,
    config: &OlpinnTrainConfig,
) -> Result<OlpinnOutcome> {
    if points.collocation.nrows() == 0 {
        return Err(Error::contract("coupled training needs collocation points"));
    }
    // Frozen-operator predictions, computed once.
    let u_tilde_coarse = pretrained.predict_grid(f_repr, coarse_grid)?;
    let u_tilde_c = pretrained.predict_grid(f_repr, points.collocation.view())?;
    let trunk_in_c = CorrectionNetwork::trunk_inputs(points.collocation.view(), &u_tilde_c)?;

    let mut rng = Rng::new(config.seed);
    let mut pinn = NetworkParams::init(pinn_widths, Activation::Tanh, &mut rng)?;
    zero_output_head(&mut pinn);
    let mut correction =
        CorrectionNetwork::init(correction_arch, u_tilde_coarse.len(), problem.dim(), &mut rng)?;
    warm_start_bias_transform(&mut correction.bias_transform);

    // Data-loss inputs for the correction network: boundary and initial
    // points with the pretrained prediction appended.
    let u_tilde_b = pretrained.predict_grid(f_repr, points.boundary.view())?;
    let trunk_in_b = CorrectionNetwork::trunk_inputs(points.boundary.view(), &u_tilde_b)?;
    let u_tilde_0 = pretrained.predict_grid(f_repr, points.initial.view())?;
    let trunk_in_0 = CorrectionNetwork::trunk_inputs(points.initial.view(), &u_tilde_0)?;

    let engine = BatchLoss { problem, points, include_bc: config.include_bc };
    let coarse_in =
        Array2::from_shape_vec((1, u_tilde_coarse.len()), u_tilde_coarse.clone()).unwrap();

    let lens = [pinn.len(), correction.branch.len(), correction.trunk.len(), correction.bias_transform.len()];
    let mut flat = gather_params(&[&pinn, &correction.branch, &correction.trunk, &correction.bias_transform]);
    let mut adam = AdamState::new(flat.len(), config.learning_rate);
    let mut grads = vec![0.0; flat.len()];
    let mut history = Vec::with_capacity(config.epochs);
    let mut derivative_evals = 0u64;

    let (o1, o2, o3) = (lens[0], lens[0] + lens[1], lens[0] + lens[1] + lens[2]);

    for epoch in 0..config.epochs {
        scatter_params(
            &mut [&mut pinn, &mut correction.branch, &mut correction.trunk, &mut correction.bias_transform],
            &flat,
        );
        grads.fill(0.0);

        let pde = engine.pde(&pinn, weights.w1, &mut grads[..o1])?;
        derivative_evals += points.residual.nrows() as u64;
        let mut data = engine.data(&pinn, weights.w2, &mut grads[..o1])?;

        // Correction-network passes share the branch forward.
        let bc = batch::forward_values(&correction.branch, coarse_in.view())?;
        let b_row = bc.output().row(0).to_owned();
        let mut branch_adj = Array2::zeros((1, correction.p));

        // Mismatch term on the collocation set.
        let tc = batch::forward_values(&correction.trunk, trunk_in_c.view())?;
        let wc = batch::forward_values(&correction.bias_transform, trunk_in_c.view())?;
        let pc = batch::forward_values(&pinn, points.collocation.view())?;
        let n_c = points.collocation.nrows();
        let mut mismatch = 0.0;
        let mut ce = Array2::zeros((n_c, 1));
        let mut trunk_adj = Array2::zeros((n_c, correction.p));
        for i in 0..n_c {
            let u_op = b_row.dot(&tc.output().row(i)) + wc.output()[[i, 0]];
            let e = u_op - pc.output()[[i, 0]];
            mismatch += e * e;
            let c = weights.w3 * 2.0 / n_c as f64 * e;
            ce[[i, 0]] = c;
            for k in 0..correction.p {
                trunk_adj[[i, k]] = c * b_row[k];
                branch_adj[[0, k]] += c * tc.output()[[i, k]];
            }
        }
        mismatch /= n_c as f64;
        batch::backward_values(&correction.trunk, &tc, trunk_adj.view(), &mut grads[o2..o3]);
        batch::backward_values(&correction.bias_transform, &wc, ce.view(), &mut grads[o3..]);
        let neg_ce = ce.mapv(|v| -v);
        batch::backward_values(&pinn, &pc, neg_ce.view(), &mut grads[..o1]);

        // Data anchoring of the correction network (boundary + initial).
        if config.include_bc && trunk_in_b.nrows() > 0 {
            data += correction_data_term(
                &correction,
                &b_row,
                trunk_in_b.view(),
                &points.boundary_values,
                weights.w2,
                &mut grads[o1..],
                &mut branch_adj,
                lens,
            )?;
        }
        if trunk_in_0.nrows() > 0 {
            data += correction_data_term(
                &correction,
                &b_row,
                trunk_in_0.view(),
                &points.initial_values,
                weights.w2,
                &mut grads[o1..],
                &mut branch_adj,
                lens,
            )?;
        }
        batch::backward_values(&correction.branch, &bc, branch_adj.view(), &mut grads[o1..o2]);

        let total = weights.w1 * pde + weights.w2 * data + weights.w3 * mismatch;
        if !total.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(LossBreakdown { pde, data, mismatch, total });
        adam_step(&mut adam, &mut flat, &grads, epoch)?;
    }
    scatter_params(
        &mut [&mut pinn, &mut correction.branch, &mut correction.trunk, &mut correction.bias_transform],
        &flat,
    );
    Ok(OlpinnOutcome { pinn, correction, history, derivative_evals })
}

/// Mean squared data mismatch of u_Op on one anchored point set; accumulates
/// trunk/bias gradients directly and the branch adjoint into `branch_adj`.
#[allow(clippy::too_many_arguments)]
fn correction_data_term(
    correction: &CorrectionNetwork,
    b_row: &ndarray::Array1<f64>,
    trunk_in: ArrayView2<f64>,
    targets: &[f64],
    w2: f64,
    grads_after_pinn: &mut [f64],
    branch_adj: &mut Array2<f64>,
    lens: [usize; 4],
) -> Result<f64> {
    let n = trunk_in.nrows();
    let tv = batch::forward_values(&correction.trunk, trunk_in)?;
    let wv = batch::forward_values(&correction.bias_transform, trunk_in)?;
    let mut loss = 0.0;
    let mut adj = Array2::zeros((n, 1));
    let mut trunk_adj = Array2::zeros((n, correction.p));
    for i in 0..n {
        let u_op = b_row.dot(&tv.output().row(i)) + wv.output()[[i, 0]];
        let e = u_op - targets[i];
        loss += e * e;
        let c = w2 * 2.0 / n as f64 * e;
        adj[[i, 0]] = c;
        for k in 0..correction.p {
            trunk_adj[[i, k]] = c * b_row[k];
            branch_adj[[0, k]] += c * tv.output()[[i, k]];
        }
    }
    let (b_len, t_len) = (lens[1], lens[2]);
    batch::backward_values(&correction.trunk, &tv, trunk_adj.view(), &mut grads_after_pinn[b_len..b_len + t_len]);
    batch::backward_values(&correction.bias_transform, &wv, adj.view(), &mut grads_after_pinn[b_len + t_len..]);
    Ok(loss / n as f64)
}

/// Zero the output layer's weights and bias so the network starts at u = 0.
fn zero_output_head(net: &mut NetworkParams) {
    let (w_off, _, _, _) = *net.layer_offsets().last().unwrap();
    for v in net.values_mut()[w_off..].iter_mut() {
        *v = 0.0;
    }
}

/// Start the bias transform as the identity on the appended u-tilde channel
/// (last input), so u_Op is the pretrained prediction plus a small random
/// perturbation at epoch zero.
fn warm_start_bias_transform(bias: &mut NetworkParams) {
    let dim = bias.input_width();
    for v in bias.values_mut().iter_mut() {
        *v = 0.0;
    }
    bias.values_mut()[dim - 1] = 1.0;
}
