//! Physics-informed network training: PDE residual evaluation, loss
//! assembly over point sets, and the vanilla single-network baseline.

use crate::autodiff::{input_derivative, DerivOrder};
use crate::error::{Error, Result};
use crate::nn::{batch, Activation, NetworkParams, Rng};
use crate::optim::{adam_step, AdamState};
use crate::problems::{PointSets, ProblemSpec};
use ndarray::{Array1, Array2, ArrayView2};

/// Loss components of one epoch; `total = w1 pde + w2 data + w3 mismatch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub pde: f64,
    pub data: f64,
    pub mismatch: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub include_bc: bool,
}

/// PDE residual N[u_theta] at one point, with every input derivative taken
/// through the tape (dual-seeded reverse sweeps).
pub fn residual(problem: &ProblemSpec, net: &NetworkParams, point: &[f64]) -> Result<f64> {
    if point.len() != net.input_width() {
        return Err(Error::contract(format!(
            "point dimension {} does not match network input width {}",
            point.len(),
            net.input_width()
        )));
    }
    let form = problem.residual;
    let u = net.forward(point)?[0];
    let eval = |t: &mut crate::autodiff::Tape<crate::autodiff::Dual>,
                ids: &[crate::autodiff::NodeId]| {
        Ok(net.record_forward_inputs(t, ids)?[0])
    };
    let ux = input_derivative(eval, point, 0, DerivOrder::First)?;
    let ut = if form.needs_time() {
        input_derivative(
            |t, ids| Ok(net.record_forward_inputs(t, ids)?[0]),
            point,
            1,
            DerivOrder::First,
        )?
    } else {
        0.0
    };
    let uxx = if form.needs_second() {
        input_derivative(
            |t, ids| Ok(net.record_forward_inputs(t, ids)?[0]),
            point,
            0,
            DerivOrder::Second,
        )?
    } else {
        0.0
    };
    Ok(form.eval(point, u, ux, ut, uxx))
}

/// Mean squared residual over the given points (tape evaluation path).
pub fn loss_pde(problem: &ProblemSpec, net: &NetworkParams, points: ArrayView2<f64>) -> Result<f64> {
    if points.nrows() == 0 {
        return Err(Error::contract("loss_pde requires at least one residual point"));
    }
    let mut acc = 0.0;
    for row in points.rows() {
        let r = residual(problem, net, row.as_slice().unwrap())?;
        acc += r * r;
    }
    Ok(acc / points.nrows() as f64)
}

/// Boundary + initial mean squared mismatch; `include_bc = false` omits the
/// boundary term entirely.
pub fn loss_data(
    net: &NetworkParams,
    boundary: ArrayView2<f64>,
    boundary_values: &[f64],
    initial: ArrayView2<f64>,
    initial_values: &[f64],
    include_bc: bool,
) -> Result<f64> {
    let use_bc = include_bc && boundary.nrows() > 0;
    let use_ic = initial.nrows() > 0;
    if include_bc && boundary.nrows() == 0 && initial.nrows() == 0 {
        return Err(Error::contract("loss_data requires boundary or initial points"));
    }
    let mut total = 0.0;
    if use_bc {
        let mut acc = 0.0;
        for (row, &g) in boundary.rows().into_iter().zip(boundary_values) {
            let u = net.forward(row.as_slice().unwrap())?[0];
            acc += (u - g) * (u - g);
        }
        total += acc / boundary.nrows() as f64;
    }
    if use_ic {
        let mut acc = 0.0;
        for (row, &h) in initial.rows().into_iter().zip(initial_values) {
            let u = net.forward(row.as_slice().unwrap())?[0];
            acc += (u - h) * (u - h);
        }
        total += acc / initial.nrows() as f64;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Batched loss engine shared by the vanilla baseline and the coupled trainer
// ---------------------------------------------------------------------------

pub(crate) struct BatchLoss<'a> {
    pub problem: &'a ProblemSpec,
    pub points: &'a PointSets,
    pub include_bc: bool,
}

impl BatchLoss<'_> {
    pub(crate) fn jet_spec(&self) -> batch::JetSpec {
        batch::JetSpec {
            x_axis: 0,
            t_axis: self.problem.residual.needs_time().then_some(1),
            second: self.problem.residual.needs_second(),
        }
    }

    /// Mean squared residual; accumulates `w1 * d(pde)/d(theta)` into `grads`.
    pub(crate) fn pde(&self, net: &NetworkParams, w1: f64, grads: &mut [f64]) -> Result<f64> {
        let pts = &self.points.residual;
        let n = pts.nrows();
        if n == 0 {
            return Err(Error::contract("empty residual set"));
        }
        let jets = batch::forward_jet(net, pts.view(), self.jet_spec())?;
        let zero = Array1::zeros(n);
        let ut = jets.ut.as_ref().unwrap_or(&zero);
        let uxx = jets.uxx.as_ref().unwrap_or(&zero);

        let mut loss = 0.0;
        let c = w1 * 2.0 / n as f64;
        let mut du = Array1::zeros(n);
        let mut dux = Array1::zeros(n);
        let mut dut = jets.ut.is_some().then(|| Array1::zeros(n));
        let mut duxx = jets.uxx.is_some().then(|| Array1::zeros(n));
        for i in 0..n {
            let point = pts.row(i);
            let jet = self.problem.residual.with_partials(
                point.as_slice().unwrap(),
                jets.u[i],
                jets.ux[i],
                ut[i],
                uxx[i],
            );
            loss += jet.r * jet.r;
            du[i] = c * jet.r * jet.du;
            dux[i] = c * jet.r * jet.dux;
            if let Some(d) = dut.as_mut() {
                d[i] = c * jet.r * jet.dut;
            }
            if let Some(d) = duxx.as_mut() {
                d[i] = c * jet.r * jet.duxx;
            }
        }
        let adj = batch::JetAdjoint { du, dux, dut, duxx };
        batch::backward_jet(net, &jets, &adj, grads);
        Ok(loss / n as f64)
    }

    /// Data loss; accumulates `w2 * d(data)/d(theta)` into `grads`.
    pub(crate) fn data(&self, net: &NetworkParams, w2: f64, grads: &mut [f64]) -> Result<f64> {
        let mut total = 0.0;
        if self.include_bc && self.points.boundary.nrows() > 0 {
            total += self.squared_mismatch(
                net,
                self.points.boundary.view(),
                &self.points.boundary_values,
                w2,
                grads,
            )?;
        }
        if self.points.initial.nrows() > 0 {
            total += self.squared_mismatch(
                net,
                self.points.initial.view(),
                &self.points.initial_values,
                w2,
                grads,
            )?;
        }
        Ok(total)
    }

    fn squared_mismatch(
        &self,
        net: &NetworkParams,
        pts: ArrayView2<f64>,
        targets: &[f64],
        weight: f64,
        grads: &mut [f64],
    ) -> Result<f64> {
        let n = pts.nrows();
        let cache = batch::forward_values(net, pts)?;
        let mut adj = Array2::zeros((n, 1));
        let mut loss = 0.0;
        for i in 0..n {
            let e = cache.output()[[i, 0]] - targets[i];
            loss += e * e;
            adj[[i, 0]] = weight * 2.0 / n as f64 * e;
        }
        batch::backward_values(net, &cache, adj.view(), grads);
        Ok(loss / n as f64)
    }
}

/// Vanilla PINN baseline: Adam on `loss_pde + loss_data` with unit weights.
pub fn train_vanilla(
    problem: &ProblemSpec,
    widths: &[usize],
    points: &PointSets,
    config: &TrainConfig,
) -> Result<(NetworkParams, Vec<LossBreakdown>)> {
    let mut rng = Rng::new(config.seed);
    let mut net = NetworkParams::init(widths, Activation::Tanh, &mut rng)?;
    let engine = BatchLoss { problem, points, include_bc: config.include_bc };
    let mut adam = AdamState::new(net.len(), config.learning_rate);
    let mut history = Vec::with_capacity(config.epochs);
    let mut grads = vec![0.0; net.len()];
    for epoch in 0..config.epochs {
        grads.fill(0.0);
        let pde = engine.pde(&net, 1.0, &mut grads)?;
        let data = engine.data(&net, 1.0, &mut grads)?;
        let total = pde + data;
        if !total.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(LossBreakdown { pde, data, mismatch: 0.0, total });
        adam_step(&mut adam, net.values_mut(), &grads, epoch)?;
    }
    Ok((net, history))
}
