//! Dense feed-forward networks: the PINN body, DeepONet branch/trunk nets,
//! and the affine bias transform. Parameters live in one flat `f64` vector
//! so optimizers and checkpoints can treat every network uniformly.

pub mod batch;
pub(crate) mod fastmath;

use crate::autodiff::{NodeId, Scalar, Tape};
use crate::error::{Error, Result};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Deterministic, splittable random source. Splitting selects an independent
/// ChaCha stream under the same seed, so concurrent runs draw non-overlapping
/// sequences while staying reproducible.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn split(&self, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream);
        Rng { seed: self.seed, inner }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        Uniform::new(lo, hi).sample(&mut self.inner)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::contract(format!("unknown activation '{other}'"))),
        }
    }
}

/// One dense network: layer widths (input first, output last), hidden
/// activation, and the flat weights-and-biases vector. Layout per layer:
/// weight matrix row-major (out x in), then biases. The output layer is
/// always affine.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    widths: Vec<usize>,
    activation: Activation,
    values: Vec<f64>,
}

/// Flat parameter count for an architecture.
pub fn param_len(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl NetworkParams {
    /// Glorot-uniform weights (bounds +-sqrt(6/(fan_in+fan_out))), zero biases.
    pub fn init(widths: &[usize], activation: Activation, rng: &mut Rng) -> Result<Self> {
        Self::validate_widths(widths)?;
        let mut values = vec![0.0; param_len(widths)];
        let mut off = 0;
        for w in widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in values[off..off + fan_in * fan_out].iter_mut() {
                *v = rng.uniform(-bound, bound);
            }
            off += fan_in * fan_out + fan_out; // biases stay zero
        }
        Ok(NetworkParams { widths: widths.to_vec(), activation, values })
    }

    pub fn zeros(widths: &[usize], activation: Activation) -> Result<Self> {
        Self::validate_widths(widths)?;
        Ok(NetworkParams {
            widths: widths.to_vec(),
            activation,
            values: vec![0.0; param_len(widths)],
        })
    }

    pub fn from_values(widths: &[usize], activation: Activation, values: Vec<f64>) -> Result<Self> {
        Self::validate_widths(widths)?;
        if values.len() != param_len(widths) {
            return Err(Error::contract(format!(
                "parameter vector length {} does not match architecture {:?} (expected {})",
                values.len(),
                widths,
                param_len(widths)
            )));
        }
        Ok(NetworkParams { widths: widths.to_vec(), activation, values })
    }

    fn validate_widths(widths: &[usize]) -> Result<()> {
        if widths.len() < 2 {
            return Err(Error::contract(format!(
                "architecture needs at least input and output widths, got {widths:?}"
            )));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(Error::contract(format!("zero layer width in {widths:?}")));
        }
        Ok(())
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// (weight offset, bias offset, fan_in, fan_out) per layer.
    pub(crate) fn layer_offsets(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.widths.len() - 1);
        let mut off = 0;
        for w in self.widths.windows(2) {
            out.push((off, off + w[0] * w[1], w[0], w[1]));
            off += w[0] * w[1] + w[1];
        }
        out
    }

    /// Plain affine-activation composition on `f64`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.forward_generic(x)
    }

    /// Forward pass in any scalar algebra (used with duals for input
    /// derivatives of small nets, and with `f64` for evaluation).
    pub fn forward_generic<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.input_width() {
            return Err(Error::contract(format!(
                "input dimension {} does not match network input width {}",
                x.len(),
                self.input_width()
            )));
        }
        let n_layers = self.widths.len() - 1;
        let mut act = x.to_vec();
        for (l, (w_off, b_off, fan_in, fan_out)) in self.layer_offsets().into_iter().enumerate() {
            let mut next = Vec::with_capacity(fan_out);
            for o in 0..fan_out {
                let row = &self.values[w_off + o * fan_in..w_off + (o + 1) * fan_in];
                let mut z = S::from_f64(self.values[b_off + o]);
                for (wi, &a) in row.iter().zip(act.iter()) {
                    z = z + S::from_f64(*wi) * a;
                }
                next.push(if l + 1 < n_layers {
                    match self.activation {
                        Activation::Tanh => z.tanh(),
                        Activation::Relu => z.relu(),
                        Activation::Identity => z,
                    }
                } else {
                    z
                });
            }
            act = next;
        }
        Ok(act)
    }

    /// Record the forward pass on a tape whose inputs are the coordinates.
    /// Parameters enter as constants; gradients flow to the inputs.
    pub fn record_forward_inputs<S: Scalar>(
        &self,
        tape: &mut Tape<S>,
        x_ids: &[NodeId],
    ) -> Result<Vec<NodeId>> {
        if x_ids.len() != self.input_width() {
            return Err(Error::contract(format!(
                "input dimension {} does not match network input width {}",
                x_ids.len(),
                self.input_width()
            )));
        }
        let n_layers = self.widths.len() - 1;
        let mut act = x_ids.to_vec();
        for (l, (w_off, b_off, fan_in, fan_out)) in self.layer_offsets().into_iter().enumerate() {
            let mut next = Vec::with_capacity(fan_out);
            for o in 0..fan_out {
                let mut z = tape.constant(self.values[b_off + o])?;
                for (i, &a) in act.iter().enumerate() {
                    let w = tape.constant(self.values[w_off + o * fan_in + i])?;
                    let prod = tape.mul(w, a)?;
                    z = tape.add(z, prod)?;
                }
                next.push(if l + 1 < n_layers {
                    match self.activation {
                        Activation::Tanh => tape.tanh(z)?,
                        Activation::Relu => tape.relu(z)?,
                        Activation::Identity => z,
                    }
                } else {
                    z
                });
            }
            act = next;
        }
        Ok(act)
    }

    /// Record the forward pass on a tape whose inputs are the parameters
    /// (one input node per flat parameter, in layout order). Coordinates
    /// enter as constants; gradients flow to the parameters.
    pub fn record_forward_params<S: Scalar>(
        &self,
        tape: &mut Tape<S>,
        param_ids: &[NodeId],
        x: &[f64],
    ) -> Result<Vec<NodeId>> {
        if param_ids.len() != self.values.len() {
            return Err(Error::contract(format!(
                "parameter id count {} does not match parameter length {}",
                param_ids.len(),
                self.values.len()
            )));
        }
        if x.len() != self.input_width() {
            return Err(Error::contract(format!(
                "input dimension {} does not match network input width {}",
                x.len(),
                self.input_width()
            )));
        }
        let n_layers = self.widths.len() - 1;
        let mut act: Vec<NodeId> = x
            .iter()
            .map(|&v| tape.constant(v))
            .collect::<Result<_>>()?;
        for (l, (w_off, b_off, fan_in, fan_out)) in self.layer_offsets().into_iter().enumerate() {
            let mut next = Vec::with_capacity(fan_out);
            for o in 0..fan_out {
                let mut z = param_ids[b_off + o];
                for (i, &a) in act.iter().enumerate() {
                    let prod = tape.mul(param_ids[w_off + o * fan_in + i], a)?;
                    z = tape.add(z, prod)?;
                }
                next.push(if l + 1 < n_layers {
                    match self.activation {
                        Activation::Tanh => tape.tanh(z)?,
                        Activation::Relu => tape.relu(z)?,
                        Activation::Identity => z,
                    }
                } else {
                    z
                });
            }
            act = next;
        }
        Ok(act)
    }
}
