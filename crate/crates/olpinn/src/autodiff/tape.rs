//! Reverse-mode automatic differentiation over a scalar operation tape.
//!
//! The tape is generic over the scalar algebra: recorded with `f64` values it
//! yields plain gradients in one reverse sweep; recorded with [`Dual`] values
//! seeded on one input coordinate, the same reverse sweep carries tangents
//! through every adjoint, so the adjoint of the seeded input holds both the
//! first and the second derivative with respect to that coordinate
//! (forward-over-reverse).

use super::dual::Dual;
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Input,
    Const,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Powf(u32, f64),
    Sin(u32),
    Cos(u32),
    Cosh(u32),
    Exp(u32),
    Tanh(u32),
    Relu(u32),
    Max(u32, u32),
}

#[derive(Debug, Clone)]
struct Node<S> {
    op: Op,
    val: S,
}

/// Operation tape: a topologically ordered scalar computation graph with
/// cached values. Inputs are recorded first; one node is designated the
/// output by [`Tape::record`].
#[derive(Debug, Clone)]
pub struct Tape<S: Scalar> {
    nodes: Vec<Node<S>>,
    n_inputs: usize,
    output: Option<NodeId>,
    has_relu: bool,
}

impl<S: Scalar> Tape<S> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new(), n_inputs: 0, output: None, has_relu: false }
    }

    pub fn with_inputs(values: &[S]) -> Self {
        let mut t = Tape::new();
        for &v in values {
            t.nodes.push(Node { op: Op::Input, val: v });
        }
        t.n_inputs = values.len();
        t
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn input(&self, i: usize) -> NodeId {
        assert!(i < self.n_inputs, "input index out of range");
        NodeId(i as u32)
    }

    pub fn input_ids(&self) -> Vec<NodeId> {
        (0..self.n_inputs as u32).map(NodeId).collect()
    }

    pub fn value(&self, id: NodeId) -> S {
        self.nodes[id.index()].val
    }

    pub fn output(&self) -> Option<NodeId> {
        self.output
    }

    pub fn set_output(&mut self, id: NodeId) {
        assert!(id.index() < self.nodes.len(), "output id out of range");
        self.output = Some(id);
    }

    pub fn contains_relu(&self) -> bool {
        self.has_relu
    }

    fn push(&mut self, op: Op, val: S, name: &'static str) -> Result<NodeId> {
        if !val.is_finite() {
            return Err(Error::Domain { node: self.nodes.len(), op: name });
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node { op, val });
        Ok(id)
    }

    pub fn constant(&mut self, v: f64) -> Result<NodeId> {
        self.push(Op::Const, S::from_f64(v), "const")
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a) + self.value(b);
        self.push(Op::Add(a.0, b.0), v, "add")
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a) - self.value(b);
        self.push(Op::Sub(a.0, b.0), v, "sub")
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a) * self.value(b);
        self.push(Op::Mul(a.0, b.0), v, "mul")
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.value(b).value() == 0.0 {
            return Err(Error::Domain { node: self.nodes.len(), op: "div by zero" });
        }
        let v = self.value(a) / self.value(b);
        self.push(Op::Div(a.0, b.0), v, "div")
    }

    pub fn neg(&mut self, a: NodeId) -> Result<NodeId> {
        let v = -self.value(a);
        self.push(Op::Neg(a.0), v, "neg")
    }

    pub fn powf(&mut self, a: NodeId, exponent: f64) -> Result<NodeId> {
        let base = self.value(a).value();
        if base < 0.0 && exponent.fract() != 0.0 {
            return Err(Error::Domain { node: self.nodes.len(), op: "pow: negative base, fractional exponent" });
        }
        if base == 0.0 && exponent < 0.0 {
            return Err(Error::Domain { node: self.nodes.len(), op: "pow: zero base, negative exponent" });
        }
        let v = self.value(a).powf(exponent);
        self.push(Op::Powf(a.0, exponent), v, "pow")
    }

    pub fn sin(&mut self, a: NodeId) -> Result<NodeId> {
        let v = self.value(a).sin();
        self.push(Op::Sin(a.0), v, "sin")
    }

    pub fn cos(&mut self, a: NodeId) -> Result<NodeId> {
        let v = self.value(a).cos();
        self.push(Op::Cos(a.0), v, "cos")
    }

    pub fn cosh(&mut self, a: NodeId) -> Result<NodeId> {
        let v = self.value(a).cosh();
        self.push(Op::Cosh(a.0), v, "cosh")
    }

    pub fn exp(&mut self, a: NodeId) -> Result<NodeId> {
        let v = self.value(a).exp();
        self.push(Op::Exp(a.0), v, "exp")
    }

    pub fn tanh(&mut self, a: NodeId) -> Result<NodeId> {
        let v = self.value(a).tanh();
        self.push(Op::Tanh(a.0), v, "tanh")
    }

    pub fn relu(&mut self, a: NodeId) -> Result<NodeId> {
        let v = self.value(a).relu();
        self.has_relu = true;
        self.push(Op::Relu(a.0), v, "relu")
    }

    pub fn max(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).max(self.value(b));
        self.push(Op::Max(a.0, b.0), v, "max")
    }

    /// Forward value of the designated output node.
    pub fn output_value(&self) -> Result<S> {
        let out = self
            .output
            .ok_or_else(|| Error::contract("tape has no designated output node"))?;
        Ok(self.value(out))
    }

    /// Reverse sweep: adjoints of every node with respect to the output,
    /// computed in the tape's scalar algebra. Returns the adjoints of the
    /// requested input nodes.
    pub fn gradient(&self, wrt: &[NodeId]) -> Result<Vec<S>> {
        let out = self
            .output
            .ok_or_else(|| Error::contract("gradient requires a designated scalar output node"))?;
        for id in wrt {
            if id.index() >= self.n_inputs {
                return Err(Error::contract(format!(
                    "gradient target {} is not an input node (inputs: 0..{})",
                    id.index(),
                    self.n_inputs
                )));
            }
        }
        let n = self.nodes.len();
        let zero = S::zero();
        let mut adj = vec![zero; n];
        adj[out.index()] = S::one();
        for i in (0..n).rev() {
            let a_out = adj[i];
            if a_out == zero {
                continue;
            }
            match self.nodes[i].op {
                Op::Input | Op::Const => {}
                Op::Add(a, b) => {
                    adj[a as usize] = adj[a as usize] + a_out;
                    adj[b as usize] = adj[b as usize] + a_out;
                }
                Op::Sub(a, b) => {
                    adj[a as usize] = adj[a as usize] + a_out;
                    adj[b as usize] = adj[b as usize] - a_out;
                }
                Op::Mul(a, b) => {
                    let va = self.nodes[a as usize].val;
                    let vb = self.nodes[b as usize].val;
                    adj[a as usize] = adj[a as usize] + a_out * vb;
                    adj[b as usize] = adj[b as usize] + a_out * va;
                }
                Op::Div(a, b) => {
                    let vb = self.nodes[b as usize].val;
                    let q = self.nodes[i].val; // a / b
                    adj[a as usize] = adj[a as usize] + a_out / vb;
                    adj[b as usize] = adj[b as usize] - a_out * q / vb;
                }
                Op::Neg(a) => {
                    adj[a as usize] = adj[a as usize] - a_out;
                }
                Op::Powf(a, e) => {
                    let va = self.nodes[a as usize].val;
                    let d = va.powf(e - 1.0) * S::from_f64(e);
                    adj[a as usize] = adj[a as usize] + a_out * d;
                }
                Op::Sin(a) => {
                    let va = self.nodes[a as usize].val;
                    adj[a as usize] = adj[a as usize] + a_out * va.cos();
                }
                Op::Cos(a) => {
                    let va = self.nodes[a as usize].val;
                    adj[a as usize] = adj[a as usize] - a_out * va.sin();
                }
                Op::Cosh(a) => {
                    let va = self.nodes[a as usize].val;
                    adj[a as usize] = adj[a as usize] + a_out * va.sinh();
                }
                Op::Exp(a) => {
                    let v = self.nodes[i].val;
                    adj[a as usize] = adj[a as usize] + a_out * v;
                }
                Op::Tanh(a) => {
                    let t = self.nodes[i].val;
                    adj[a as usize] = adj[a as usize] + a_out * (S::one() - t * t);
                }
                Op::Relu(a) => {
                    if self.nodes[a as usize].val.value() > 0.0 {
                        adj[a as usize] = adj[a as usize] + a_out;
                    }
                }
                Op::Max(a, b) => {
                    if self.nodes[a as usize].val.value() >= self.nodes[b as usize].val.value() {
                        adj[a as usize] = adj[a as usize] + a_out;
                    } else {
                        adj[b as usize] = adj[b as usize] + a_out;
                    }
                }
            }
        }
        Ok(wrt.iter().map(|id| adj[id.index()]).collect())
    }
}

impl<S: Scalar> Default for Tape<S> {
    fn default() -> Self {
        Tape::new()
    }
}

/// Record an expression over the given inputs and designate its output node.
pub fn record<S, F>(inputs: &[S], build: F) -> Result<Tape<S>>
where
    S: Scalar,
    F: FnOnce(&mut Tape<S>, &[NodeId]) -> Result<NodeId>,
{
    let mut tape = Tape::with_inputs(inputs);
    let ids = tape.input_ids();
    let out = build(&mut tape, &ids)?;
    tape.set_output(out);
    Ok(tape)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
}

/// First or second derivative of a recorded scalar expression with respect
/// to one input coordinate.
///
/// The expression is recorded over duals seeded on `point[axis]`. Order one
/// reads the forward tangent of the output; order two threads the duals
/// through a reverse sweep and reads the tangent of the seeded input's
/// adjoint.
pub fn input_derivative<F>(eval: F, point: &[f64], axis: usize, order: DerivOrder) -> Result<f64>
where
    F: FnOnce(&mut Tape<Dual>, &[NodeId]) -> Result<NodeId>,
{
    if axis >= point.len() {
        return Err(Error::contract(format!(
            "axis {axis} out of range for {}-dimensional point",
            point.len()
        )));
    }
    let seeded: Vec<Dual> = point
        .iter()
        .enumerate()
        .map(|(i, &v)| if i == axis { Dual::variable(v) } else { Dual::constant(v) })
        .collect();
    let tape = record(&seeded, eval)?;
    super::counters::count_derivative_evals(1);
    match order {
        DerivOrder::First => Ok(tape.output_value()?.tangent),
        DerivOrder::Second => {
            if tape.contains_relu() {
                return Err(Error::Unsupported(
                    "second input derivative through a relu-activated tape".into(),
                ));
            }
            let adj = tape.gradient(&[tape.input(axis)])?;
            Ok(adj[0].tangent)
        }
    }
}
