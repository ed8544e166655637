//! Reverse-mode differentiation over an explicit tape.
//!
//! Nodes are appended in evaluation order, so the tape order is already a
//! topological order. [`Tape::backward`] walks it once from the loss down to
//! the first node, accumulating adjoints into every node that (transitively)
//! depends on a parameter leaf.
//!
//! Only the primitives the encoder, decoder and loss functions need are
//! provided; there is no general broadcasting. Bias addition is its own
//! primitive ([`Tape::add_row`]).

use crate::error::{Error, Result};
use crate::numcore::Matrix;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Entrywise functions with registered derivative rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Elementwise {
    Tanh,
    Relu,
    Sigmoid,
    Exp,
    /// `x + 1` for `x > 0`, `exp(x)` otherwise: the hypersphere penalty.
    ExpLinear,
}

impl Elementwise {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Elementwise::Tanh => x.tanh(),
            Elementwise::Relu => x.max(0.0),
            Elementwise::Sigmoid => sigmoid(x),
            Elementwise::Exp => x.exp(),
            Elementwise::ExpLinear => {
                if x > 0.0 {
                    x + 1.0
                } else {
                    x.exp()
                }
            }
        }
    }

    /// Derivative at input `x`, given the already computed output `y`.
    pub fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Elementwise::Tanh => 1.0 - y * y,
            // subgradient 0 at the kink
            Elementwise::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Elementwise::Sigmoid => y * (1.0 - y),
            Elementwise::Exp => y,
            Elementwise::ExpLinear => {
                if x > 0.0 {
                    1.0
                } else {
                    y
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Elementwise::Tanh => "tanh",
            Elementwise::Relu => "relu",
            Elementwise::Sigmoid => "sigmoid",
            Elementwise::Exp => "exp",
            Elementwise::ExpLinear => "explinear",
        }
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// The primitive that produced a node, with its parents.
#[derive(Debug, Clone)]
pub enum Op {
    Leaf,
    MatMul(Var, Var),
    /// `a · bᵀ`
    MatMulT(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    /// Hadamard product.
    Mul(Var, Var),
    /// Adds a 1×c row to every row of an r×c matrix.
    AddRow(Var, Var),
    Scale(Var, f64),
    AddScalar(Var, f64),
    Map(Var, Elementwise),
    SelectRows(Var, Vec<usize>),
    /// Per-row sum of squares, r×c → r×1.
    RowSquaredNorm(Var),
    /// Sum of all entries, → 1×1.
    Sum(Var),
}

#[derive(Debug, Clone)]
pub struct Node {
    pub value: Matrix,
    pub op: Op,
    pub requires_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: Var) -> &Node {
        &self.nodes[v.0]
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    /// Scalar value of a 1×1 node.
    pub fn scalar(&self, v: Var) -> Result<f64> {
        self.value(v).to_scalar()
    }

    /// A differentiable leaf.
    pub fn param(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// A leaf that receives no gradient.
    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, false)
    }

    fn push(&mut self, value: Matrix, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn derived(&mut self, value: Matrix, op: Op, parents: &[Var]) -> Var {
        let requires_grad = parents.iter().any(|p| self.nodes[p.0].requires_grad);
        self.push(value, op, requires_grad)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        Ok(self.derived(value, Op::MatMul(a, b), &[a, b]))
    }

    pub fn matmul_t(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul_t(self.value(b))?;
        Ok(self.derived(value, Op::MatMulT(a, b), &[a, b]))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).zip_map(self.value(b), "add", |x, y| x + y)?;
        Ok(self.derived(value, Op::Add(a, b), &[a, b]))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).zip_map(self.value(b), "sub", |x, y| x - y)?;
        Ok(self.derived(value, Op::Sub(a, b), &[a, b]))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).zip_map(self.value(b), "mul", |x, y| x * y)?;
        Ok(self.derived(value, Op::Mul(a, b), &[a, b]))
    }

    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (m, r) = (self.value(a), self.value(row));
        if r.rows() != 1 || r.cols() != m.cols() {
            return Err(Error::Dimension {
                op: "add_row",
                left: m.shape(),
                right: r.shape(),
            });
        }
        let mut value = m.clone();
        for i in 0..value.rows() {
            for (v, b) in value.row_mut(i).iter_mut().zip(r.as_slice()) {
                *v += b;
            }
        }
        Ok(self.derived(value, Op::AddRow(a, row), &[a, row]))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let value = self.value(a).scale(factor);
        self.derived(value, Op::Scale(a, factor), &[a])
    }

    pub fn add_scalar(&mut self, a: Var, shift: f64) -> Var {
        let value = self.value(a).map(|v| v + shift);
        self.derived(value, Op::AddScalar(a, shift), &[a])
    }

    pub fn map(&mut self, a: Var, f: Elementwise) -> Var {
        let value = self.value(a).map(|v| f.eval(v));
        self.derived(value, Op::Map(a, f), &[a])
    }

    pub fn select_rows(&mut self, a: Var, rows: &[usize]) -> Result<Var> {
        let value = self.value(a).select_rows(rows)?;
        Ok(self.derived(value, Op::SelectRows(a, rows.to_vec()), &[a]))
    }

    pub fn row_squared_norm(&mut self, a: Var) -> Var {
        let m = self.value(a);
        let data = (0..m.rows()).map(|i| m.row(i).iter().map(|v| v * v).sum()).collect();
        let value = Matrix::from_vec(m.rows(), 1, data).expect("row count matches");
        self.derived(value, Op::RowSquaredNorm(a), &[a])
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Matrix::scalar(self.value(a).sum());
        self.derived(value, Op::Sum(a), &[a])
    }

    /// Mean of all entries, as `sum · 1/len`.
    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let len = self.value(a).len();
        if len == 0 {
            return Err(Error::contract("mean of an empty matrix"));
        }
        let total = self.sum(a);
        Ok(self.scale(total, 1.0 / len as f64))
    }

    /// Propagates adjoints from a 1×1 `loss` back to every node it depends on.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let seed = self.value(loss);
        if seed.shape() != (1, 1) {
            return Err(Error::contract(format!(
                "backward needs a scalar loss, got {}x{}",
                seed.rows(),
                seed.cols()
            )));
        }
        let mut grads: Vec<Option<Matrix>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Matrix::scalar(1.0));

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            self.propagate(node, &g, &mut grads)?;
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, node: &Node, g: &Matrix, grads: &mut [Option<Matrix>]) -> Result<()> {
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.wants(*a) {
                    let da = g.matmul_t(self.value(*b))?;
                    accumulate(grads, *a, da)?;
                }
                if self.wants(*b) {
                    let db = self.value(*a).t_matmul(g)?;
                    accumulate(grads, *b, db)?;
                }
            }
            Op::MatMulT(a, b) => {
                if self.wants(*a) {
                    let da = g.matmul(self.value(*b))?;
                    accumulate(grads, *a, da)?;
                }
                if self.wants(*b) {
                    let db = g.t_matmul(self.value(*a))?;
                    accumulate(grads, *b, db)?;
                }
            }
            Op::Add(a, b) => {
                if self.wants(*a) {
                    accumulate(grads, *a, g.clone())?;
                }
                if self.wants(*b) {
                    accumulate(grads, *b, g.clone())?;
                }
            }
            Op::Sub(a, b) => {
                if self.wants(*a) {
                    accumulate(grads, *a, g.clone())?;
                }
                if self.wants(*b) {
                    accumulate(grads, *b, g.scale(-1.0))?;
                }
            }
            Op::Mul(a, b) => {
                if self.wants(*a) {
                    let da = g.zip_map(self.value(*b), "mul_backward", |x, y| x * y)?;
                    accumulate(grads, *a, da)?;
                }
                if self.wants(*b) {
                    let db = g.zip_map(self.value(*a), "mul_backward", |x, y| x * y)?;
                    accumulate(grads, *b, db)?;
                }
            }
            Op::AddRow(a, row) => {
                if self.wants(*a) {
                    accumulate(grads, *a, g.clone())?;
                }
                if self.wants(*row) {
                    let mut col_sums = Matrix::zeros(1, g.cols());
                    for i in 0..g.rows() {
                        for (s, v) in col_sums.as_mut_slice().iter_mut().zip(g.row(i)) {
                            *s += v;
                        }
                    }
                    accumulate(grads, *row, col_sums)?;
                }
            }
            Op::Scale(a, factor) => accumulate(grads, *a, g.scale(*factor))?,
            Op::AddScalar(a, _) => accumulate(grads, *a, g.clone())?,
            Op::Map(a, f) => {
                let x = self.value(*a);
                let data = x
                    .as_slice()
                    .iter()
                    .zip(node.value.as_slice())
                    .zip(g.as_slice())
                    .map(|((&x, &y), &g)| g * f.derivative(x, y))
                    .collect();
                accumulate(grads, *a, Matrix::from_vec(x.rows(), x.cols(), data)?)?;
            }
            Op::SelectRows(a, rows) => {
                let src = self.value(*a);
                let mut da = Matrix::zeros(src.rows(), src.cols());
                for (k, &i) in rows.iter().enumerate() {
                    for (d, v) in da.row_mut(i).iter_mut().zip(g.row(k)) {
                        *d += v;
                    }
                }
                accumulate(grads, *a, da)?;
            }
            Op::RowSquaredNorm(a) => {
                let x = self.value(*a);
                let mut da = x.scale(2.0);
                for i in 0..da.rows() {
                    let gi = g[(i, 0)];
                    da.row_mut(i).iter_mut().for_each(|v| *v *= gi);
                }
                accumulate(grads, *a, da)?;
            }
            Op::Sum(a) => {
                let (r, c) = self.value(*a).shape();
                accumulate(grads, *a, Matrix::filled(r, c, g[(0, 0)]))?;
            }
        }
        Ok(())
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }
}

fn accumulate(grads: &mut [Option<Matrix>], v: Var, delta: Matrix) -> Result<()> {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&delta),
        slot => {
            *slot = Some(delta);
            Ok(())
        }
    }
}

/// Adjoints produced by [`Tape::backward`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`, if the loss depends on it.
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient with respect to `v`, zero-filled when the loss does not reach it.
    pub fn wrt(&self, tape: &Tape, v: Var) -> Matrix {
        self.get(v).cloned().unwrap_or_else(|| {
            let (r, c) = tape.value(v).shape();
            Matrix::zeros(r, c)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_sum_is_all_ones() {
        let mut tape = Tape::new();
        let w = tape.param(Matrix::from_rows(&[[0.5, -2.0], [3.0, 1.0]]).unwrap());
        let loss = tape.sum(w);
        let g = tape.backward(loss).unwrap();
        assert_eq!(g.get(w).unwrap(), &Matrix::filled(2, 2, 1.0));
    }

    #[test]
    fn gradient_of_squared_norm() {
        let mut tape = Tape::new();
        let w = tape.param(Matrix::row_vector(&[1.0, 2.0]));
        let sq = tape.mul(w, w).unwrap();
        let loss = tape.sum(sq);
        let g = tape.backward(loss).unwrap();
        assert_eq!(g.get(w).unwrap(), &Matrix::row_vector(&[2.0, 4.0]));
    }

    #[test]
    fn non_scalar_loss_is_a_contract_error() {
        let mut tape = Tape::new();
        let w = tape.param(Matrix::zeros(2, 1));
        assert!(matches!(tape.backward(w), Err(Error::Contract(_))));
    }

    #[test]
    fn constants_receive_no_gradient() {
        let mut tape = Tape::new();
        let x = tape.constant(Matrix::from_rows(&[[1.0, 2.0]]).unwrap());
        let w = tape.param(Matrix::from_rows(&[[3.0], [4.0]]).unwrap());
        let y = tape.matmul(x, w).unwrap();
        let g = tape.backward(y).unwrap();
        assert!(g.get(x).is_none());
        assert_eq!(g.get(w).unwrap(), &Matrix::from_rows(&[[1.0], [2.0]]).unwrap());
    }

    #[test]
    fn scalar_activations() {
        assert_eq!(Elementwise::Tanh.eval(0.0), 0.0);
        assert_eq!(Elementwise::Sigmoid.eval(0.0), 0.5);
        assert!((Elementwise::Sigmoid.eval(1.0) - 0.731_058_578_630_004_9).abs() < 1e-15);
        assert_eq!(Elementwise::Relu.derivative(0.0, 0.0), 0.0);
        assert_eq!(Elementwise::ExpLinear.eval(0.0), 1.0);
        assert_eq!(Elementwise::ExpLinear.eval(1.0), 2.0);
    }

    #[test]
    fn reused_operand_accumulates() {
        // x xᵀ for a 1×2 row is ‖x‖², both operand slots feed the same leaf
        let mut tape = Tape::new();
        let x = tape.param(Matrix::row_vector(&[1.0, 2.0]));
        let xx = tape.matmul_t(x, x).unwrap();
        let loss = tape.sum(xx);
        let g = tape.backward(loss).unwrap();
        assert_eq!(g.get(x).unwrap(), &Matrix::row_vector(&[2.0, 4.0]));
    }
}
