//! Minimal reverse-mode automatic differentiation over dense `f64` matrices.
//!
//! Operations are recorded on a [`Tape`] in topological order; [`Tape::backward`]
//! replays them in reverse and accumulates gradients into every node. Leaves are
//! created with [`Tape::leaf`] and their gradients read back after the sweep.
//!
//! The op set is the minimum needed for small MLPs and the game losses:
//! matrix product, bias broadcast over the batch dimension, elementwise
//! relu/sigmoid/tanh/log/exp/multiply, row-wise log-softmax, sum/mean
//! reductions and scalar scaling. No graph optimization, no general
//! broadcasting.

use crate::error::{Error, Result};

/// Dense row-major matrix of 64-bit reals. Vectors are 1×n or n×1.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "tensor data length mismatch");
        Tensor { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn scalar(v: f64) -> Self {
        Tensor::new(1, 1, vec![v])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Tensor::new(r, c, data)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn shape_str(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Index of a node on a tape.
pub type NodeId = usize;

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(NodeId, NodeId),
    /// Adds a 1×n bias row to every row of a B×n matrix.
    AddRow(NodeId, NodeId),
    Add(NodeId, NodeId),
    Relu(NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    LogSoftmax(NodeId),
    Log(NodeId),
    Exp(NodeId),
    Mul(NodeId, NodeId),
    Sum(NodeId),
    Mean(NodeId),
    Scale(NodeId, f64),
}

#[derive(Debug, Clone)]
struct Node {
    value: Tensor,
    grad: Tensor,
    op: Op,
}

/// A recorded differentiable computation. Append-only; parents always
/// precede children, so a single reverse sweep implements the chain rule.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> NodeId {
        let grad = Tensor::zeros(value.rows, value.cols);
        self.nodes.push(Node { value, grad, op });
        self.nodes.len() - 1
    }

    /// Registers an input or parameter tensor.
    pub fn leaf(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Leaf)
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id].value
    }

    pub fn grad(&self, id: NodeId) -> &Tensor {
        &self.nodes[id].grad
    }

    /// Resets every gradient accumulator to zero.
    pub fn zero_grads(&mut self) {
        for node in &mut self.nodes {
            node.grad.data.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    fn shape_err(&self, op: &'static str, a: NodeId, b: NodeId) -> Error {
        Error::Shape {
            op,
            lhs: self.nodes[a].value.shape_str(),
            rhs: self.nodes[b].value.shape_str(),
        }
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ar, ac) = self.nodes[a].value.shape();
        let (br, bc) = self.nodes[b].value.shape();
        if ac != br {
            return Err(self.shape_err("matmul", a, b));
        }
        let mut out = Tensor::zeros(ar, bc);
        {
            let av = &self.nodes[a].value;
            let bv = &self.nodes[b].value;
            for i in 0..ar {
                for k in 0..ac {
                    let aik = av.get(i, k);
                    if aik == 0.0 {
                        continue;
                    }
                    for j in 0..bc {
                        out.data[i * bc + j] += aik * bv.get(k, j);
                    }
                }
            }
        }
        Ok(self.push(out, Op::MatMul(a, b)))
    }

    /// Broadcast-adds a 1×n row (bias) to each row of a B×n matrix.
    pub fn add_row(&mut self, x: NodeId, bias: NodeId) -> Result<NodeId> {
        let (_, xc) = self.nodes[x].value.shape();
        let (br, bc) = self.nodes[bias].value.shape();
        if br != 1 || bc != xc {
            return Err(self.shape_err("add_row", x, bias));
        }
        let mut out = self.nodes[x].value.clone();
        let bv = &self.nodes[bias].value;
        for i in 0..out.rows {
            for j in 0..out.cols {
                out.data[i * out.cols + j] += bv.data[j];
            }
        }
        Ok(self.push(out, Op::AddRow(x, bias)))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.nodes[a].value.shape() != self.nodes[b].value.shape() {
            return Err(self.shape_err("add", a, b));
        }
        let mut out = self.nodes[a].value.clone();
        for (o, v) in out.data.iter_mut().zip(&self.nodes[b].value.data) {
            *o += v;
        }
        Ok(self.push(out, Op::Add(a, b)))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.nodes[a].value.shape() != self.nodes[b].value.shape() {
            return Err(self.shape_err("mul", a, b));
        }
        let mut out = self.nodes[a].value.clone();
        for (o, v) in out.data.iter_mut().zip(&self.nodes[b].value.data) {
            *o *= v;
        }
        Ok(self.push(out, Op::Mul(a, b)))
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let mut out = self.nodes[x].value.clone();
        out.data.iter_mut().for_each(|v| *v = v.max(0.0));
        self.push(out, Op::Relu(x))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let mut out = self.nodes[x].value.clone();
        out.data.iter_mut().for_each(|v| *v = sigmoid(*v));
        self.push(out, Op::Sigmoid(x))
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let mut out = self.nodes[x].value.clone();
        out.data.iter_mut().for_each(|v| *v = v.tanh());
        self.push(out, Op::Tanh(x))
    }

    /// Row-wise log-softmax, stabilized by max subtraction.
    pub fn log_softmax(&mut self, x: NodeId) -> NodeId {
        let src = &self.nodes[x].value;
        let mut out = src.clone();
        for i in 0..out.rows {
            let row = &mut out.data[i * out.cols..(i + 1) * out.cols];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let log_z = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
            row.iter_mut().for_each(|v| *v -= log_z);
        }
        self.push(out, Op::LogSoftmax(x))
    }

    pub fn log(&mut self, x: NodeId) -> NodeId {
        let mut out = self.nodes[x].value.clone();
        out.data.iter_mut().for_each(|v| *v = v.ln());
        self.push(out, Op::Log(x))
    }

    pub fn exp(&mut self, x: NodeId) -> NodeId {
        let mut out = self.nodes[x].value.clone();
        out.data.iter_mut().for_each(|v| *v = v.exp());
        self.push(out, Op::Exp(x))
    }

    /// Sum over all entries, producing a 1×1 scalar.
    pub fn sum(&mut self, x: NodeId) -> NodeId {
        let s: f64 = self.nodes[x].value.data.iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(x))
    }

    /// Mean over all entries, producing a 1×1 scalar.
    pub fn mean(&mut self, x: NodeId) -> NodeId {
        let n = self.nodes[x].value.data.len() as f64;
        let s: f64 = self.nodes[x].value.data.iter().sum();
        self.push(Tensor::scalar(s / n), Op::Mean(x))
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> NodeId {
        let mut out = self.nodes[x].value.clone();
        out.data.iter_mut().for_each(|v| *v *= c);
        self.push(out, Op::Scale(x, c))
    }

    /// Reverse sweep from a scalar loss node. Each call adds ∂loss/∂node into
    /// every node's accumulator, so repeated calls without [`Tape::zero_grads`]
    /// accumulate.
    pub fn backward(&mut self, loss: NodeId) -> Result<()> {
        if !self.nodes[loss].value.is_scalar() {
            return Err(Error::Invalid(format!(
                "backward requires a scalar loss, got shape {}",
                self.nodes[loss].value.shape_str()
            )));
        }
        // Sweep on a local buffer so accumulation stays linear in the seed.
        let mut g: Vec<Tensor> = self
            .nodes
            .iter()
            .map(|n| Tensor::zeros(n.value.rows, n.value.cols))
            .collect();
        g[loss].data[0] = 1.0;
        for id in (0..=loss).rev() {
            match self.nodes[id].op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let gid = g[id].clone();
                    // dA = g Bᵀ
                    {
                        let bv = self.nodes[b].value.clone();
                        let ga = &mut g[a];
                        for i in 0..ga.rows {
                            for k in 0..ga.cols {
                                let mut acc = 0.0;
                                for j in 0..gid.cols {
                                    acc += gid.get(i, j) * bv.get(k, j);
                                }
                                ga.data[i * ga.cols + k] += acc;
                            }
                        }
                    }
                    // dB = Aᵀ g
                    {
                        let av = self.nodes[a].value.clone();
                        let gb = &mut g[b];
                        for k in 0..gb.rows {
                            for j in 0..gb.cols {
                                let mut acc = 0.0;
                                for i in 0..av.rows {
                                    acc += av.get(i, k) * gid.get(i, j);
                                }
                                gb.data[k * gb.cols + j] += acc;
                            }
                        }
                    }
                }
                Op::AddRow(x, bias) => {
                    let gid = g[id].clone();
                    for (gx, gv) in g[x].data.iter_mut().zip(&gid.data) {
                        *gx += gv;
                    }
                    let gb = &mut g[bias];
                    for i in 0..gid.rows {
                        for j in 0..gid.cols {
                            gb.data[j] += gid.get(i, j);
                        }
                    }
                }
                Op::Add(a, b) => {
                    let gid = g[id].clone();
                    for (ga, gv) in g[a].data.iter_mut().zip(&gid.data) {
                        *ga += gv;
                    }
                    for (gb, gv) in g[b].data.iter_mut().zip(&gid.data) {
                        *gb += gv;
                    }
                }
                Op::Mul(a, b) => {
                    let gid = g[id].clone();
                    let av = self.nodes[a].value.clone();
                    let bv = self.nodes[b].value.clone();
                    for ((ga, gv), bv) in g[a].data.iter_mut().zip(&gid.data).zip(&bv.data) {
                        *ga += gv * bv;
                    }
                    for ((gb, gv), av) in g[b].data.iter_mut().zip(&gid.data).zip(&av.data) {
                        *gb += gv * av;
                    }
                }
                Op::Relu(x) => {
                    let gid = g[id].clone();
                    let xv = self.nodes[x].value.clone();
                    let gx = &mut g[x];
                    // Subgradient at 0 is 0.
                    for ((gx, gv), xv) in gx.data.iter_mut().zip(&gid.data).zip(&xv.data) {
                        if *xv > 0.0 {
                            *gx += gv;
                        }
                    }
                }
                Op::Sigmoid(x) => {
                    let gid = g[id].clone();
                    let yv = self.nodes[id].value.clone();
                    let gx = &mut g[x];
                    for ((gx, gv), y) in gx.data.iter_mut().zip(&gid.data).zip(&yv.data) {
                        *gx += gv * y * (1.0 - y);
                    }
                }
                Op::Tanh(x) => {
                    let gid = g[id].clone();
                    let yv = self.nodes[id].value.clone();
                    let gx = &mut g[x];
                    for ((gx, gv), y) in gx.data.iter_mut().zip(&gid.data).zip(&yv.data) {
                        *gx += gv * (1.0 - y * y);
                    }
                }
                Op::LogSoftmax(x) => {
                    // dX = g − softmax(x) · rowsum(g)
                    let gid = g[id].clone();
                    let yv = self.nodes[id].value.clone();
                    let gx = &mut g[x];
                    for i in 0..gid.rows {
                        let row_sum: f64 = gid.row(i).iter().sum();
                        for j in 0..gid.cols {
                            gx.data[i * gid.cols + j] +=
                                gid.get(i, j) - yv.get(i, j).exp() * row_sum;
                        }
                    }
                }
                Op::Log(x) => {
                    let gid = g[id].clone();
                    let xv = self.nodes[x].value.clone();
                    let gx = &mut g[x];
                    for ((gx, gv), xv) in gx.data.iter_mut().zip(&gid.data).zip(&xv.data) {
                        *gx += gv / xv;
                    }
                }
                Op::Exp(x) => {
                    let gid = g[id].clone();
                    let yv = self.nodes[id].value.clone();
                    let gx = &mut g[x];
                    for ((gx, gv), y) in gx.data.iter_mut().zip(&gid.data).zip(&yv.data) {
                        *gx += gv * y;
                    }
                }
                Op::Sum(x) => {
                    let seed = g[id].data[0];
                    for gx in g[x].data.iter_mut() {
                        *gx += seed;
                    }
                }
                Op::Mean(x) => {
                    let n = self.nodes[x].value.data.len() as f64;
                    let seed = g[id].data[0] / n;
                    for gx in g[x].data.iter_mut() {
                        *gx += seed;
                    }
                }
                Op::Scale(x, c) => {
                    let gid = g[id].clone();
                    let gx = &mut g[x];
                    for (gx, gv) in gx.data.iter_mut().zip(&gid.data) {
                        *gx += gv * c;
                    }
                }
            }
        }
        for (node, gi) in self.nodes.iter_mut().zip(&g) {
            for (acc, gv) in node.grad.data.iter_mut().zip(&gi.data) {
                *acc += gv;
            }
        }
        Ok(())
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Central-difference gradient estimate, per coordinate:
/// `(f(x + h·eᵢ) − f(x − h·eᵢ)) / 2h`. Oracle for gradient checks and for
/// dynamics Jacobians; independent of the tape.
pub fn finite_difference_grad<F>(f: F, point: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if h <= 0.0 {
        return Err(Error::Invalid(format!("step h must be positive, got {h}")));
    }
    let mut grad = Vec::with_capacity(point.len());
    let mut x = point.to_vec();
    for i in 0..point.len() {
        x[i] = point[i] + h;
        let fp = f(&x)?;
        x[i] = point[i] - h;
        let fm = f(&x)?;
        x[i] = point[i];
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite(format!(
                "finite_difference_grad: f evaluated to {fp} / {fm} at coordinate {i}"
            )));
        }
        grad.push((fp - fm) / (2.0 * h));
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn relu_forward() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::new(1, 3, vec![-1.0, 0.0, 2.0]));
        let y = t.relu(x);
        assert_eq!(t.value(y).data, vec![0.0, 0.0, 2.0]);
    }

    #[test]
    fn sigmoid_at_zero() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::scalar(0.0));
        let y = t.sigmoid(x);
        assert_eq!(t.value(y).data[0], 0.5);
    }

    #[test]
    fn log_softmax_symmetric() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::new(1, 3, vec![0.0, 0.0, 0.0]));
        let y = t.log_softmax(x);
        for v in &t.value(y).data {
            assert_relative_eq!(*v, -(3.0f64.ln()), epsilon = 1e-15);
        }
    }

    #[test]
    fn log_softmax_rows_normalized() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::new(2, 4, vec![5.0, -3.0, 0.1, 100.0, 1.0, 2.0, 3.0, 4.0]));
        let y = t.log_softmax(x);
        for i in 0..2 {
            let s: f64 = t.value(y).row(i).iter().map(|v| v.exp()).sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn backward_square_sum() {
        let mut t = Tape::new();
        let w = t.leaf(Tensor::new(1, 2, vec![1.0, 2.0]));
        let sq = t.mul(w, w).unwrap();
        let loss = t.sum(sq);
        t.backward(loss).unwrap();
        assert_eq!(t.grad(w).data, vec![2.0, 4.0]);
    }

    #[test]
    fn backward_sigmoid_ce_at_zero() {
        // CE vs label 1 with logit u: loss = −ln σ(u); d/du = σ(u) − 1 = −0.5 at u=0.
        let mut t = Tape::new();
        let u = t.leaf(Tensor::scalar(0.0));
        let p = t.sigmoid(u);
        let lp = t.log(p);
        let loss = t.scale(lp, -1.0);
        t.backward(loss).unwrap();
        assert_relative_eq!(t.grad(u).data[0], -0.5, epsilon = 1e-15);
    }

    #[test]
    fn backward_requires_scalar() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::new(1, 2, vec![1.0, 2.0]));
        assert!(t.backward(x).is_err());
    }

    #[test]
    fn backward_accumulates() {
        let mut t = Tape::new();
        let w = t.leaf(Tensor::scalar(3.0));
        let sq = t.mul(w, w).unwrap();
        let loss = t.sum(sq);
        t.backward(loss).unwrap();
        t.backward(loss).unwrap();
        // Each sweep adds dloss/dw = 6: two calls accumulate to 12.
        assert_relative_eq!(t.grad(w).data[0], 12.0, epsilon = 1e-12);
    }

    #[test]
    fn matmul_shape_mismatch_reports_both_shapes() {
        let mut t = Tape::new();
        let a = t.leaf(Tensor::zeros(2, 3));
        let b = t.leaf(Tensor::zeros(2, 3));
        let err = t.matmul(a, b).unwrap_err().to_string();
        assert!(err.contains("2x3"), "{err}");
    }

    #[test]
    fn fd_quadratic() {
        let g = finite_difference_grad(|x| Ok(x[0] * x[0]), &[3.0], 1e-4).unwrap();
        assert_relative_eq!(g[0], 6.0, epsilon = 1e-6);
    }

    #[test]
    fn fd_constant() {
        let g = finite_difference_grad(|_| Ok(7.0), &[1.0, 2.0, 3.0], 1e-4).unwrap();
        assert_eq!(g, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn fd_rejects_bad_step() {
        assert!(finite_difference_grad(|x| Ok(x[0]), &[0.0], 0.0).is_err());
    }

    #[test]
    fn fd_propagates_non_finite() {
        assert!(finite_difference_grad(|x| Ok(x[0].ln()), &[0.0], 1e-3).is_err());
    }

    // Gradient check for each primitive against central differences.
    fn check_composite<F>(build: F, point: Vec<f64>)
    where
        F: Fn(&mut Tape, NodeId) -> NodeId,
    {
        let n = point.len();
        let eval = |x: &[f64]| -> Result<f64> {
            let mut t = Tape::new();
            let leaf = t.leaf(Tensor::new(1, n, x.to_vec()));
            let out = build(&mut t, leaf);
            Ok(t.value(out).data[0])
        };
        let fd = finite_difference_grad(eval, &point, 1e-5).unwrap();

        let mut t = Tape::new();
        let leaf = t.leaf(Tensor::new(1, n, point.clone()));
        let out = build(&mut t, leaf);
        t.backward(out).unwrap();
        let ad = &t.grad(leaf).data;
        for i in 0..n {
            let denom = fd[i].abs().max(1e-8);
            assert!(
                (ad[i] - fd[i]).abs() / denom < 1e-5,
                "coordinate {i}: ad={} fd={}",
                ad[i],
                fd[i]
            );
        }
    }

    #[test]
    fn gradcheck_primitives() {
        let p = vec![0.3, -0.7, 1.2, 0.05];
        check_composite(
            |t, x| {
                let y = t.sigmoid(x);
                t.mean(y)
            },
            p.clone(),
        );
        check_composite(
            |t, x| {
                let y = t.tanh(x);
                t.sum(y)
            },
            p.clone(),
        );
        check_composite(
            |t, x| {
                let y = t.log_softmax(x);
                let sq = t.mul(y, y).unwrap();
                t.mean(sq)
            },
            p.clone(),
        );
        check_composite(
            |t, x| {
                let y = t.exp(x);
                let ly = t.log(y);
                let m = t.mul(ly, y).unwrap();
                t.sum(m)
            },
            p.clone(),
        );
        // relu away from the kink
        check_composite(
            |t, x| {
                let y = t.relu(x);
                let s = t.scale(y, 2.5);
                t.sum(s)
            },
            vec![0.5, -0.5, 1.5, -2.0],
        );
    }

    #[test]
    fn gradcheck_matmul_chain() {
        // loss = mean(relu(xW + b) V) through a tiny affine chain.
        let w = vec![0.2, -0.1, 0.4, 0.3, 0.7, -0.6];
        let eval = |p: &[f64]| -> Result<f64> {
            let mut t = Tape::new();
            let x = t.leaf(Tensor::new(2, 3, vec![0.5, 1.0, -1.0, 0.3, 0.9, 0.2]));
            let wn = t.leaf(Tensor::new(3, 2, p.to_vec()));
            let b = t.leaf(Tensor::new(1, 2, vec![0.1, -0.2]));
            let h = t.matmul(x, wn)?;
            let hb = t.add_row(h, b)?;
            let a = t.tanh(hb);
            let m = t.mean(a);
            Ok(t.value(m).data[0])
        };
        let fd = finite_difference_grad(eval, &w, 1e-5).unwrap();

        let mut t = Tape::new();
        let x = t.leaf(Tensor::new(2, 3, vec![0.5, 1.0, -1.0, 0.3, 0.9, 0.2]));
        let wn = t.leaf(Tensor::new(3, 2, w.clone()));
        let b = t.leaf(Tensor::new(1, 2, vec![0.1, -0.2]));
        let h = t.matmul(x, wn).unwrap();
        let hb = t.add_row(h, b).unwrap();
        let a = t.tanh(hb);
        let loss = t.mean(a);
        t.backward(loss).unwrap();
        for (i, (ad, fd)) in t.grad(wn).data.iter().zip(&fd).enumerate() {
            assert!((ad - fd).abs() < 1e-7, "coordinate {i}: ad={ad} fd={fd}");
        }
    }

    #[test]
    fn forward_deterministic() {
        let run = || {
            let mut t = Tape::new();
            let x = t.leaf(Tensor::new(1, 3, vec![0.123, -4.56, 7.89]));
            let y = t.log_softmax(x);
            let z = t.exp(y);
            t.value(z).data.clone()
        };
        assert_eq!(run(), run());
    }
}
