//! Tape-based reverse-mode differentiation over vectors.
//!
//! A [`Graph`] records every operation in creation order, so the tape is
//! already topologically sorted and `backward` is a single reverse sweep.
//! Parameters are read from a borrowed [`ParameterSet`]; their gradients are
//! written to a separate [`Gradients`] buffer.

use super::scalar::{axpy, dot, log_softmax, matvec, matvec_t, sigmoid, softmax};
use super::{Gradients, ParamId, ParameterSet, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Clone, Debug)]
enum Op<T> {
    Input,
    Param(ParamId),
    Embed(ParamId, usize),
    MatVec(ParamId, NodeId),
    MatVecT(ParamId, NodeId),
    Add(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    Concat(Vec<NodeId>),
    Slice(NodeId, usize),
    Dot(NodeId, NodeId),
    Stack(Vec<NodeId>),
    Softmax(NodeId),
    WeightedSum(NodeId, Vec<NodeId>),
    Mask(NodeId, Vec<T>),
    // probabilities are kept for the backward pass
    CrossEntropy(NodeId, usize, Vec<T>),
    Sum(Vec<NodeId>),
}

#[derive(Clone, Debug)]
struct Node<T> {
    value: Vec<T>,
    op: Op<T>,
}

pub struct Graph<'p, T> {
    params: &'p ParameterSet<T>,
    nodes: Vec<Node<T>>,
}

/// Gradients of input nodes after a backward pass.
pub struct InputGrads<T>(Vec<Option<Vec<T>>>);

impl<T: Scalar> InputGrads<T> {
    pub fn get(&self, node: NodeId) -> Option<&[T]> {
        self.0.get(node.0)?.as_deref()
    }
}

impl<'p, T: Scalar> Graph<'p, T> {
    pub fn new(params: &'p ParameterSet<T>) -> Self {
        Graph {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn params(&self) -> &'p ParameterSet<T> {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &[T] {
        &self.nodes[id.0].value
    }

    /// The single value of a scalar node.
    pub fn scalar(&self, id: NodeId) -> T {
        let v = self.value(id);
        assert_eq!(v.len(), 1, "node is not a scalar");
        v[0]
    }

    fn push(&mut self, value: Vec<T>, op: Op<T>) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    fn dim(&self, id: NodeId) -> usize {
        self.nodes[id.0].value.len()
    }

    fn matrix(&self, p: ParamId) -> (&'p [T], usize, usize) {
        let t = self.params.get(p);
        let shape = t.shape();
        assert_eq!(shape.len(), 2, "parameter {p:?} is not a matrix");
        (t.values(), shape[0], shape[1])
    }

    pub fn input(&mut self, values: Vec<T>) -> NodeId {
        self.push(values, Op::Input)
    }

    pub fn param(&mut self, p: ParamId) -> NodeId {
        let v = self.params.get(p).values().to_vec();
        self.push(v, Op::Param(p))
    }

    /// Row `row` of an embedding matrix.
    pub fn embed(&mut self, p: ParamId, row: usize) -> NodeId {
        let t = self.params.get(p);
        assert!(row < t.shape()[0], "embedding row {row} out of range");
        let v = t.row(row).to_vec();
        self.push(v, Op::Embed(p, row))
    }

    /// `W x` for a parameter matrix `W`.
    pub fn matvec(&mut self, p: ParamId, x: NodeId) -> NodeId {
        let (w, rows, cols) = self.matrix(p);
        assert_eq!(self.dim(x), cols, "matvec: input has wrong length");
        let v = matvec(w, rows, cols, self.value(x));
        self.push(v, Op::MatVec(p, x))
    }

    /// `Wᵀ x` for a parameter matrix `W`.
    pub fn matvec_t(&mut self, p: ParamId, x: NodeId) -> NodeId {
        let (w, rows, cols) = self.matrix(p);
        assert_eq!(self.dim(x), rows, "matvec_t: input has wrong length");
        let v = matvec_t(w, rows, cols, self.value(x));
        self.push(v, Op::MatVecT(p, x))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(self.dim(a), self.dim(b), "add: length mismatch");
        let v = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(&x, &y)| x + y)
            .collect();
        self.push(v, Op::Add(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(self.dim(a), self.dim(b), "mul: length mismatch");
        let v = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(&x, &y)| x * y)
            .collect();
        self.push(v, Op::Mul(a, b))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).iter().map(|&x| sigmoid(x)).collect();
        self.push(v, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).iter().map(|&x| x.tanh()).collect();
        self.push(v, Op::Tanh(a))
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let mut v = Vec::with_capacity(parts.iter().map(|&p| self.dim(p)).sum());
        for &p in parts {
            v.extend_from_slice(self.value(p));
        }
        self.push(v, Op::Concat(parts.to_vec()))
    }

    pub fn slice(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let v = self.value(a)[start..start + len].to_vec();
        self.push(v, Op::Slice(a, start))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(self.dim(a), self.dim(b), "dot: length mismatch");
        let v = vec![dot(self.value(a), self.value(b))];
        self.push(v, Op::Dot(a, b))
    }

    /// Collects scalar nodes into one vector.
    pub fn stack(&mut self, scalars: &[NodeId]) -> NodeId {
        let v = scalars.iter().map(|&s| self.scalar(s)).collect();
        self.push(v, Op::Stack(scalars.to_vec()))
    }

    pub fn softmax(&mut self, a: NodeId) -> NodeId {
        let v = softmax(self.value(a));
        self.push(v, Op::Softmax(a))
    }

    /// `Σ_i weights[i] · items[i]`.
    pub fn weighted_sum(&mut self, weights: NodeId, items: &[NodeId]) -> NodeId {
        assert_eq!(
            self.dim(weights),
            items.len(),
            "weighted_sum: count mismatch"
        );
        assert!(!items.is_empty(), "weighted_sum over nothing");
        let d = self.dim(items[0]);
        let mut v = vec![T::zero(); d];
        for (&w, &it) in self.value(weights).iter().zip(items) {
            axpy(w, &self.nodes[it.0].value, &mut v);
        }
        self.push(v, Op::WeightedSum(weights, items.to_vec()))
    }

    /// Elementwise product with a constant, e.g. a dropout mask.
    pub fn mask(&mut self, a: NodeId, mask: Vec<T>) -> NodeId {
        assert_eq!(self.dim(a), mask.len(), "mask: length mismatch");
        let v = self
            .value(a)
            .iter()
            .zip(&mask)
            .map(|(&x, &m)| x * m)
            .collect();
        self.push(v, Op::Mask(a, mask))
    }

    /// `-log softmax(logits)[target]`, computed with the same log-softmax
    /// routine used at decode time.
    pub fn cross_entropy(&mut self, logits: NodeId, target: usize) -> NodeId {
        let lp = log_softmax(self.value(logits));
        assert!(target < lp.len(), "target {target} out of range");
        let loss = -lp[target];
        let probs = lp.iter().map(|&l| l.exp()).collect();
        self.push(vec![loss], Op::CrossEntropy(logits, target, probs))
    }

    /// Sum of scalar nodes, accumulated in the given order.
    pub fn sum(&mut self, scalars: &[NodeId]) -> NodeId {
        let total = scalars
            .iter()
            .fold(T::zero(), |acc, &s| acc + self.scalar(s));
        self.push(vec![total], Op::Sum(scalars.to_vec()))
    }

    /// Reverse sweep from a scalar node. Parameter gradients are added into
    /// `grads`; gradients of input nodes are returned.
    pub fn backward(&self, loss: NodeId, grads: &mut Gradients<T>) -> InputGrads<T> {
        assert_eq!(self.dim(loss), 1, "backward needs a scalar loss");
        let mut g: Vec<Option<Vec<T>>> = vec![None; loss.0 + 1];
        g[loss.0] = Some(vec![T::one()]);

        fn acc<T: Scalar>(g: &mut [Option<Vec<T>>], id: NodeId, len: usize) -> &mut Vec<T> {
            g[id.0].get_or_insert_with(|| vec![T::zero(); len])
        }

        for idx in (0..=loss.0).rev() {
            let Some(gout) = g[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Input => {
                    g[idx] = Some(gout);
                    continue;
                }
                Op::Param(p) => {
                    let slot = grads.slot(*p, gout.len());
                    axpy(T::one(), &gout, slot);
                }
                Op::Embed(p, row) => {
                    let t = self.params.get(*p);
                    let cols = t.shape()[1];
                    let slot = grads.slot(*p, t.len());
                    axpy(T::one(), &gout, &mut slot[row * cols..(row + 1) * cols]);
                }
                Op::MatVec(p, x) => {
                    let (w, rows, cols) = self.matrix(*p);
                    let xv = self.value(*x);
                    let slot = grads.slot(*p, rows * cols);
                    for (r, &gr) in gout.iter().enumerate() {
                        if gr != T::zero() {
                            axpy(gr, xv, &mut slot[r * cols..(r + 1) * cols]);
                        }
                    }
                    let gx = matvec_t(w, rows, cols, &gout);
                    axpy(T::one(), &gx, acc(&mut g, *x, cols));
                }
                Op::MatVecT(p, x) => {
                    // out = Wᵀ x: dW[r, c] += x[r] gout[c], dx = W gout
                    let (w, rows, cols) = self.matrix(*p);
                    let xv = self.value(*x);
                    let slot = grads.slot(*p, rows * cols);
                    for (r, &xr) in xv.iter().enumerate() {
                        if xr != T::zero() {
                            axpy(xr, &gout, &mut slot[r * cols..(r + 1) * cols]);
                        }
                    }
                    let gx = matvec(w, rows, cols, &gout);
                    axpy(T::one(), &gx, acc(&mut g, *x, rows));
                }
                Op::Add(a, b) => {
                    axpy(T::one(), &gout, acc(&mut g, *a, gout.len()));
                    axpy(T::one(), &gout, acc(&mut g, *b, gout.len()));
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let ga = acc(&mut g, *a, gout.len());
                    for i in 0..gout.len() {
                        ga[i] = ga[i] + gout[i] * bv[i];
                    }
                    let gb = acc(&mut g, *b, gout.len());
                    for i in 0..gout.len() {
                        gb[i] = gb[i] + gout[i] * av[i];
                    }
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    let ga = acc(&mut g, *a, gout.len());
                    for i in 0..gout.len() {
                        ga[i] = ga[i] + gout[i] * y[i] * (T::one() - y[i]);
                    }
                }
                Op::Tanh(a) => {
                    let y = &node.value;
                    let ga = acc(&mut g, *a, gout.len());
                    for i in 0..gout.len() {
                        ga[i] = ga[i] + gout[i] * (T::one() - y[i] * y[i]);
                    }
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for &p in parts {
                        let n = self.dim(p);
                        axpy(T::one(), &gout[off..off + n], acc(&mut g, p, n));
                        off += n;
                    }
                }
                Op::Slice(a, start) => {
                    let n = self.dim(*a);
                    let ga = acc(&mut g, *a, n);
                    axpy(T::one(), &gout, &mut ga[*start..start + gout.len()]);
                }
                Op::Dot(a, b) => {
                    let s = gout[0];
                    let (av, bv) = (self.value(*a), self.value(*b));
                    axpy(s, bv, acc(&mut g, *a, av.len()));
                    axpy(s, av, acc(&mut g, *b, bv.len()));
                }
                Op::Stack(items) => {
                    for (&it, &gi) in items.iter().zip(&gout) {
                        let slot = acc(&mut g, it, 1);
                        slot[0] = slot[0] + gi;
                    }
                }
                Op::Softmax(a) => {
                    let y = &node.value;
                    let inner = dot(&gout, y);
                    let ga = acc(&mut g, *a, y.len());
                    for i in 0..y.len() {
                        ga[i] = ga[i] + y[i] * (gout[i] - inner);
                    }
                }
                Op::WeightedSum(w, items) => {
                    let wv = self.value(*w);
                    let mut gw = vec![T::zero(); items.len()];
                    for (k, &it) in items.iter().enumerate() {
                        gw[k] = dot(&gout, self.value(it));
                        axpy(wv[k], &gout, acc(&mut g, it, gout.len()));
                    }
                    axpy(T::one(), &gw, acc(&mut g, *w, items.len()));
                }
                Op::Mask(a, mask) => {
                    let ga = acc(&mut g, *a, gout.len());
                    for i in 0..gout.len() {
                        ga[i] = ga[i] + gout[i] * mask[i];
                    }
                }
                Op::CrossEntropy(logits, target, probs) => {
                    let s = gout[0];
                    let gl = acc(&mut g, *logits, probs.len());
                    for (i, &p) in probs.iter().enumerate() {
                        let d = if i == *target { p - T::one() } else { p };
                        gl[i] = gl[i] + s * d;
                    }
                }
                Op::Sum(items) => {
                    for &it in items {
                        let slot = acc(&mut g, it, 1);
                        slot[0] = slot[0] + gout[0];
                    }
                }
            }
        }
        InputGrads(g)
    }
}
