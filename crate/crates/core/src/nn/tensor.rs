use std::collections::BTreeMap;

use super::{NnError, Scalar};
use crate::rng::SeededRng;

/// Dense row-major tensor with an optional accumulated gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    values: Vec<T>,
    grad: Option<Vec<T>>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(shape: Vec<usize>, values: Vec<T>) -> Result<Self, NnError> {
        let n: usize = shape.iter().product();
        if n != values.len() {
            return Err(NnError::Shape(format!(
                "shape {shape:?} needs {n} values, got {}",
                values.len()
            )));
        }
        Ok(Tensor {
            shape,
            values,
            grad: None,
        })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            values: vec![T::zero(); n],
            grad: None,
        }
    }

    pub fn uniform(shape: Vec<usize>, bound: f64, rng: &mut SeededRng) -> Self {
        let n: usize = shape.iter().product();
        let values = (0..n)
            .map(|_| T::from_f64_lossy(rng.uniform(-bound, bound)))
            .collect();
        Tensor {
            shape,
            values,
            grad: None,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn grad(&self) -> Option<&[T]> {
        self.grad.as_deref()
    }

    /// Adds `scale * g` into the gradient, allocating it on first use.
    pub fn accumulate_grad(&mut self, g: &[T], scale: T) {
        assert_eq!(g.len(), self.values.len(), "gradient length mismatch");
        let grad = self
            .grad
            .get_or_insert_with(|| vec![T::zero(); self.values.len()]);
        for (a, &b) in grad.iter_mut().zip(g) {
            *a = *a + scale * b;
        }
    }

    pub fn clear_grad(&mut self) {
        self.grad = None;
    }

    /// Row `i` of a rank-2 tensor.
    pub fn row(&self, i: usize) -> &[T] {
        let cols = self.shape[1];
        &self.values[i * cols..(i + 1) * cols]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub usize);

/// Named model parameters. Names are unique and iteration follows
/// registration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParameterSet<T> {
    names: Vec<String>,
    tensors: Vec<Tensor<T>>,
    index: BTreeMap<String, ParamId>,
}

impl<T: Scalar> ParameterSet<T> {
    pub fn new() -> Self {
        ParameterSet {
            names: Vec::new(),
            tensors: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, name: &str, tensor: Tensor<T>) -> Result<ParamId, NnError> {
        if self.index.contains_key(name) {
            return Err(NnError::Shape(format!("duplicate parameter name {name:?}")));
        }
        let id = ParamId(self.tensors.len());
        self.names.push(name.to_string());
        self.tensors.push(tensor);
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied()
    }

    pub fn get(&self, id: ParamId) -> &Tensor<T> {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        &mut self.tensors[id.0]
    }

    pub fn by_name(&self, name: &str) -> Option<&Tensor<T>> {
        self.id(name).map(|id| self.get(id))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor<T>)> {
        self.names
            .iter()
            .zip(&self.tensors)
            .enumerate()
            .map(|(i, (n, t))| (ParamId(i), n.as_str(), t))
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor<T>> {
        self.tensors.iter_mut()
    }

    pub fn num_values(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// Moves accumulated graph gradients into the tensors, scaled.
    pub fn accumulate(&mut self, grads: &Gradients<T>, scale: T) {
        for (tensor, g) in self.tensors.iter_mut().zip(&grads.0) {
            if let Some(g) = g {
                tensor.accumulate_grad(g, scale);
            }
        }
    }

    pub fn clear_grads(&mut self) {
        for t in &mut self.tensors {
            t.clear_grad();
        }
    }
}

/// Per-parameter gradient buffers filled by backward passes.
#[derive(Clone, Debug, Default)]
pub struct Gradients<T>(pub(crate) Vec<Option<Vec<T>>>);

impl<T: Scalar> Gradients<T> {
    pub fn new<U>(params: &ParameterSet<U>) -> Self {
        Gradients(vec![None; params.tensors.len()])
    }

    pub(crate) fn slot(&mut self, id: ParamId, len: usize) -> &mut [T] {
        self.0[id.0].get_or_insert_with(|| vec![T::zero(); len])
    }

    pub fn get(&self, id: ParamId) -> Option<&[T]> {
        self.0.get(id.0)?.as_deref()
    }

    pub fn clear(&mut self) {
        for g in self.0.iter_mut().flatten() {
            g.iter_mut().for_each(|v| *v = T::zero());
        }
    }
}
