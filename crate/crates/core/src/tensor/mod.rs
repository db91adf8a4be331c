//! Dense f64 tensors with reverse-mode gradients.
//!
//! A [`Tensor`] is a flat row-major buffer plus a shape. Gradients are
//! computed through a per-forward-pass [`Tape`]: record operations, call
//! [`Tape::backward`] on a scalar node, and gradients accumulate into the
//! [`ParamStore`]. The tape is discarded afterwards.

mod adam;
mod tape;

pub use adam::{Adam, AdamConfig};
pub use tape::{NodeId, Tape};

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Dense n-dimensional array of f64, row-major.
///
/// Immutable once created except for the optional gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
    grad: Option<Vec<f64>>,
}

impl Tensor {
    /// Builds a tensor, checking that the shape matches the data length and
    /// every dimension is positive.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(Error::Dimension(format!(
                "shape {shape:?} has an empty or zero dimension"
            )));
        }
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::Dimension(format!(
                "shape {shape:?} implies {numel} elements but data has {}",
                data.len()
            )));
        }
        Ok(Tensor { shape, data, grad: None })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        Tensor::new(shape, vec![0.0; numel])
    }

    pub fn scalar(v: f64) -> Self {
        Tensor { shape: vec![1], data: vec![v], grad: None }
    }

    /// Attaches a zeroed gradient buffer (idempotent).
    pub fn with_grad(mut self) -> Self {
        if self.grad.is_none() {
            self.grad = Some(vec![0.0; self.data.len()]);
        }
        self
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    /// Row/column counts, treating 1-d tensors as a single row.
    pub fn rows(&self) -> usize {
        if self.shape.len() >= 2 {
            self.shape[0]
        } else {
            1
        }
    }

    pub fn cols(&self) -> usize {
        if self.shape.len() >= 2 {
            self.shape[1]
        } else {
            self.shape[0]
        }
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols() + c]
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub(crate) fn grad_mut(&mut self) -> &mut [f64] {
        self.grad.as_deref_mut().expect("tensor has no grad buffer")
    }

    pub fn zero_grad(&mut self) {
        if let Some(g) = self.grad.as_mut() {
            g.iter_mut().for_each(|x| *x = 0.0);
        }
    }
}

/// Index of a parameter inside a [`ParamStore`].
pub type ParamId = usize;

/// A named trainable tensor. The value always carries a gradient buffer.
#[derive(Debug, Clone)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
}

/// Owns every trainable parameter of one model instance.
///
/// Names are unique; ids are dense and stable, so optimizer state can be
/// kept in parallel arrays.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    params: Vec<Parameter>,
    by_name: HashMap<String, ParamId>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, value: Tensor) -> Result<ParamId> {
        if self.by_name.contains_key(name) {
            return Err(Error::Contract(format!("duplicate parameter name '{name}'")));
        }
        let id = self.params.len();
        self.params.push(Parameter { name: name.to_string(), value: value.with_grad() });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn param(&self, id: ParamId) -> &Parameter {
        &self.params[id]
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.params[id].value
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter> {
        self.params.iter()
    }

    /// Overwrites a parameter's values in place; shape must match.
    pub fn set_value(&mut self, id: ParamId, data: &[f64]) -> Result<()> {
        let p = &mut self.params[id];
        if p.value.numel() != data.len() {
            return Err(Error::Dimension(format!(
                "parameter '{}' holds {} values, got {}",
                p.name,
                p.value.numel(),
                data.len()
            )));
        }
        p.value.data_mut().copy_from_slice(data);
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn nudge(&mut self, id: ParamId, index: usize, delta: f64) {
        self.params[id].value.data_mut()[index] += delta;
    }

    pub(crate) fn accumulate_grad(&mut self, id: ParamId, grad: &[f64]) {
        let g = self.params[id].value.grad_mut();
        for (gi, &d) in g.iter_mut().zip(grad) {
            *gi += d;
        }
    }

    pub(crate) fn accumulate_grad_row(&mut self, id: ParamId, row: usize, grad_row: &[f64]) {
        let cols = self.params[id].value.cols();
        let g = &mut self.params[id].value.grad_mut()[row * cols..(row + 1) * cols];
        for (gi, &d) in g.iter_mut().zip(grad_row) {
            *gi += d;
        }
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.value.zero_grad();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_must_match_data() {
        assert!(Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0]).is_err());
        assert!(Tensor::new(vec![2, 0], vec![]).is_err());
        let t = Tensor::new(vec![2, 3], vec![0.0; 6]).unwrap();
        assert_eq!(t.numel(), 6);
        assert_eq!(t.rows(), 2);
        assert_eq!(t.cols(), 3);
    }

    #[test]
    fn param_names_are_unique() {
        let mut store = ParamStore::new();
        store.add("w", Tensor::zeros(vec![2, 2]).unwrap()).unwrap();
        let err = store.add("w", Tensor::zeros(vec![2, 2]).unwrap());
        assert!(matches!(err, Err(Error::Contract(_))));
    }
}
