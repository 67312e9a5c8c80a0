//! Dense `f64` tensors of rank 1 or 2, stored flat in row-major order.
//!
//! Shapes are explicit and checked eagerly: every constructor asserts that
//! the data length matches the shape product, and rank is restricted to
//! vectors and matrices — that is all tree composition needs.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Rank-1 tensor wrapping `data`.
    pub fn vector(data: Vec<f64>) -> Tensor {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    /// Rank-2 tensor wrapping `data` in row-major order.
    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Tensor {
        assert!(
            data.len() == rows * cols,
            "matrix: data length {} does not match shape [{rows}, {cols}]",
            data.len()
        );
        Tensor {
            shape: vec![rows, cols],
            data,
        }
    }

    /// One-element rank-1 tensor (the shape losses and scalar outputs use).
    pub fn scalar(v: f64) -> Tensor {
        Tensor::vector(vec![v])
    }

    pub fn zeros(shape: &[usize]) -> Tensor {
        Tensor::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], v: f64) -> Tensor {
        assert!(
            shape.len() == 1 || shape.len() == 2,
            "tensor: rank must be 1 or 2, got shape {shape:?}"
        );
        Tensor {
            shape: shape.to_vec(),
            data: vec![v; shape.iter().product()],
        }
    }

    /// Every element drawn independently from `U[lo, hi)`.
    pub fn uniform<R: Rng + ?Sized>(shape: &[usize], lo: f64, hi: f64, rng: &mut R) -> Tensor {
        assert!(lo < hi, "uniform: empty interval [{lo}, {hi})");
        let mut t = Tensor::zeros(shape);
        for v in t.data.iter_mut() {
            *v = rng.random_range(lo..hi);
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Total number of elements.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_vector(&self) -> bool {
        self.rank() == 1
    }

    pub fn is_matrix(&self) -> bool {
        self.rank() == 2
    }

    /// True for the `[1]` shape produced by losses.
    pub fn is_scalar(&self) -> bool {
        self.shape == [1]
    }

    pub fn rows(&self) -> usize {
        assert!(self.is_matrix(), "rows: tensor has shape {:?}", self.shape);
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        assert!(self.is_matrix(), "cols: tensor has shape {:?}", self.shape);
        self.shape[1]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn at(&self, i: usize) -> f64 {
        self.data[i]
    }

    /// Row-major element access for matrices.
    pub fn at2(&self, r: usize, c: usize) -> f64 {
        assert!(self.is_matrix(), "at2: tensor has shape {:?}", self.shape);
        assert!(
            r < self.shape[0] && c < self.shape[1],
            "at2: index ({r}, {c}) out of bounds for shape {:?}",
            self.shape
        );
        self.data[r * self.shape[1] + c]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        self.data[i] = v;
    }

    pub fn fill(&mut self, v: f64) {
        for x in self.data.iter_mut() {
            *x = v;
        }
    }

    /// Largest absolute element, 0.0 for empty tensors.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
