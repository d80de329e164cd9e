use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::Parameterized;
use crate::rng::Rng;

pub(crate) fn uniform2(rows: usize, cols: usize, scale: f64, rng: &mut Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-scale..scale))
}

pub(crate) fn uniform1(n: usize, scale: f64, rng: &mut Rng) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| rng.gen_range(-scale..scale))
}

pub(crate) fn outer(a: ArrayView1<f64>, b: ArrayView1<f64>) -> Array2<f64> {
    a.insert_axis(Axis(1)).dot(&b.insert_axis(Axis(0)))
}

pub(crate) fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Element-wise logistic function, kept strictly inside `(0, 1)` even where
/// `f64` would round to an endpoint.
pub fn sigmoid(logits: &[f64]) -> Vec<f64> {
    logits
        .iter()
        .map(|&z| sigmoid_scalar(z).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
        .collect()
}

/// Row-wise softmax of a matrix.
pub(crate) fn softmax_rows(m: &Array2<f64>) -> Array2<f64> {
    let mut out = m.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|z| (z - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

/// Affine map `y = W x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Linear {
    pub fn new(outputs: usize, inputs: usize, rng: &mut Rng) -> Self {
        let scale = (6.0 / (inputs + outputs) as f64).sqrt();
        Linear {
            w: uniform2(outputs, inputs, scale, rng),
            b: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.w.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.w.nrows()
    }

    pub fn forward(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.w.dot(&x) + &self.b
    }

    /// Accumulates parameter gradients into `grad` and returns dL/dx.
    pub fn backward(&self, x: ArrayView1<f64>, dy: ArrayView1<f64>, grad: &mut Linear) -> Array1<f64> {
        grad.w += &outer(dy, x);
        grad.b += &dy;
        self.w.t().dot(&dy)
    }
}

impl Parameterized for Linear {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.w.as_slice().expect("standard layout"));
        f(self.b.as_slice().expect("standard layout"));
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.w.as_slice_mut().expect("standard layout"));
        f(self.b.as_slice_mut().expect("standard layout"));
    }
}
