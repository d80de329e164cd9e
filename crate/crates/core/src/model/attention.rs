use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::layers::{outer, softmax, uniform1, uniform2};
use super::Parameterized;
use crate::rng::Rng;

/// Additive attention `e_t = v . tanh(W h_t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionParams {
    pub w: Array2<f64>,
    pub v: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct AttentionCache {
    states: Array2<f64>,
    u: Array2<f64>,
    pub alpha: Array1<f64>,
}

impl AttentionParams {
    pub fn new(attn_size: usize, width: usize, rng: &mut Rng) -> Self {
        let scale = (6.0 / (attn_size + width) as f64).sqrt();
        AttentionParams {
            w: uniform2(attn_size, width, scale, rng),
            v: uniform1(attn_size, scale, rng),
        }
    }

    pub fn forward_cached(&self, states: ArrayView2<f64>) -> (Array1<f64>, AttentionCache) {
        let u = states.dot(&self.w.t()).mapv(f64::tanh);
        let e = u.dot(&self.v);
        let alpha = Array1::from(softmax(e.as_slice().expect("contiguous")));
        let out = states.t().dot(&alpha);
        (
            out,
            AttentionCache {
                states: states.to_owned(),
                u,
                alpha,
            },
        )
    }

    pub fn backward_pass(&self, cache: &AttentionCache, d_out: ArrayView1<f64>, grad: &mut AttentionParams) -> Array2<f64> {
        let s = &cache.states;
        let alpha = &cache.alpha;
        let mut ds = outer(alpha.view(), d_out);
        let d_alpha = s.dot(&d_out);
        let dot = alpha.dot(&d_alpha);
        let de = alpha * &d_alpha.mapv(|x| x - dot);
        grad.v += &cache.u.t().dot(&de);
        let du = outer(de.view(), self.v.view());
        let dp = du * &cache.u.mapv(|x| 1.0 - x * x);
        grad.w += &dp.t().dot(s);
        ds += &dp.dot(&self.w);
        ds
    }
}

impl Parameterized for AttentionParams {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.w.as_slice().expect("standard layout"));
        f(self.v.as_slice().expect("standard layout"));
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.w.as_slice_mut().expect("standard layout"));
        f(self.v.as_slice_mut().expect("standard layout"));
    }
}

/// Attention-weighted sum of the `T x 2H` states.
pub fn attention_pool(states: ArrayView2<f64>, p: &AttentionParams) -> Array1<f64> {
    p.forward_cached(states).0
}

/// The softmax weights `alpha` over timesteps.
pub fn attention_weights(states: ArrayView2<f64>, p: &AttentionParams) -> Array1<f64> {
    p.forward_cached(states).1.alpha
}
