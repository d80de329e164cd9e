use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::layers::{softmax_rows, uniform2};
use super::Parameterized;
use crate::rng::{self, Rng};

/// Token-state producer behind every head. `pooled` is the state at the
/// first (classification-token) position.
pub trait EncoderBackend: Parameterized + Clone {
    type Cache;

    fn dim(&self) -> usize;

    fn max_len(&self) -> usize;

    /// Token states for `tokens[..max_len]`.
    fn forward(&self, tokens: &[u32]) -> (Array2<f64>, Self::Cache);

    /// Accumulates parameter gradients into `grad`.
    fn backward(&self, cache: &Self::Cache, d_states: ArrayView2<f64>, grad: &mut Self);

    fn encode(&self, tokens: &[u32]) -> (Array2<f64>, Array1<f64>) {
        let (states, _) = self.forward(tokens);
        let pooled = states.row(0).to_owned();
        (states, pooled)
    }
}

/// `(states, pooled)` for `tokens`; inputs longer than the backend's maximum
/// are truncated.
pub fn encode<E: EncoderBackend>(backend: &E, tokens: &[u32]) -> (Array2<f64>, Array1<f64>) {
    backend.encode(tokens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyEncoderConfig {
    pub vocab_size: usize,
    pub dim: usize,
    pub layers: usize,
    pub max_len: usize,
}

impl ToyEncoderConfig {
    pub fn new(vocab_size: usize) -> Self {
        ToyEncoderConfig {
            vocab_size,
            dim: 32,
            layers: 2,
            max_len: 128,
        }
    }
}

/// Single-head self-attention block with a tanh residual branch:
/// `Y = X + tanh(softmax(X Wq (X Wk)^T / sqrt(d)) X Wv Wo)`.
/// `Wq` starts at zero, so attention starts out uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttnBlock {
    pub wq: Array2<f64>,
    pub wk: Array2<f64>,
    pub wv: Array2<f64>,
    pub wo: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct BlockCache {
    x: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    a: Array2<f64>,
    hc: Array2<f64>,
    tz: Array2<f64>,
}

impl AttnBlock {
    fn new(d: usize, rng: &mut Rng) -> Self {
        let scale = 1.0 / (d as f64).sqrt();
        AttnBlock {
            wq: Array2::zeros((d, d)),
            wk: uniform2(d, d, scale, rng),
            wv: uniform2(d, d, scale, rng),
            wo: uniform2(d, d, scale, rng),
        }
    }

    fn forward(&self, x: Array2<f64>) -> (Array2<f64>, BlockCache) {
        let d = x.ncols() as f64;
        let q = x.dot(&self.wq);
        let k = x.dot(&self.wk);
        let v = x.dot(&self.wv);
        let a = softmax_rows(&(q.dot(&k.t()) / d.sqrt()));
        let hc = a.dot(&v);
        let tz = hc.dot(&self.wo).mapv(f64::tanh);
        let y = &x + &tz;
        (y, BlockCache { x, q, k, v, a, hc, tz })
    }

    fn backward(&self, c: &BlockCache, dy: &Array2<f64>, grad: &mut AttnBlock) -> Array2<f64> {
        let d = c.x.ncols() as f64;
        let dz = dy * &c.tz.mapv(|t| 1.0 - t * t);
        grad.wo += &c.hc.t().dot(&dz);
        let dhc = dz.dot(&self.wo.t());
        let da = dhc.dot(&c.v.t());
        let dv = c.a.t().dot(&dhc);
        let row_dot = (&da * &c.a).sum_axis(Axis(1)).insert_axis(Axis(1));
        let ds = &c.a * &(&da - &row_dot) / d.sqrt();
        let dq = ds.dot(&c.k);
        let dk = ds.t().dot(&c.q);
        grad.wq += &c.x.t().dot(&dq);
        grad.wk += &c.x.t().dot(&dk);
        grad.wv += &c.x.t().dot(&dv);
        dy + &dq.dot(&self.wq.t()) + &dk.dot(&self.wk.t()) + &dv.dot(&self.wv.t())
    }
}

impl Parameterized for AttnBlock {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        for m in [&self.wq, &self.wk, &self.wv, &self.wo] {
            f(m.as_slice().expect("standard layout"));
        }
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        for m in [&mut self.wq, &mut self.wk, &mut self.wv, &mut self.wo] {
            f(m.as_slice_mut().expect("standard layout"));
        }
    }
}

/// Small trainable reference encoder: token plus position embeddings
/// followed by self-attention blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyEncoder {
    pub config: ToyEncoderConfig,
    pub tok_emb: Array2<f64>,
    pub pos_emb: Array2<f64>,
    pub blocks: Vec<AttnBlock>,
}

#[derive(Debug, Clone)]
pub struct ToyEncoderCache {
    tokens: Vec<u32>,
    blocks: Vec<BlockCache>,
}

impl ToyEncoder {
    pub fn new(config: ToyEncoderConfig, seed: u64) -> Self {
        let mut rng = rng::rng_for(seed, "init/encoder");
        let d = config.dim;
        ToyEncoder {
            config,
            tok_emb: uniform2(config.vocab_size, d, 0.5, &mut rng),
            pos_emb: uniform2(config.max_len, d, 0.1, &mut rng),
            blocks: (0..config.layers).map(|_| AttnBlock::new(d, &mut rng)).collect(),
        }
    }

    fn token_row(&self, id: u32) -> usize {
        let id = id as usize;
        if id < self.config.vocab_size {
            id
        } else {
            super::tokenizer::UNK_ID as usize
        }
    }
}

impl EncoderBackend for ToyEncoder {
    type Cache = ToyEncoderCache;

    fn dim(&self) -> usize {
        self.config.dim
    }

    fn max_len(&self) -> usize {
        self.config.max_len
    }

    fn forward(&self, tokens: &[u32]) -> (Array2<f64>, ToyEncoderCache) {
        let tokens = &tokens[..tokens.len().min(self.config.max_len)];
        let mut x = Array2::zeros((tokens.len(), self.config.dim));
        for (t, &id) in tokens.iter().enumerate() {
            let row = &self.tok_emb.row(self.token_row(id)) + &self.pos_emb.row(t);
            x.row_mut(t).assign(&row);
        }
        let mut caches = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let (y, c) = b.forward(x);
            caches.push(c);
            x = y;
        }
        (
            x,
            ToyEncoderCache {
                tokens: tokens.to_vec(),
                blocks: caches,
            },
        )
    }

    fn backward(&self, cache: &ToyEncoderCache, d_states: ArrayView2<f64>, grad: &mut Self) {
        let mut dx = d_states.to_owned();
        for (i, b) in self.blocks.iter().enumerate().rev() {
            dx = b.backward(&cache.blocks[i], &dx, &mut grad.blocks[i]);
        }
        for (t, &id) in cache.tokens.iter().enumerate() {
            let row = self.token_row(id);
            let mut g = grad.tok_emb.row_mut(row);
            g += &dx.row(t);
            let mut p = grad.pos_emb.slice_mut(s![t, ..]);
            p += &dx.row(t);
        }
    }
}

impl Parameterized for ToyEncoder {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.tok_emb.as_slice().expect("standard layout"));
        f(self.pos_emb.as_slice().expect("standard layout"));
        for b in &self.blocks {
            b.visit(f);
        }
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.tok_emb.as_slice_mut().expect("standard layout"));
        f(self.pos_emb.as_slice_mut().expect("standard layout"));
        for b in &mut self.blocks {
            b.visit_mut(f);
        }
    }
}
