use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::attention::{AttentionCache, AttentionParams};
use super::encoder::{EncoderBackend, ToyEncoder, ToyEncoderConfig};
use super::layers::{sigmoid, softmax, Linear};
use super::loss::{sigmoid_bce_from_logits, softmax_ce_from_logits, ClassWeights};
use super::lstm::{final_states, final_states_backward, BiLstm, BiLstmCache};
use super::tokenizer::pair_sequence;
use super::{ModelError, Parameterized};
use crate::corpus::{Label, LabelVector};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    BinarySoftmax,
    MultilabelSigmoid,
    PairSoftmax,
}

impl HeadKind {
    pub fn outputs(self) -> usize {
        match self {
            HeadKind::BinarySoftmax | HeadKind::PairSoftmax => 2,
            HeadKind::MultilabelSigmoid => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchicalConfig {
    pub hidden_size: usize,
    pub use_attention: bool,
    /// Attention hidden size; defaults to `hidden_size`.
    #[serde(default)]
    pub attention_size: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub head: HeadKind,
    pub encoder: ToyEncoderConfig,
    #[serde(default)]
    pub hierarchical: Option<HierarchicalConfig>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hierarchy {
    pub bilstm: BiLstm,
    pub attention: Option<AttentionParams>,
}

impl Parameterized for Hierarchy {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        self.bilstm.visit(f);
        if let Some(a) = &self.attention {
            a.visit(f);
        }
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.bilstm.visit_mut(f);
        if let Some(a) = &mut self.attention {
            a.visit_mut(f);
        }
    }
}

/// Training target: a class index for the softmax heads, or the six label
/// bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    Class(usize),
    Labels([bool; 6]),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub tokens: Vec<u32>,
    pub target: Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Ce,
    WeightedCe,
    Bce,
}

/// Encoder, optional BiLSTM(+attention) stack and output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier<E = ToyEncoder> {
    pub head: HeadKind,
    pub encoder: E,
    pub hierarchy: Option<Hierarchy>,
    pub out: Linear,
}

pub struct ForwardCache<C> {
    enc: C,
    states: Array2<f64>,
    lstm: Option<(Array2<f64>, BiLstmCache)>,
    attn: Option<AttentionCache>,
    pooled: Array1<f64>,
}

impl Classifier<ToyEncoder> {
    pub fn new(spec: &ModelSpec) -> Self {
        let encoder = ToyEncoder::new(spec.encoder, spec.seed);
        Classifier::with_encoder(encoder, spec.head, spec.hierarchical, spec.seed)
    }
}

impl<E: EncoderBackend> Classifier<E> {
    pub fn with_encoder(encoder: E, head: HeadKind, hierarchical: Option<HierarchicalConfig>, seed: u64) -> Self {
        let mut rng = rng::rng_for(seed, "init/head");
        let d = encoder.dim();
        let hierarchy = hierarchical.map(|h| Hierarchy {
            bilstm: BiLstm::new(d, h.hidden_size, &mut rng),
            attention: h
                .use_attention
                .then(|| AttentionParams::new(h.attention_size.unwrap_or(h.hidden_size), 2 * h.hidden_size, &mut rng)),
        });
        let width = hierarchical.map_or(d, |h| 2 * h.hidden_size);
        Classifier {
            head,
            encoder,
            hierarchy,
            out: Linear::new(head.outputs(), width, &mut rng),
        }
    }

    /// Same-shaped model with every parameter zero, used as a gradient
    /// accumulator.
    pub fn zeros_like(&self) -> Self {
        let mut g = self.clone();
        g.fill(0.0);
        g
    }

    pub fn forward_cached(&self, tokens: &[u32]) -> (Array1<f64>, ForwardCache<E::Cache>) {
        let (states, enc) = self.encoder.forward(tokens);
        let (pooled, lstm, attn) = match &self.hierarchy {
            None => (states.row(0).to_owned(), None, None),
            Some(h) => {
                let (out, lc) = h.bilstm.forward_cached(states.view());
                match &h.attention {
                    Some(a) => {
                        let (p, ac) = a.forward_cached(out.view());
                        (p, Some((out, lc)), Some(ac))
                    }
                    None => (final_states(out.view(), h.bilstm.hidden()), Some((out, lc)), None),
                }
            }
        };
        let logits = self.out.forward(pooled.view());
        (
            logits,
            ForwardCache {
                enc,
                states,
                lstm,
                attn,
                pooled,
            },
        )
    }

    pub fn backward(&self, cache: &ForwardCache<E::Cache>, d_logits: ArrayView1<f64>, grad: &mut Self) {
        let d_pooled = self.out.backward(cache.pooled.view(), d_logits, &mut grad.out);
        let d_states = match (&self.hierarchy, &mut grad.hierarchy) {
            (None, _) => {
                let mut d = Array2::zeros(cache.states.raw_dim());
                d.row_mut(0).assign(&d_pooled);
                d
            }
            (Some(h), Some(gh)) => {
                let (out, lc) = cache.lstm.as_ref().expect("hierarchical cache");
                let d_out = match (&h.attention, &mut gh.attention) {
                    (Some(a), Some(ga)) => a.backward_pass(cache.attn.as_ref().expect("attention cache"), d_pooled.view(), ga),
                    _ => final_states_backward(d_pooled.view(), out.nrows(), h.bilstm.hidden()),
                };
                h.bilstm.backward_pass(lc, d_out.view(), &mut gh.bilstm)
            }
            (Some(_), None) => panic!("gradient accumulator shape differs from model"),
        };
        self.encoder.backward(&cache.enc, d_states.view(), &mut grad.encoder);
    }

    pub fn logits(&self, tokens: &[u32]) -> Vec<f64> {
        self.forward_cached(tokens).0.to_vec()
    }

    /// Softmax probabilities for the two-way heads, sigmoid probabilities for
    /// the multi-label head.
    pub fn probabilities(&self, tokens: &[u32]) -> Vec<f64> {
        let z = self.logits(tokens);
        match self.head {
            HeadKind::MultilabelSigmoid => sigmoid(&z),
            _ => softmax(&z),
        }
    }

    fn expect_head(&self, allowed: &[HeadKind]) -> Result<(), ModelError> {
        if allowed.contains(&self.head) {
            Ok(())
        } else {
            Err(ModelError::HeadMismatch(self.head))
        }
    }

    /// `[p(non-sarcastic), p(sarcastic)]`.
    pub fn forward_binary(&self, tokens: &[u32]) -> Result<[f64; 2], ModelError> {
        self.expect_head(&[HeadKind::BinarySoftmax])?;
        let p = self.probabilities(tokens);
        Ok([p[0], p[1]])
    }

    pub fn forward_multilabel(&self, tokens: &[u32]) -> Result<[f64; 6], ModelError> {
        self.expect_head(&[HeadKind::MultilabelSigmoid])?;
        let p = self.probabilities(tokens);
        Ok(std::array::from_fn(|i| p[i]))
    }

    /// Index 0 is "text_a is the sarcastic one". `a` and `b` are word ids
    /// without special tokens.
    pub fn forward_pair(&self, a: &[u32], b: &[u32]) -> Result<[f64; 2], ModelError> {
        self.expect_head(&[HeadKind::PairSoftmax])?;
        let p = self.probabilities(&pair_sequence(a, b, self.encoder.max_len()));
        Ok([p[0], p[1]])
    }

    /// Per-sample loss weights and their sum for a batch.
    fn sample_weights(batch: &[Example], loss: LossKind, weights: &ClassWeights) -> Vec<f64> {
        batch
            .iter()
            .map(|ex| match (loss, ex.target) {
                (LossKind::WeightedCe, Target::Class(c)) => weights.weight(c),
                _ => 1.0,
            })
            .collect()
    }

    fn sample_loss(&self, ex: &Example, loss: LossKind, scale: f64) -> Result<(f64, Vec<f64>, ForwardCache<E::Cache>), ModelError> {
        let (z, cache) = self.forward_cached(&ex.tokens);
        let z = z.to_vec();
        let (l, dz) = match (loss, ex.target, self.head) {
            (LossKind::Bce, Target::Labels(y), HeadKind::MultilabelSigmoid) => sigmoid_bce_from_logits(&z, &y, scale),
            (LossKind::Ce | LossKind::WeightedCe, Target::Class(c), HeadKind::BinarySoftmax | HeadKind::PairSoftmax) if c < 2 => {
                softmax_ce_from_logits(&z, c, scale)
            }
            _ => return Err(ModelError::LossMismatch { loss, head: self.head }),
        };
        Ok((l, dz, cache))
    }

    /// Batch loss: weighted mean of per-sample losses (`sum w l / sum w`).
    pub fn loss(&self, batch: &[Example], loss: LossKind, weights: &ClassWeights) -> Result<f64, ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        let w = Self::sample_weights(batch, loss, weights);
        let total: f64 = w.iter().sum();
        let mut sum = 0.0;
        for (ex, wi) in batch.iter().zip(&w) {
            sum += self.sample_loss(ex, loss, wi / total)?.0;
        }
        Ok(sum)
    }

    /// Batch loss with gradients accumulated into `grad`.
    pub fn loss_and_grad(&self, batch: &[Example], loss: LossKind, weights: &ClassWeights, grad: &mut Self) -> Result<f64, ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        let w = Self::sample_weights(batch, loss, weights);
        let total: f64 = w.iter().sum();
        let mut sum = 0.0;
        for (ex, wi) in batch.iter().zip(&w) {
            let (l, dz, cache) = self.sample_loss(ex, loss, wi / total)?;
            self.backward(&cache, Array1::from(dz).view(), grad);
            sum += l;
        }
        Ok(sum)
    }
}

impl<E: EncoderBackend> Parameterized for Classifier<E> {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        self.encoder.visit(f);
        if let Some(h) = &self.hierarchy {
            h.visit(f);
        }
        self.out.visit(f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.encoder.visit_mut(f);
        if let Some(h) = &mut self.hierarchy {
            h.visit_mut(f);
        }
        self.out.visit_mut(f);
    }
}

/// Multi-label decoding: a label is predicted when its probability exceeds
/// 0.5.
pub fn decode_multilabel(probs: &[f64; 6]) -> LabelVector {
    let mut v = LabelVector::default();
    for l in Label::ALL {
        v.set(l, probs[l.index()] > 0.5);
    }
    v
}
