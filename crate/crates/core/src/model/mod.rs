//! Toy encoder, BiLSTM/attention stack, classification heads and losses,
//! all with hand-written backpropagation in `f64`.

mod attention;
mod checkpoint;
mod classifier;
mod encoder;
mod gradcheck;
mod layers;
mod loss;
mod lstm;
mod tokenizer;

use thiserror::Error;

pub use attention::{attention_pool, attention_weights, AttentionCache, AttentionParams};
pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use classifier::{
    decode_multilabel, Classifier, Example, ForwardCache, HeadKind, HierarchicalConfig, Hierarchy, LossKind, ModelSpec,
    Target,
};
pub use encoder::{encode, AttnBlock, EncoderBackend, ToyEncoder, ToyEncoderCache, ToyEncoderConfig};
pub use gradcheck::{check_gradients, relative_error, GradCheck};
pub use layers::{sigmoid, softmax, Linear};
pub use loss::{cross_entropy, multilabel_bce, weighted_cross_entropy, ClassWeights, PROB_EPS};
pub use lstm::{bilstm_forward, final_states, BiLstm, BiLstmCache, LstmCell};
pub use tokenizer::{
    pair_sequence, single_sequence, split_words, truncated_lengths, Tokenizer, CLS_ID, PAD_ID, SEP_ID, UNK_ID,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("operation not available for the {0:?} head")]
    HeadMismatch(HeadKind),
    #[error("{loss:?} loss does not fit the {head:?} head or its targets")]
    LossMismatch { loss: LossKind, head: HeadKind },
    #[error("class weights need both class counts above zero")]
    ZeroClassCount,
    #[error("empty batch")]
    EmptyBatch,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Uniform access to a component's parameters as a sequence of flat
/// slices, in a fixed order.
pub trait Parameterized {
    fn visit(&self, f: &mut dyn FnMut(&[f64]));

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64]));

    fn num_params(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |s| n += s.len());
        n
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_params());
        self.visit(&mut |s| v.extend_from_slice(s));
        v
    }

    fn set_flat(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.num_params(), "flat parameter length");
        let mut offset = 0;
        self.visit_mut(&mut |s| {
            s.copy_from_slice(&values[offset..offset + s.len()]);
            offset += s.len();
        });
    }

    fn fill(&mut self, value: f64) {
        self.visit_mut(&mut |s| s.fill(value));
    }

    /// Adds `delta` to the parameter at flat position `index`.
    fn nudge(&mut self, index: usize, delta: f64) {
        let mut offset = 0;
        self.visit_mut(&mut |s| {
            if (offset..offset + s.len()).contains(&index) {
                s[index - offset] += delta;
            }
            offset += s.len();
        });
    }

    fn all_finite(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |s| ok &= s.iter().all(|x| x.is_finite()));
        ok
    }
}
