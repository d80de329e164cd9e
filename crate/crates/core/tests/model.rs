use approx::assert_abs_diff_eq;
use ndarray::{array, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sarcasm_core::corpus::Label;
use sarcasm_core::model::*;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0))
}

#[test]
fn encode_shapes_and_pooling() {
    let enc = ToyEncoder::new(
        ToyEncoderConfig {
            vocab_size: 20,
            dim: 8,
            layers: 2,
            max_len: 16,
        },
        3,
    );
    let (states, pooled) = encode(&enc, &[1, 5, 6, 7, 2]);
    assert_eq!(states.dim(), (5, 8));
    assert_eq!(pooled, states.row(0));
    let (one, pooled1) = encode(&enc, &[1]);
    assert_eq!(one.dim(), (1, 8));
    assert_eq!(pooled1, one.row(0));
    assert_eq!(encode(&enc, &[1, 5, 6]), encode(&enc, &[1, 5, 6]));
    let long: Vec<u32> = (0..40).map(|i| i % 20).collect();
    assert_eq!(encode(&enc, &long).0.nrows(), 16);
    assert!(states.iter().all(|x| x.is_finite()));
}

#[test]
fn bilstm_with_zero_weights_is_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut lstm = BiLstm::new(4, 3, &mut rng);
    lstm.fill(0.0);
    let out = bilstm_forward(random_matrix(5, 4, 2).view(), &lstm);
    assert_eq!(out.dim(), (5, 6));
    assert!(out.iter().all(|&x| x == 0.0));
}

/// Plain-loop LSTM direction over `order`, gate rows i, f, g, o.
fn oracle_direction(cell: &LstmCell, xs: &Array2<f64>, order: &[usize]) -> Vec<Vec<f64>> {
    let h = cell.wh.ncols();
    let d = xs.ncols();
    let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
    let mut hp = vec![0.0; h];
    let mut cp = vec![0.0; h];
    let mut out = vec![vec![0.0; h]; xs.nrows()];
    for &t in order {
        let gate = |block: usize, j: usize| {
            let r = block * h + j;
            let mut a = cell.b[r];
            for k in 0..d {
                a += cell.wx[[r, k]] * xs[[t, k]];
            }
            for k in 0..h {
                a += cell.wh[[r, k]] * hp[k];
            }
            a
        };
        let mut hn = vec![0.0; h];
        let mut cn = vec![0.0; h];
        for j in 0..h {
            let i = sig(gate(0, j));
            let f = sig(gate(1, j));
            let g = gate(2, j).tanh();
            let o = sig(gate(3, j));
            cn[j] = f * cp[j] + i * g;
            hn[j] = o * cn[j].tanh();
        }
        out[t] = hn.clone();
        hp = hn;
        cp = cn;
    }
    out
}

#[test]
fn bilstm_matches_hand_recurrence() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lstm = BiLstm::new(4, 2, &mut rng);
    let xs = random_matrix(3, 4, 8);
    let out = bilstm_forward(xs.view(), &lstm);
    let fwd = oracle_direction(&lstm.forward, &xs, &[0, 1, 2]);
    let bwd = oracle_direction(&lstm.backward, &xs, &[2, 1, 0]);
    for t in 0..3 {
        for j in 0..2 {
            assert_abs_diff_eq!(out[[t, j]], fwd[t][j], epsilon = 1e-12);
            assert_abs_diff_eq!(out[[t, 2 + j]], bwd[t][j], epsilon = 1e-12);
        }
    }
}

#[test]
fn bilstm_single_step_uses_both_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let lstm = BiLstm::new(3, 2, &mut rng);
    let xs = random_matrix(1, 3, 4);
    let out = bilstm_forward(xs.view(), &lstm);
    assert_eq!(out.dim(), (1, 4));
    assert_abs_diff_eq!(out[[0, 0]], oracle_direction(&lstm.forward, &xs, &[0])[0][0], epsilon = 1e-12);
    assert_abs_diff_eq!(out[[0, 3]], oracle_direction(&lstm.backward, &xs, &[0])[0][1], epsilon = 1e-12);
}

#[test]
fn attention_identical_states_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = AttentionParams::new(3, 4, &mut rng);
    let row = array![0.3, -0.2, 0.9, 0.1];
    let states = Array2::from_shape_fn((5, 4), |(_, j)| row[j]);
    let alpha = attention_weights(states.view(), &p);
    for a in alpha.iter() {
        assert_abs_diff_eq!(*a, 0.2, epsilon = 1e-12);
    }
    let out = attention_pool(states.view(), &p);
    for j in 0..4 {
        assert_abs_diff_eq!(out[j], row[j], epsilon = 1e-12);
    }
    let single = states.slice(ndarray::s![0..1, ..]).to_owned();
    assert_eq!(attention_weights(single.view(), &p).to_vec(), vec![1.0]);
}

#[test]
fn attention_two_steps_by_hand() {
    let p = AttentionParams {
        w: array![[1.0, 0.0], [0.0, 1.0]],
        v: array![1.0, -1.0],
    };
    let states = array![[0.5, 0.0], [0.0, 0.5]];
    // e1 = tanh(0.5), e2 = -tanh(0.5)
    let e1 = 0.5f64.tanh();
    let a1 = e1.exp() / (e1.exp() + (-e1).exp());
    let out = attention_pool(states.view(), &p);
    assert_abs_diff_eq!(out[0], 0.5 * a1, epsilon = 1e-12);
    assert_abs_diff_eq!(out[1], 0.5 * (1.0 - a1), epsilon = 1e-12);
}

fn spec(head: HeadKind, hierarchical: Option<HierarchicalConfig>, seed: u64) -> ModelSpec {
    ModelSpec {
        head,
        encoder: ToyEncoderConfig {
            vocab_size: 12,
            dim: 6,
            layers: 2,
            max_len: 10,
        },
        hierarchical,
        seed,
    }
}

#[test]
fn zero_output_layer_gives_uniform_probabilities() {
    let mut m = Classifier::new(&spec(HeadKind::BinarySoftmax, None, 1));
    m.out.fill(0.0);
    assert_eq!(m.forward_binary(&[1, 4, 2]).unwrap(), [0.5, 0.5]);

    let mut m = Classifier::new(&spec(HeadKind::MultilabelSigmoid, None, 1));
    m.out.fill(0.0);
    assert_eq!(m.forward_multilabel(&[1, 4, 2]).unwrap(), [0.5; 6]);
    m.out.b[2] = 1e3;
    let p = m.forward_multilabel(&[1, 4, 2]).unwrap();
    assert!(p[2] > 1.0 - 1e-12);
    assert_eq!(p[0], 0.5);

    let mut m = Classifier::new(&spec(HeadKind::PairSoftmax, None, 1));
    m.out.fill(0.0);
    assert_eq!(m.forward_pair(&[4, 5], &[6]).unwrap(), [0.5, 0.5]);
}

#[test]
fn head_mismatch_is_an_error() {
    let m = Classifier::new(&spec(HeadKind::BinarySoftmax, None, 1));
    assert!(m.forward_multilabel(&[1, 2]).is_err());
    assert!(m.forward_pair(&[4], &[5]).is_err());
}

#[test]
fn decode_threshold() {
    let v = decode_multilabel(&[0.9, 0.1, 0.6, 0.2, 0.2, 0.2]);
    assert_eq!(v.labels().collect::<Vec<_>>(), vec![Label::Sarcasm, Label::Satire]);
}

#[test]
fn hierarchical_shapes_and_pair_normalization() {
    for use_attention in [true, false] {
        let h = HierarchicalConfig {
            hidden_size: 5,
            use_attention,
            attention_size: None,
        };
        let m = Classifier::new(&spec(HeadKind::BinarySoftmax, Some(h), 4));
        assert_eq!(m.out.inputs(), 10);
        let p = m.forward_binary(&[1, 4, 5, 2]).unwrap();
        assert_abs_diff_eq!(p[0] + p[1], 1.0, epsilon = 1e-12);
    }
    let m = Classifier::new(&spec(HeadKind::PairSoftmax, None, 4));
    for (a, b) in [(&[4u32, 5][..], &[6u32][..]), (&[6], &[4, 5])] {
        let p = m.forward_pair(a, b).unwrap();
        assert_abs_diff_eq!(p[0] + p[1], 1.0, epsilon = 1e-12);
    }
}

#[test]
fn pair_truncation_recomputed() {
    for (a, b, max) in [(10usize, 3usize, 10usize), (7, 7, 12), (1, 20, 8), (2, 2, 64)] {
        let seq = pair_sequence(&vec![4; a], &vec![5; b], max);
        let la = seq.iter().filter(|&&t| t == 4).count();
        let lb = seq.iter().filter(|&&t| t == 5).count();
        assert!(seq.len() <= max.max(a + b + 3).min(max));
        assert_eq!(la + lb, (a + b).min(max - 3));
        // The longer side never ends up strictly shorter than the other when trimmed.
        if a + b > max - 3 {
            assert!(la.abs_diff(lb) <= 1 || la == a || lb == b);
        }
    }
}

fn examples(head: HeadKind) -> Vec<Example> {
    let target = |i: usize| match head {
        HeadKind::MultilabelSigmoid => Target::Labels([i % 2 == 0, true, false, i == 1, false, true]),
        _ => Target::Class(i % 2),
    };
    [vec![1u32, 4, 7, 2], vec![1, 5, 2], vec![1, 9, 3, 8, 2]]
        .into_iter()
        .enumerate()
        .map(|(i, tokens)| Example { tokens, target: target(i) })
        .collect()
}

fn gradcheck(head: HeadKind, hierarchical: Option<HierarchicalConfig>, loss: LossKind, seed: u64) -> GradCheck {
    let mut m = Classifier::new(&spec(head, hierarchical, seed));
    // Query weights start at zero; jitter everything so no gradient is trivially zero.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jittered: Vec<f64> = m.to_flat().iter().map(|p| p + rng.gen_range(-0.3..0.3)).collect();
    m.set_flat(&jittered);
    let batch = examples(head);
    let weights = ClassWeights::from_counts(3, 1).unwrap();
    let mut g = m.zeros_like();
    m.loss_and_grad(&batch, loss, &weights, &mut g).unwrap();
    check_gradients(&m, &g, |p| p.loss(&batch, loss, &weights).unwrap(), 1e-5)
}

#[test]
fn gradients_match_finite_differences() {
    let h_attn = Some(HierarchicalConfig {
        hidden_size: 3,
        use_attention: true,
        attention_size: Some(4),
    });
    let h_plain = Some(HierarchicalConfig {
        hidden_size: 3,
        use_attention: false,
        attention_size: None,
    });
    let cases = [
        (HeadKind::BinarySoftmax, None, LossKind::Ce),
        (HeadKind::BinarySoftmax, None, LossKind::WeightedCe),
        (HeadKind::MultilabelSigmoid, None, LossKind::Bce),
        (HeadKind::PairSoftmax, None, LossKind::Ce),
        (HeadKind::BinarySoftmax, h_attn, LossKind::WeightedCe),
        (HeadKind::BinarySoftmax, h_plain, LossKind::Ce),
        (HeadKind::MultilabelSigmoid, h_attn, LossKind::Bce),
    ];
    for (head, h, loss) in cases {
        let r = gradcheck(head, h, loss, 11);
        assert!(r.max_rel_error < 1e-4, "{head:?} {h:?} {loss:?}: {r:?}");
    }
}

#[test]
fn checkpoint_round_trip() {
    let s = spec(HeadKind::BinarySoftmax, Some(HierarchicalConfig { hidden_size: 2, use_attention: true, attention_size: None }), 5);
    let model = Classifier::new(&s);
    let tok = Tokenizer::fit(["a b c", "d e"], 1, 10);
    let ck = Checkpoint::new(s, tok, model.clone());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    ck.save(&path).unwrap();
    let back = Checkpoint::load(&path).unwrap();
    assert_eq!(back.model, model);
    assert_eq!(back.tokenizer.encode("a zz"), ck.tokenizer.encode("a zz"));
    let bad = std::fs::read_to_string(&path).unwrap().replacen("\"version\":1", "\"version\":9", 1);
    assert!(Checkpoint::from_json(&bad).is_err());
}

proptest! {
    #[test]
    fn softmax_and_sigmoid_ranges(z in proptest::collection::vec(-50.0f64..50.0, 1..8)) {
        let p = softmax(&z);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        for q in sigmoid(&z) {
            prop_assert!(q > 0.0 && q < 1.0);
        }
    }

    #[test]
    fn attention_output_is_convex(seed in 0u64..1000, t in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = AttentionParams::new(3, 4, &mut rng);
        let states = random_matrix(t, 4, seed + 1);
        let alpha = attention_weights(states.view(), &p);
        prop_assert!((alpha.sum() - 1.0).abs() < 1e-6);
        let out = attention_pool(states.view(), &p);
        for j in 0..4 {
            let col = states.column(j);
            let lo = col.fold(f64::INFINITY, |a, &b| a.min(b));
            let hi = col.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            prop_assert!(out[j] >= lo - 1e-12 && out[j] <= hi + 1e-12);
        }
    }

    #[test]
    fn weight_scaling_leaves_batch_loss_unchanged(seed in 0u64..1000, c in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..10);
        let probs: Vec<[f64; 2]> = (0..n).map(|_| { let p = rng.gen_range(0.01..0.99); [1.0 - p, p] }).collect();
        let targets: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let w = ClassWeights::from_counts(rng.gen_range(1..50), rng.gen_range(1..50)).unwrap();
        let scaled = ClassWeights([w.0[0] * c, w.0[1] * c]);
        let a = weighted_cross_entropy(&probs, &targets, &w);
        let b = weighted_cross_entropy(&probs, &targets, &scaled);
        prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }
}
