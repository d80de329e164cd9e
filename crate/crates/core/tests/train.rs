use std::time::Instant;

use sarcasm_core::corpus::{split_train_val, SplitSpec, Stratify};
use sarcasm_core::model::{Classifier, Example, HeadKind, HierarchicalConfig, LossKind, ModelSpec, Tokenizer, ToyEncoderConfig};
use sarcasm_core::synthetic::separable_corpus;
use sarcasm_core::train::*;

struct Toy {
    spec: ModelSpec,
    train: Vec<Example>,
    val: Vec<Example>,
}

fn toy(n: usize, seed: u64, hierarchical: Option<HierarchicalConfig>) -> Toy {
    let ds = separable_corpus(n, 0.5, seed);
    let (train, val) = split_train_val(&ds, &SplitSpec::new(0.7, Stratify::Sarcastic, seed)).unwrap();
    let tok = Tokenizer::fit(train.iter().map(|r| r.text.as_str()), 1, 32);
    let spec = ModelSpec {
        head: HeadKind::BinarySoftmax,
        encoder: ToyEncoderConfig {
            max_len: 32,
            ..ToyEncoderConfig::new(tok.vocab_size())
        },
        hierarchical,
        seed,
    };
    Toy {
        spec,
        train: binary_examples(&train, &tok),
        val: binary_examples(&val, &tok),
    }
}

fn toy_config(epochs: usize) -> TrainConfig {
    TrainConfig {
        batch_size: 8,
        clip_norm: Some(1.0),
        ..TrainConfig::new(0.1, epochs, LossKind::Ce, 7)
    }
}

#[test]
fn separable_set_reaches_high_f1() {
    let t = toy(200, 1, None);
    let start = Instant::now();
    let out = train_model(Classifier::new(&t.spec), &t.train, &t.val, &toy_config(5)).unwrap();
    eprintln!("trace {:?} in {:?}", out.trace, start.elapsed());
    let f1 = out.trace.last().unwrap().val_metric;
    assert!(f1 >= 0.95, "final val F1 {f1}");
    let final_f1 = evaluate(&out.model, &t.val).unwrap().f1_sarcastic.unwrap();
    assert!(final_f1 >= 0.95);
}

#[test]
fn weighted_loss_and_hierarchical_stack_also_learn() {
    let h = HierarchicalConfig {
        hidden_size: 8,
        use_attention: true,
        attention_size: None,
    };
    let t = toy(200, 2, Some(h));
    let cfg = TrainConfig {
        loss: LossKind::WeightedCe,
        ..toy_config(5)
    };
    let out = train_model(Classifier::new(&t.spec), &t.train, &t.val, &cfg).unwrap();
    eprintln!("trace {:?}", out.trace);
    assert!(out.trace[out.best_epoch - 1].val_metric >= 0.95);
}

#[test]
fn training_is_deterministic() {
    let t = toy(120, 3, None);
    let a = train_model(Classifier::new(&t.spec), &t.train, &t.val, &toy_config(2)).unwrap();
    let b = train_model(Classifier::new(&t.spec), &t.train, &t.val, &toy_config(2)).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.model, b.model);
}

#[test]
fn train_loss_is_nonincreasing_within_tolerance() {
    let t = toy(200, 4, None);
    let out = train_model(Classifier::new(&t.spec), &t.train, &t.val, &toy_config(5)).unwrap();
    for w in out.trace.windows(2) {
        assert!(w[1].train_loss <= w[0].train_loss * 1.05, "{:?}", out.trace);
    }
}

#[test]
fn best_epoch_is_earliest_maximum() {
    let t = toy(200, 5, None);
    let out = train_model(Classifier::new(&t.spec), &t.train, &t.val, &toy_config(5)).unwrap();
    let max = out.trace.iter().map(|e| e.val_metric).fold(f64::NEG_INFINITY, f64::max);
    let first = out.trace.iter().position(|e| e.val_metric == max).unwrap() + 1;
    assert_eq!(out.best_epoch, first);
}

#[test]
fn config_errors() {
    let t = toy(60, 6, None);
    let err = train_model(Classifier::new(&t.spec), &t.train, &t.val, &toy_config(0)).unwrap_err();
    assert!(matches!(err, TrainError::Config(_)));
    assert!(matches!(
        train_model(Classifier::new(&t.spec), &[], &t.val, &toy_config(1)),
        Err(TrainError::EmptyData(_))
    ));
}

#[test]
fn divergence_names_epoch_and_batch() {
    let t = toy(60, 6, None);
    let cfg = TrainConfig {
        learning_rate: 1e300,
        momentum: 0.0,
        clip_norm: None,
        ..toy_config(3)
    };
    match train_model(Classifier::new(&t.spec), &t.train, &t.val, &cfg) {
        Err(TrainError::Divergence { epoch, batch, .. }) => {
            assert!(epoch >= 1 && batch >= 1);
            let msg = TrainError::Divergence { epoch, batch, loss: f64::NAN }.to_string();
            assert!(msg.contains(&format!("epoch {epoch}")));
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

fn sweep_data(n: usize) -> impl FnMut(&str, &TrainConfig) -> Result<RunData, TrainError> {
    move |_value, cfg| {
        let t = toy(n, 8, Some(HierarchicalConfig { hidden_size: 4, use_attention: false, attention_size: None }));
        let _ = cfg;
        Ok(RunData {
            spec: t.spec,
            test: t.val.clone(),
            train: t.train,
            val: t.val,
        })
    }
}

#[test]
fn learning_rate_sweep_has_one_flagged_row() {
    let spec = SweepSpec {
        axis: SweepAxis::LearningRate,
        values: vec!["1e-5".into(), "1e-6".into(), "4e-6".into()],
        base: toy_config(1),
    };
    let table = sweep(&spec, sweep_data(60)).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert_eq!(table.rows.iter().filter(|r| r.best).count(), 1);
    let values: Vec<&str> = table.rows.iter().map(|r| r.value.as_str()).collect();
    assert_eq!(values, vec!["1e-6", "4e-6", "1e-5"]);
    assert_eq!(table.to_csv().lines().count(), 4);
}

#[test]
fn epoch_sweep_trace_lengths() {
    let spec = SweepSpec {
        axis: SweepAxis::Epochs,
        values: vec!["1".into(), "3".into(), "5".into()],
        base: toy_config(1),
    };
    let table = sweep(&spec, sweep_data(40)).unwrap();
    let lens: Vec<usize> = table.rows.iter().map(|r| r.trace.len()).collect();
    assert_eq!(lens, vec![1, 3, 5]);
    let again = sweep(&spec, sweep_data(40)).unwrap();
    assert_eq!(table, again);
}

#[test]
fn hidden_size_sweep_and_bad_specs() {
    let spec = SweepSpec {
        axis: SweepAxis::HiddenSize,
        values: vec!["2".into(), "3".into()],
        base: toy_config(1),
    };
    assert_eq!(sweep(&spec, sweep_data(40)).unwrap().rows.len(), 2);
    let dup = SweepSpec {
        values: vec!["2".into(), "2".into()],
        ..spec.clone()
    };
    assert!(matches!(sweep(&dup, sweep_data(40)), Err(TrainError::Config(_))));
    let empty = SweepSpec { values: vec![], ..spec.clone() };
    assert!(matches!(sweep(&empty, sweep_data(40)), Err(TrainError::Config(_))));
    let clip = SweepSpec {
        base: TrainConfig { clip_norm: Some(0.0), ..spec.base },
        ..spec
    };
    assert!(matches!(sweep(&clip, sweep_data(40)), Err(TrainError::Config(_))));
}

#[test]
fn sweep_keeps_flagged_model_and_reports() {
    let spec = SweepSpec {
        axis: SweepAxis::Epochs,
        values: vec!["2".into(), "1".into()],
        base: toy_config(1),
    };
    let table = sweep(&spec, sweep_data(60)).unwrap();
    let best = table.best_row().unwrap();
    let (_, model) = table.best_model.as_ref().unwrap();
    let t = toy(60, 8, Some(HierarchicalConfig { hidden_size: 4, use_attention: false, attention_size: None }));
    assert_eq!(evaluate(model, &t.val).unwrap(), best.val_report);
    assert_eq!(best.test_metric, best.test_report.as_ref().and_then(|r| r.f1_sarcastic));
}
