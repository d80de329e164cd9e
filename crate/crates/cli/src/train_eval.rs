use std::collections::BTreeMap;

use sarcasm_core::augment::pair_swap_half;
use sarcasm_core::corpus::{load_jsonl, Dataset, Language};
use sarcasm_core::eval::{build_report_table, ReportRow};
use sarcasm_core::model::{Checkpoint, Example, HeadKind, ModelSpec, Target, Tokenizer, ToyEncoderConfig};
use sarcasm_core::preprocess::{apply_pipeline, Lexicons, PreprocessType};
use sarcasm_core::rng::sub_seed;
use sarcasm_core::train::{sweep, RunData, SweepAxis, SweepSpec, TrainError};

use crate::augment::{listed_datasets, load_prepared};
use crate::error::CliError;
use crate::manifest::{Manifest, Staged, MANIFEST_FILE};
use crate::{Context, AUGMENTED_DIR, PREPARED_DIR, REPORTS_DIR};

/// Preprocessed text (or text pair) with its target.
struct Item {
    a: String,
    b: Option<String>,
    target: Target,
}

fn items(ds: &Dataset, head: HeadKind, pt: PreprocessType, lex: &Lexicons, pair_seed: u64) -> Result<Vec<Item>, TrainError> {
    let lang: Language = ds.language;
    let pp = |t: &str| apply_pipeline(t, pt, lang, lex).map_err(|e| TrainError::Config(e.to_string()));
    let mut out = Vec::with_capacity(ds.len());
    match head {
        HeadKind::BinarySoftmax => {
            for r in ds {
                if let Some(s) = r.sarcastic {
                    out.push(Item { a: pp(&r.text)?, b: None, target: Target::Class(usize::from(s)) });
                }
            }
        }
        HeadKind::MultilabelSigmoid => {
            for r in ds {
                if let Some(l) = r.labels {
                    out.push(Item { a: pp(&r.text)?, b: None, target: Target::Labels(l.to_array()) });
                }
            }
        }
        HeadKind::PairSoftmax => {
            let pairs = pair_swap_half(ds, pair_seed).map_err(|e| TrainError::Config(e.to_string()))?;
            for p in &pairs.pairs {
                out.push(Item {
                    a: pp(&p.text_a)?,
                    b: Some(pp(&p.text_b)?),
                    target: Target::Class(usize::from(p.label)),
                });
            }
        }
    }
    Ok(out)
}

fn encode(items: &[Item], tok: &Tokenizer) -> Vec<Example> {
    items
        .iter()
        .map(|it| Example {
            tokens: match &it.b {
                Some(b) => tok.encode_pair(&it.a, b),
                None => tok.encode(&it.a),
            },
            target: it.target,
        })
        .collect()
}

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let head = cfg.subtask.head();
    let lang = cfg.subtask.language();
    let seed = ctx.seed;
    let val = load_prepared(ctx, "val")?;
    let test_path = ctx.dir(PREPARED_DIR).join("test.jsonl");
    let test = if test_path.exists() { Some(load_jsonl(&test_path, lang)?) } else { None };

    let mut manifest = Manifest::new("train-eval", seed, Some(ctx.config_sha256.clone()));
    let aug_dir = ctx.dir(AUGMENTED_DIR);
    let mut datasets: Vec<Dataset> = Vec::new();
    if aug_dir.join(MANIFEST_FILE).exists() {
        for e in listed_datasets(&aug_dir)? {
            let path = aug_dir.join(&e.file);
            manifest.inputs.push(ctx.digest(&path)?);
            let mut ds = load_jsonl(&path, lang)?;
            ds.name = e.name;
            datasets.push(ds);
        }
    } else {
        let mut ds = load_prepared(ctx, "train")?;
        manifest.inputs.push(ctx.digest(&ctx.dir(PREPARED_DIR).join("train.jsonl"))?);
        ds.name = "Original".into();
        datasets.push(ds);
    }
    manifest.inputs.push(ctx.digest(&ctx.dir(PREPARED_DIR).join("val.jsonl"))?);
    if test.is_some() {
        manifest.inputs.push(ctx.digest(&test_path)?);
    }
    let names: Vec<String> = datasets.iter().map(|d| d.name.clone()).collect();

    let (axis, values) = match &cfg.sweep {
        Some(s) => {
            let v = s.string_values()?;
            (s.axis, if v.is_empty() { names.clone() } else { v })
        }
        None => (SweepAxis::Dataset, names.clone()),
    };
    let base_name = match &cfg.train.dataset {
        Some(n) => n.clone(),
        None if names.iter().any(|n| n == "Original") => "Original".into(),
        None => names[0].clone(),
    };
    for n in std::iter::once(&base_name).chain(values.iter().filter(|_| axis == SweepAxis::Dataset)) {
        if !names.contains(n) {
            return Err(CliError::Config(format!("dataset `{n}` not found; available: {}", names.join(", "))));
        }
    }

    let lex = Lexicons::builtin();
    let model = cfg.model;
    let mut tokenizers: BTreeMap<String, Tokenizer> = BTreeMap::new();
    let spec = SweepSpec {
        axis,
        values,
        base: cfg.train_config(seed),
    };
    let table = sweep(&spec, |value, tc| {
        let name = if axis == SweepAxis::Dataset { value } else { base_name.as_str() };
        let train = datasets.iter().find(|d| d.name == name).expect("checked above");
        let pt = tc.preprocess_type;
        let tr = items(train, head, pt, &lex, sub_seed(seed, "pairs/train", None))?;
        let va = items(&val, head, pt, &lex, sub_seed(seed, "pairs/val", None))?;
        let te = match &test {
            Some(t) => items(t, head, pt, &lex, sub_seed(seed, "pairs/test", None))?,
            None => Vec::new(),
        };
        let texts = tr.iter().flat_map(|it| std::iter::once(it.a.as_str()).chain(it.b.as_deref()));
        let tok = Tokenizer::fit(texts, model.min_count, model.max_len);
        let run = RunData {
            spec: ModelSpec {
                head,
                encoder: ToyEncoderConfig {
                    vocab_size: tok.vocab_size(),
                    dim: model.dim,
                    layers: model.layers,
                    max_len: model.max_len,
                },
                hierarchical: model.hierarchical,
                seed,
            },
            train: encode(&tr, &tok),
            val: encode(&va, &tok),
            test: encode(&te, &tok),
        };
        tokenizers.insert(value.to_string(), tok);
        Ok(run)
    })?;

    let dataset_of = |value: &str| if axis == SweepAxis::Dataset { value.to_string() } else { base_name.clone() };
    let pt_of = |value: &str| if axis == SweepAxis::PreprocessType { value.to_string() } else { cfg.preprocess_type.to_string() };
    let rows = table
        .rows
        .iter()
        .map(|r| ReportRow {
            run: if axis == SweepAxis::Dataset { r.value.clone() } else { format!("{}={}", axis.name(), r.value) },
            dataset: dataset_of(&r.value),
            preprocess_type: pt_of(&r.value),
            report: r.test_report.clone().unwrap_or_else(|| r.val_report.clone()),
        })
        .collect();
    let report = build_report_table(rows).map_err(|e| CliError::Train(e.to_string()))?;

    let mut staged = Staged::new(ctx.dir(REPORTS_DIR));
    staged.add("report.txt", report.to_text().into_bytes());
    staged.add("report.csv", report.to_csv().into_bytes());
    staged.add("sweep.csv", table.to_csv().into_bytes());
    staged.add_json("runs.json", &table.rows);
    let best = table.best_row().expect("sweep has rows");
    if let Some((spec, model)) = table.best_model.clone() {
        let tok = tokenizers.remove(&best.value).expect("tokenizer per run");
        let mut ck = Checkpoint::new(spec, tok, model);
        ck.metadata.insert("subtask".into(), serde_json::to_value(cfg.subtask).expect("serializes"));
        ck.metadata.insert("dataset".into(), dataset_of(&best.value).into());
        ck.metadata.insert("preprocess_type".into(), pt_of(&best.value).into());
        ck.metadata.insert("sweep_axis".into(), axis.name().into());
        ck.metadata.insert("sweep_value".into(), best.value.clone().into());
        ck.metadata.insert("val_metric".into(), best.val_metric.into());
        let mut bytes = serde_json::to_vec(&ck).map_err(|e| CliError::Train(e.to_string()))?;
        bytes.push(b'\n');
        staged.add("model.json", bytes);
    }
    manifest.detail("subtask", cfg.subtask);
    manifest.detail("sweep", &spec);
    manifest.detail("best", &best.value);
    staged.commit(manifest)?;

    ctx.say(report.to_text().trim_end());
    Ok(())
}
