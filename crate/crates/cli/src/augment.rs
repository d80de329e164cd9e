use std::path::Path;

use serde::{Deserialize, Serialize};

use sarcasm_core::augment::{
    balance_by_heuristic, balance_by_repetition, balance_labels_with, build_bias_schedule, embedding_substitute,
    heuristic_targets, repeat_to_size, substitution_copy, AugmentManifest, BalanceKey, BiasSchedule,
    SubstitutionConfig,
};
use sarcasm_core::corpus::{load_csv, load_jsonl, Dataset, Label, Language};
use sarcasm_core::embed::{load_vectors, EmbeddingTable};
use sarcasm_core::preprocess::Lexicons;

use crate::config::{BalanceMode, PoolConfig, Subtask};
use crate::error::CliError;
use crate::manifest::{Manifest, Staged, MANIFEST_FILE};
use crate::prepare::{jsonl_bytes, load_release};
use crate::{Context, AUGMENTED_DIR, PREPARED_DIR};

/// One augmented training set as listed in the augment manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub file: String,
    pub records: usize,
    pub sarcastic: usize,
    pub label_counts: [usize; 6],
}

impl DatasetEntry {
    fn of(ds: &Dataset) -> Self {
        DatasetEntry {
            name: ds.name.clone(),
            file: format!("{}.jsonl", ds.name),
            records: ds.len(),
            sarcastic: ds.sarcastic_count(),
            label_counts: ds.label_counts(),
        }
    }
}

/// Datasets listed in `augmented/manifest.json`, in build order.
pub fn listed_datasets(dir: &Path) -> Result<Vec<DatasetEntry>, CliError> {
    let manifest = Manifest::load(&dir.join(MANIFEST_FILE))?;
    let list = manifest
        .details
        .get("datasets")
        .cloned()
        .ok_or_else(|| CliError::Input(format!("{} lists no datasets", dir.display())))?;
    serde_json::from_value(list).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))
}

pub fn load_prepared(ctx: &Context, split: &str) -> Result<Dataset, CliError> {
    let path = ctx.dir(PREPARED_DIR).join(format!("{split}.jsonl"));
    if !path.exists() {
        return Err(CliError::Input(format!("{} not found; run `prepare` first", path.display())));
    }
    Ok(load_jsonl(&path, ctx.config.subtask.language())?)
}

fn load_pool(pool: &PoolConfig, language: Language, keep: impl Fn(Option<bool>) -> bool) -> Result<Dataset, CliError> {
    let ds = load_csv(&pool.path, language)?.dataset;
    let mut records: Vec<_> = ds.iter().filter(|r| keep(r.sarcastic)).cloned().collect();
    if let Some(src) = pool.source {
        records.iter_mut().for_each(|r| r.source = src);
    }
    Ok(Dataset::new(ds.name, language, records)?)
}

fn renamed(mut ds: Dataset, name: &str) -> Dataset {
    ds.name = name.to_string();
    ds
}

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let aug = &cfg.augment;
    let lang = cfg.subtask.language();
    let seed = ctx.seed;
    let train = load_prepared(ctx, "train")?;

    let mut manifest = Manifest::new("augment", seed, Some(ctx.config_sha256.clone()));
    manifest.inputs.push(ctx.digest(&ctx.dir(PREPARED_DIR).join("train.jsonl"))?);
    let mut ops: Vec<AugmentManifest> = Vec::new();
    let mut out: Vec<Dataset> = Vec::new();

    if aug.include_original {
        out.push(renamed(train.clone(), "Original"));
    }

    if let Some(s) = &aug.schedule {
        let mut pools = Vec::new();
        for p in &s.sarcastic_pools {
            pools.push(load_pool(p, lang, |f| f == Some(true))?);
            manifest.inputs.push(ctx.digest(&p.path)?);
        }
        let ns_pool = load_pool(&s.ns_pool, lang, |f| f == Some(false))?;
        manifest.inputs.push(ctx.digest(&s.ns_pool.path)?);
        let spec = BiasSchedule {
            base_pool: train.clone(),
            sarcastic_pools: pools,
            ns_pool,
            increment: s.increment,
            steps: s.steps,
            seed,
        };
        let sets = build_bias_schedule(&spec)?;
        let mut op = AugmentManifest::new("bias_schedule", seed)
            .param("increment", s.increment)
            .param("steps", s.steps)
            .counter("ns_pool", spec.ns_pool.len());
        op.inputs = std::iter::once(&spec.base_pool)
            .chain(&spec.sarcastic_pools)
            .chain(std::iter::once(&spec.ns_pool))
            .map(|d| d.name.clone())
            .collect();
        for (k, b) in sets.into_iter().enumerate() {
            let name = format!("B{k}");
            op.outputs.push(name.clone());
            out.push(renamed(b, &name));
        }
        ops.push(op);
    }

    let mut prefix = "Original";
    let mut base = train.clone();
    if !aug.external.is_empty() {
        let mut records = train.records().to_vec();
        let mut op = AugmentManifest::new("external_merge", seed);
        op.inputs.push(train.name.clone());
        for p in &aug.external {
            let (mut ds, _) = load_release(&p.path, cfg.subtask, "external")?;
            manifest.inputs.push(ctx.digest(&p.path)?);
            op.inputs.push(p.path.display().to_string());
            if let Some(src) = p.source {
                ds = Dataset::new(ds.name.clone(), lang, ds.into_records().into_iter().map(|mut r| {
                    r.source = src;
                    r
                }).collect())?;
            }
            records.extend(ds.into_records());
        }
        base = Dataset::new("Ext-NB", lang, records)?;
        op.outputs.push(base.name.clone());
        ops.push(op.counter("records", base.len()));
        out.push(base.clone());
        prefix = "Ext";
    }

    let vectors: Option<EmbeddingTable> = match &aug.vectors {
        Some(v) => {
            manifest.inputs.push(ctx.digest(&v.path)?);
            Some(load_vectors(&v.path, v.expected_dim)?)
        }
        None => None,
    };
    let lex = Lexicons::builtin();

    let mut embedded_size = None;
    if let (Some(s), Some(table)) = (aug.substitution, &vectors) {
        let sub = SubstitutionConfig {
            copies_per_record: s.copies_per_record,
            max_generated: s.max_generated,
            also_rephrase: s.also_rephrase,
            seed,
        };
        let outcome = embedding_substitute(&train, table, &lex, &sub)?;
        embedded_size = Some(outcome.dataset.len());
        ops.push(
            AugmentManifest::new("embedding_substitution", seed)
                .param("config", sub)
                .counter("generated", outcome.generated)
                .counter("skipped", outcome.skipped),
        );
        out.push(renamed(outcome.dataset, "Original-Embedding"));
    }
    if let Some(r) = aug.repetition {
        let total = r.total.or(embedded_size).expect("validated: repetition has a size");
        out.push(renamed(repeat_to_size(&train, total, seed)?, "Original-Repetition"));
        ops.push(AugmentManifest::new("repetition", seed).counter("total", total));
    }

    for &mode in &aug.balance {
        let name = format!("{prefix}-{}", mode.suffix());
        let ds = match mode {
            BalanceMode::SarcasticClass => balance_by_repetition(&base, BalanceKey::SarcasticClass, seed)?,
            BalanceMode::Labels => balance_by_repetition(&base, BalanceKey::Labels, seed)?,
            BalanceMode::LabelsEmbedding => {
                let table = vectors.as_ref().expect("validated: vectors present");
                let also = aug.substitution.is_some_and(|s| s.also_rephrase);
                balance_labels_with(&base, seed, |parent, n| substitution_copy(parent, n, table, &lex, lang, seed, also))?
            }
            BalanceMode::Heuristic => {
                let counts = base.label_counts();
                let targets = heuristic_targets(&counts, counts[Label::Sarcasm.index()])?;
                let op = AugmentManifest::new("heuristic_targets", seed).param("targets", targets);
                ops.push(op);
                balance_by_heuristic(&base, &targets, seed)?
            }
        };
        let op = AugmentManifest::new(format!("balance_{}", mode.suffix().to_lowercase()), seed)
            .param("mode", mode)
            .counter("added", ds.len() - base.len());
        ops.push(op);
        out.push(renamed(ds, &name));
    }

    if out.is_empty() {
        return Err(CliError::Config("augment block produces no datasets".into()));
    }
    let mut staged = Staged::new(ctx.dir(AUGMENTED_DIR));
    let entries: Vec<DatasetEntry> = out.iter().map(DatasetEntry::of).collect();
    for (ds, e) in out.iter().zip(&entries) {
        staged.add(e.file.clone(), jsonl_bytes(ds)?);
    }
    manifest.detail("subtask", cfg.subtask);
    manifest.detail("datasets", &entries);
    manifest.detail("operations", &ops);
    staged.commit(manifest)?;

    for e in &entries {
        let detail = if cfg.subtask == Subtask::BEn {
            format!("labels {:?}", e.label_counts)
        } else {
            format!("{:.1}% sarcastic", 100.0 * e.sarcastic as f64 / e.records as f64)
        };
        ctx.say(format!("{:<20} {:>6} records  {detail}", e.name, e.records));
    }
    Ok(())
}
