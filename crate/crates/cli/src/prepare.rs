use std::collections::BTreeMap;
use std::path::Path;

use sarcasm_core::corpus::{dataset_stats, load_csv, split_train_val, write_jsonl, Dataset, SplitSpec};

use crate::config::Subtask;
use crate::error::CliError;
use crate::manifest::{Manifest, Staged};
use crate::{Context, PREPARED_DIR};

pub fn jsonl_bytes(ds: &Dataset) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_jsonl(ds, &mut buf)?;
    Ok(buf)
}

/// Loads a release and keeps the records the subtask can use.
pub fn load_release(path: &Path, subtask: Subtask, name: &str) -> Result<(Dataset, usize), CliError> {
    let loaded = load_csv(path, subtask.language())?;
    for col in &loaded.ignored_columns {
        log::info!("{}: ignoring column `{col}`", path.display());
    }
    let ds = loaded.dataset;
    let kept = match subtask {
        Subtask::AEn | Subtask::AAr => {
            if let Some(r) = ds.iter().find(|r| r.sarcastic.is_none()) {
                return Err(CliError::Input(format!("{}: record `{}` has no sarcastic flag", path.display(), r.id)));
            }
            ds.filtered(name, |_| true)
        }
        Subtask::BEn => ds.filtered(name, |r| r.is_sarcastic() && r.labels.is_some_and(|l| !l.is_empty())),
        Subtask::CEn | Subtask::CAr => ds.filtered(name, |r| r.is_sarcastic() && r.rephrase.is_some()),
    };
    if kept.is_empty() {
        let need = match subtask {
            Subtask::BEn => "labelled sarcastic",
            Subtask::CEn | Subtask::CAr => "rephrased sarcastic",
            _ => "",
        };
        return Err(CliError::Input(format!("{} holds no {need} records", path.display())));
    }
    Ok((kept, loaded.dropped))
}

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let (full, dropped) = load_release(&cfg.data.train, cfg.subtask, "full")?;
    let spec = SplitSpec::new(cfg.train_fraction(), cfg.subtask.stratify(), ctx.seed);
    let (train, val) = split_train_val(&full, &spec)?;
    let test = match &cfg.data.test {
        Some(p) => Some(load_release(p, cfg.subtask, "test")?.0),
        None => None,
    };

    let mut staged = Staged::new(ctx.dir(PREPARED_DIR));
    let mut stats = BTreeMap::new();
    stats.insert("full", dataset_stats(&full));
    for (name, ds) in [("train", Some(&train)), ("val", Some(&val)), ("test", test.as_ref())] {
        if let Some(ds) = ds {
            staged.add(format!("{name}.jsonl"), jsonl_bytes(ds)?);
            stats.insert(name, dataset_stats(ds));
        }
    }
    staged.add_json("stats.json", &stats);

    let mut manifest = Manifest::new("prepare", ctx.seed, Some(ctx.config_sha256.clone()));
    manifest.inputs.push(ctx.digest(&cfg.data.train)?);
    if let Some(p) = &cfg.data.test {
        manifest.inputs.push(ctx.digest(p)?);
    }
    manifest.detail("subtask", cfg.subtask);
    manifest.detail("split", spec);
    manifest.detail("dropped_rows", dropped);
    staged.commit(manifest)?;

    let s = &stats["full"];
    ctx.say(format!(
        "prepared {} records ({:.1}% sarcastic): train {}, val {}{}",
        s.total,
        s.sarcastic_pct,
        train.len(),
        val.len(),
        test.map(|t| format!(", test {}", t.len())).unwrap_or_default()
    ));
    Ok(())
}
