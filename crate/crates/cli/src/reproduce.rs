//! Desk-scale reconstruction of the dataset tables plus a toy end-to-end run.

use std::fmt::Write as _;
use std::path::Path;

use sarcasm_core::augment::{balance_by_heuristic, balance_by_repetition, build_bias_schedule, heuristic_targets, BalanceKey};
use sarcasm_core::corpus::{save_csv, Dataset, Label};
use sarcasm_core::synthetic::{ext_nb_like, separable_corpus, BiasPlan};

use crate::error::CliError;
use crate::manifest::{Manifest, Staged};
use crate::{augment, prepare, train_eval, Context, REPORTS_DIR};

pub const TABLE3_TOTALS: [usize; 10] = [4578, 4723, 4868, 5013, 5158, 5303, 5448, 5593, 5738, 5883];
pub const TABLE3_S_PCT: [u32; 10] = [66, 64, 62, 60, 59, 57, 55, 54, 53, 51];
pub const TABLE8_TOTALS: [usize; 10] = [4850, 5052, 5254, 5456, 5658, 5860, 6062, 6264, 6466, 6668];
pub const EXT_UR_TOTAL: usize = 4336;
pub const EXT_EB_TOTAL: usize = 5314;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn s_pct(ds: &Dataset) -> f64 {
    100.0 * ds.sarcastic_count() as f64 / ds.len() as f64
}

fn bias_table(plan: &BiasPlan, seed: u64, published: &[usize; 10]) -> Result<(Vec<Dataset>, String), CliError> {
    let sets = build_bias_schedule(&plan.schedule(seed)?)?;
    let mut csv = String::from("dataset,total,sarcastic,s_pct,ns_pct,published_total\n");
    for (k, b) in sets.iter().enumerate() {
        let s = s_pct(b);
        writeln!(csv, "B{k},{},{},{:.1},{:.1},{}", b.len(), b.sarcastic_count(), s, 100.0 - s, published[k]).unwrap();
    }
    Ok((sets, csv))
}

pub fn bias_checks(seed: u64, staged: &mut Staged) -> Result<Vec<Check>, CliError> {
    let (en, csv) = bias_table(&BiasPlan::english(), seed, &TABLE3_TOTALS)?;
    staged.add("bias_en.csv", csv.into_bytes());
    let worst = en.iter().zip(TABLE3_TOTALS).map(|(b, t)| b.len().abs_diff(t)).max().unwrap_or(usize::MAX);
    let pct_hits = en.iter().zip(TABLE3_S_PCT).filter(|(b, p)| s_pct(b).round() as u32 == *p).count();
    let formula = en.iter().enumerate().all(|(k, b)| b.len() == 4588 + 145 * k);
    let mut checks = vec![Check {
        name: "bias-schedule-en",
        pass: en.len() == 10 && formula && worst <= 15 && pct_hits >= 8,
        detail: format!("totals 4588+145k, max |diff| {worst}, S% matches {pct_hits}/10"),
    }];

    let (ar, csv) = bias_table(&BiasPlan::arabic(), seed, &TABLE8_TOTALS)?;
    staged.add("bias_ar.csv", csv.into_bytes());
    let worst = ar.iter().zip(TABLE8_TOTALS).map(|(b, t)| b.len().abs_diff(t)).max().unwrap_or(usize::MAX);
    let steps_ok = ar.windows(2).all(|w| w[1].len() - w[0].len() == 202);
    let formula = ar.iter().enumerate().all(|(k, b)| b.len() == 4853 + 202 * k);
    checks.push(Check {
        name: "bias-schedule-ar",
        pass: ar.len() == 10 && formula && steps_ok && worst <= 15,
        detail: format!("totals 4853+202k, max |diff| {worst}, increments 202: {steps_ok}"),
    });
    Ok(checks)
}

fn label_shares(ds: &Dataset) -> [f64; 6] {
    let c = ds.label_counts();
    let sum: usize = c.iter().sum();
    c.map(|n| 100.0 * n as f64 / sum as f64)
}

pub fn balance_checks(seed: u64, staged: &mut Staged) -> Result<Vec<Check>, CliError> {
    let nb = ext_nb_like(seed);
    let ur = balance_by_repetition(&nb, BalanceKey::Labels, seed)?;
    let counts = nb.label_counts();
    let targets = heuristic_targets(&counts, counts[Label::Sarcasm.index()])?;
    let eb = balance_by_heuristic(&nb, &targets, seed)?;

    let mut csv = String::from("dataset,total");
    for l in Label::ALL {
        write!(csv, ",{}_pct", l.column()).unwrap();
    }
    csv.push('\n');
    for (name, ds) in [("Ext-NB", &nb), ("Ext-UR", &ur), ("Ext-EB", &eb)] {
        write!(csv, "{name},{}", ds.len()).unwrap();
        for p in label_shares(ds) {
            write!(csv, ",{p:.1}").unwrap();
        }
        csv.push('\n');
    }
    staged.add("balance_ext.csv", csv.into_bytes());

    let spread = label_shares(&ur).iter().map(|p| (p - 100.0 / 6.0).abs()).fold(0.0, f64::max);
    Ok(vec![
        Check {
            name: "uniform-label-balancing",
            pass: ur.len().abs_diff(EXT_UR_TOTAL) <= 10 && spread <= 0.5,
            detail: format!("total {} (published {EXT_UR_TOTAL}), max share deviation {spread:.2} pp", ur.len()),
        },
        Check {
            name: "heuristic-label-balancing",
            pass: eb.len().abs_diff(EXT_EB_TOTAL) <= 20,
            detail: format!("total {} (published {EXT_EB_TOTAL})", eb.len()),
        },
    ])
}

pub const TOY_CONFIG: &str = r#"{
  "schema_version": 1,
  "subtask": "a_en",
  "output_dir": ".",
  "data": { "train": "toy.csv", "train_fraction": 0.7 },
  "preprocess_type": "II",
  "augment": { "balance": ["sarcastic_class"] },
  "model": { "dim": 32, "layers": 2, "max_len": 32 },
  "train": { "learning_rate": 0.1, "epochs": 5, "batch_size": 8, "clip_norm": 1.0 }
}
"#;

/// Writes a 400-record separable corpus and the toy config into `dir`.
pub fn write_toy(dir: &Path, seed: u64) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    save_csv(&separable_corpus(400, 0.4, seed), dir.join("toy.csv"))?;
    let path = dir.join("config.json");
    std::fs::write(&path, TOY_CONFIG).map_err(|e| CliError::io(&path, e))
}

fn toy_check(dir: &Path, seed: u64, quiet: bool) -> Result<Check, CliError> {
    write_toy(dir, seed)?;
    let ctx = Context::load(&dir.join("config.json"), Some(seed), None, quiet)?;
    prepare::run(&ctx)?;
    augment::run(&ctx)?;
    train_eval::run(&ctx)?;
    let rows: Vec<sarcasm_core::train::SweepRow> = serde_json::from_slice(
        &std::fs::read(ctx.dir(REPORTS_DIR).join("runs.json")).map_err(|e| CliError::io(dir, e))?,
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    let best = rows.iter().find(|r| r.best).map_or(0.0, |r| r.val_metric);
    Ok(Check {
        name: "toy-end-to-end",
        pass: best >= 0.95,
        detail: format!("best val F1-sarcastic {best:.4} after 5 epochs"),
    })
}

pub fn run(seed: u64, out: &Path, quiet: bool) -> Result<(), CliError> {
    let mut staged = Staged::new(out);
    let mut checks = bias_checks(seed, &mut staged)?;
    checks.extend(balance_checks(seed, &mut staged)?);
    checks.push(toy_check(&out.join("toy"), seed, true)?);

    let mut summary = String::new();
    for c in &checks {
        writeln!(summary, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail).unwrap();
    }
    if !quiet {
        print!("{summary}");
    }
    staged.add("summary.txt", summary.into_bytes());
    staged.commit(Manifest::new("reproduce-tables", seed, None))?;
    match checks.iter().filter(|c| !c.pass).count() {
        0 => Ok(()),
        n => Err(CliError::Checks(n)),
    }
}
