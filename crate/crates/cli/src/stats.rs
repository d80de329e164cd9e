use std::path::Path;

use sarcasm_core::corpus::{dataset_stats, load_csv, load_jsonl, Language};

use crate::error::CliError;
use crate::manifest::Staged;

/// Stats of a `.csv` or `.jsonl` file, printed as JSON and, with an output
/// dir, written to `stats.json` there.
pub fn run(input: &Path, language: &str, output_dir: Option<&Path>, quiet: bool) -> Result<(), CliError> {
    let lang: Language = language.parse().map_err(|e: sarcasm_core::corpus::CorpusError| CliError::Config(e.to_string()))?;
    if !input.exists() {
        return Err(CliError::Input(format!("{} not found", input.display())));
    }
    let ds = match input.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => load_jsonl(input, lang)?,
        _ => load_csv(input, lang)?.dataset,
    };
    let stats = dataset_stats(&ds);
    let json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    if !quiet {
        println!("{json}");
    }
    if let Some(dir) = output_dir {
        let mut staged = Staged::new(dir);
        staged.add_json("stats.json", &stats);
        let mut m = crate::manifest::Manifest::new("stats", 0, None);
        m.inputs.push(crate::manifest::file_digest(input)?);
        staged.commit(m)?;
    }
    Ok(())
}
