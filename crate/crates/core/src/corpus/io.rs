use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use log::warn;

use super::record::{Dataset, Dialect, Label, LabelVector, Language, Source, TweetRecord};
use super::CorpusError;

const KNOWN_COLUMNS: [&str; 10] = [
    "tweet",
    "sarcastic",
    "rephrase",
    "sarcasm",
    "irony",
    "satire",
    "understatement",
    "overstatement",
    "rhetorical_question",
    "dialect",
];

/// Result of reading a CSV release file.
#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    /// Rows dropped because the tweet cell was empty or NaN.
    pub dropped: usize,
    pub ignored_columns: Vec<String>,
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

pub fn load_csv(path: impl AsRef<Path>, language: Language) -> Result<LoadedCsv, CorpusError> {
    load_csv_as(path, language, Source::Original)
}

pub fn load_csv_as(
    path: impl AsRef<Path>,
    language: Language,
    source: Source,
) -> Result<LoadedCsv, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_csv(file, &dataset_name(path), language, source)
}

/// Empty, `NaN` and `nan` cells are absent.
fn cell(value: Option<&str>) -> Option<&str> {
    let v = value?.trim();
    if v.is_empty() || v.eq_ignore_ascii_case("nan") {
        None
    } else {
        Some(v)
    }
}

fn parse_flag(value: &str, row: u64, column: &str) -> Result<bool, CorpusError> {
    match value.to_lowercase().as_str() {
        "1" | "1.0" | "true" | "yes" => Ok(true),
        "0" | "0.0" | "false" | "no" => Ok(false),
        other => Err(CorpusError::InvalidRow {
            row,
            message: format!("column `{column}` holds non-boolean value `{other}`"),
        }),
    }
}

pub fn read_csv<R: Read>(
    reader: R,
    name: &str,
    language: Language,
    source: Source,
) -> Result<LoadedCsv, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CorpusError::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();

    let find = |col: &str| {
        headers
            .iter()
            .position(|h| h.trim().trim_start_matches('\u{feff}').eq_ignore_ascii_case(col))
    };
    let tweet_col = find("tweet").ok_or_else(|| CorpusError::MissingColumn("tweet".into()))?;
    let sarcastic_col = find("sarcastic");
    let rephrase_col = find("rephrase");
    let dialect_col = find("dialect");
    let label_cols: Vec<(Label, Option<usize>)> =
        Label::ALL.iter().map(|&l| (l, find(l.column()))).collect();

    let ignored_columns: Vec<String> = headers
        .iter()
        .map(|h| h.trim().trim_start_matches('\u{feff}'))
        .filter(|h| !KNOWN_COLUMNS.iter().any(|k| h.eq_ignore_ascii_case(k)))
        .map(str::to_string)
        .collect();
    if !ignored_columns.is_empty() {
        warn!("{name}: ignoring unknown columns {ignored_columns:?}");
    }

    let mut records = Vec::new();
    let mut dropped = 0usize;
    for (index, row) in rdr.records().enumerate() {
        let data_row = index as u64 + 1;
        let row = row.map_err(|e| CorpusError::Parse {
            row: e
                .position()
                .map(|p| p.record())
                .unwrap_or(data_row),
            message: e.to_string(),
        })?;
        let get = |col: Option<usize>| col.and_then(|c| cell(row.get(c)));

        let Some(text) = get(Some(tweet_col)) else {
            dropped += 1;
            continue;
        };
        let mut rec = TweetRecord::new(format!("{name}:{data_row}"), text, source);
        rec.sarcastic = get(sarcastic_col)
            .map(|v| parse_flag(v, data_row, "sarcastic"))
            .transpose()?;
        rec.rephrase = get(rephrase_col).map(str::to_string);
        rec.dialect = get(dialect_col)
            .map(|v| v.parse::<Dialect>())
            .transpose()?;

        let mut labels = LabelVector::default();
        let mut any_label_cell = false;
        for &(label, col) in &label_cols {
            if let Some(v) = get(col) {
                any_label_cell = true;
                labels.set(label, parse_flag(v, data_row, label.column())?);
            }
        }
        // Labels annotate sarcastic tweets only; all-zero vectors on
        // non-sarcastic rows carry no information.
        if any_label_cell && !labels.is_empty() {
            match rec.sarcastic {
                Some(false) => {
                    return Err(CorpusError::InvalidRow {
                        row: data_row,
                        message: "labels set on a non-sarcastic tweet".into(),
                    })
                }
                None => rec.sarcastic = Some(true),
                Some(true) => {}
            }
            rec.labels = Some(labels);
        } else if any_label_cell && rec.is_sarcastic() {
            rec.labels = Some(labels);
        }
        if rec.rephrase.is_some() && rec.sarcastic == Some(false) {
            return Err(CorpusError::InvalidRow {
                row: data_row,
                message: "rephrase given for a non-sarcastic tweet".into(),
            });
        }
        records.push(rec);
    }

    Ok(LoadedCsv {
        dataset: Dataset::new(name, language, records)?,
        dropped,
        ignored_columns,
    })
}

/// Writes the shared-task CSV layout. Absent values become empty cells.
pub fn write_csv<W: Write>(ds: &Dataset, out: W) -> Result<(), CorpusError> {
    let csv_err = |e: csv::Error| CorpusError::Parse {
        row: 0,
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(KNOWN_COLUMNS).map_err(csv_err)?;
    for r in ds {
        let flag = |b: bool| if b { "1" } else { "0" };
        let mut row: Vec<&str> = vec![
            &r.text,
            r.sarcastic.map(flag).unwrap_or(""),
            r.rephrase.as_deref().unwrap_or(""),
        ];
        for l in Label::ALL {
            row.push(r.labels.map(|v| flag(v.get(l))).unwrap_or(""));
        }
        row.push(r.dialect.map(Dialect::as_str).unwrap_or(""));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CorpusError::Io {
        path: ds.name.clone(),
        source: e,
    })
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write_csv(ds, BufWriter::new(file))
}

pub fn write_jsonl<W: Write>(ds: &Dataset, mut out: W) -> Result<(), CorpusError> {
    for r in ds.records() {
        let line = serde_json::to_string(r).map_err(|e| CorpusError::Json {
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(out, "{line}").map_err(|e| CorpusError::Io {
            path: ds.name.clone(),
            source: e,
        })?;
    }
    Ok(())
}

pub fn save_jsonl(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    write_jsonl(ds, &mut w)?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_jsonl<R: Read>(reader: R, name: &str, language: Language) -> Result<Dataset, CorpusError> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::Io {
            path: name.to_string(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TweetRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Json {
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    Dataset::new(name, language, records)
}

pub fn load_jsonl(path: impl AsRef<Path>, language: Language) -> Result<Dataset, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_jsonl(file, &dataset_name(path), language)
}
