//! Feature extraction over a directory of plain-text documents.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use synembed::features::{extract_feature_row, FEATURE_NAMES};
use synembed::{Error, Result};

/// `doc_id → label` from a `doc_id,label` CSV. Labels stay textual.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, String>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::data(format!("cannot open labels file {}: {e}", path.display())))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr.headers()?.clone();
    if header.len() != 2 || &header[0] != "doc_id" || &header[1] != "label" {
        return Err(Error::data(format!(
            "labels file {} must have the header `doc_id,label`",
            path.display()
        )));
    }
    let mut labels = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        if labels
            .insert(rec[0].to_string(), rec[1].trim().to_string())
            .is_some()
        {
            return Err(Error::data(format!(
                "labels file repeats doc_id '{}'",
                &rec[0]
            )));
        }
    }
    Ok(labels)
}

/// `*.txt` files directly under `dir`, sorted by name.
pub fn text_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Error::data(format!("cannot read text directory {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::data(format!("no .txt files in {}", dir.display())));
    }
    Ok(files)
}

/// Writes a feature CSV for every `*.txt` file in `dir`; the doc id is the
/// file stem. Every problem file is reported in a single error.
pub fn extract_to_csv<W: Write>(dir: &Path, labels: &Path, uber_cap: f64, out: W) -> Result<usize> {
    let labels = read_labels(labels)?;
    let files = text_files(dir)?;
    let mut rows = Vec::with_capacity(files.len());
    let mut problems = Vec::new();
    for path in &files {
        let doc_id = path
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        let Some(label) = labels.get(&doc_id) else {
            problems.push(format!(
                "{}: no label for doc_id '{doc_id}'",
                path.display()
            ));
            continue;
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                problems.push(format!("{}: {e}", path.display()));
                continue;
            }
        };
        match extract_feature_row(&text, uber_cap) {
            Ok(row) => rows.push((doc_id, label.clone(), row)),
            Err(e) => problems.push(format!("{}: {e}", path.display())),
        }
    }
    if !problems.is_empty() {
        return Err(Error::data(format!(
            "feature extraction failed for {} file(s):\n  {}",
            problems.len(),
            problems.join("\n  ")
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["doc_id", "label"];
    header.extend(FEATURE_NAMES);
    w.write_record(&header)?;
    for (doc_id, label, row) in &rows {
        let mut rec = vec![doc_id.clone(), label.clone()];
        rec.extend(row.iter().map(|(_, v)| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(rows.len())
}
